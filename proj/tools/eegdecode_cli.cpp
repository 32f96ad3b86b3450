#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eegdecode/error.hpp"
#include "eegdecode/evaluation.hpp"
#include "eegdecode/pipeline.hpp"
#include "eegdecode/render.hpp"
#include "eegdecode/rng.hpp"
#include "eegdecode/stats.hpp"
#include "eegdecode/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eegdecode;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Rows of one pairwise comparison; with no task every row takes part.
FeatureMatrix select_comparison(const FeatureMatrix& fm, const std::string& task, const std::string& negative,
                                const std::string& positive) {
  if (task.empty()) return fm;
  if (negative.empty() || positive.empty()) throw ConfigError("--task requires --negative and --positive");
  return comparison_rows(fm, {task, negative, positive});
}

struct ComparisonArgs {
  std::string task;
  std::string negative;
  std::string positive;

  void add(CLI::App* app) {
    app->add_option("--task", task, "Restrict to one task");
    app->add_option("--negative", negative, "Negative (reference) condition");
    app->add_option("--positive", positive, "Positive condition");
  }
  std::string name() const { return task.empty() ? negative + "_vs_" + positive : task + ":" + negative + "_vs_" + positive; }
};

struct MlArgs {
  std::uint64_t seed = 0;
  int n_per_class = 40;
  bool with_replacement = false;
  EvaluationConfig eval;

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Master seed")->required();
    app->add_option("--n-per-class", n_per_class, "Rows drawn per (subject, class); 0 keeps every row");
    app->add_flag("--with-replacement", with_replacement, "Sample short cells with replacement");
    app->add_option("--inner-folds", eval.inner_folds, "Inner cross-validation folds (0 disables)");
    app->add_option("--degree", eval.svm.degree, "Polynomial kernel degree");
    app->add_option("--coef0", eval.svm.coef0, "Polynomial kernel constant term");
    app->add_option("--box-constraint", eval.svm.c, "SVM box constraint C");
    app->add_option("--tolerance", eval.svm.tolerance, "SMO stopping tolerance");
  }

  FeatureMatrix prepare(const FeatureMatrix& fm, const ComparisonArgs& cmp) {
    eval.class_key = LabelKey::Condition;
    eval.negative_class = cmp.negative;
    eval.positive_class = cmp.positive;
    auto rows = select_comparison(fm, cmp.task, cmp.negative, cmp.positive);
    if (n_per_class > 0) {
      rows = balance_classes(rows, LabelKey::Condition, n_per_class, derive_seed(seed, "balance:" + cmp.name()),
                             with_replacement);
    }
    return rows;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"EEG band-power / PDC feature pipeline with LOSO kernel-SVM evaluation"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-subject study");
  fs::path synth_spec, synth_out;
  std::uint64_t synth_seed = 0;
  synth->add_option("--spec", synth_spec, "Synth spec JSON")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Master seed (overrides the spec)")->required();

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Filter, repair and re-reference recordings");
  fs::path prep_in, prep_out;
  std::uint64_t prep_seed = 0;
  std::string montage_id = "standard_57";
  std::string baseline_label = "rest";
  PreprocessConfig pcfg;
  bool no_asr = false, no_car = false, no_eog = false, no_bad = false, no_filter = false;
  prep->add_option("--input", prep_in, "Recording manifest or directory of recordings")->required();
  prep->add_option("--out", prep_out, "Output directory")->required();
  prep->add_option("--seed", prep_seed, "Seed for the RANSAC channel subsets")->required();
  prep->add_option("--montage", montage_id, "Montage id");
  prep->add_option("--baseline-label", baseline_label, "Annotation used for ASR calibration");
  prep->add_option("--low-hz", pcfg.low_hz, "Band-pass low edge");
  prep->add_option("--high-hz", pcfg.high_hz, "Band-pass high edge");
  prep->add_option("--transition-bw-hz", pcfg.transition_bw_hz, "FIR transition bandwidth");
  prep->add_option("--flat-s", pcfg.bad_channels.flat_s, "Flat-line duration threshold");
  prep->add_option("--noise-z", pcfg.bad_channels.noise_z, "Noisy-channel robust z threshold");
  prep->add_option("--corr-threshold", pcfg.bad_channels.corr_threshold, "Correlation threshold");
  prep->add_option("--asr-cutoff", pcfg.asr_cutoff, "ASR cutoff in standard deviations");
  prep->add_flag("--no-filter", no_filter, "Skip the band-pass filter");
  prep->add_flag("--no-bad-channels", no_bad, "Skip bad-channel screening");
  prep->add_flag("--no-asr", no_asr, "Skip ASR");
  prep->add_flag("--no-car", no_car, "Skip common average reference");
  prep->add_flag("--no-eog-regression", no_eog, "Skip EOG regression");

  // features
  auto* feat = app.add_subcommand("features", "Extract normalized band-power and PDC features");
  fs::path feat_in, feat_out;
  FeatureConfig fcfg;
  bool no_pdc = false, no_bp = false, raw = false;
  std::string feat_montage = "standard_57";
  feat->add_option("--input", feat_in, "Directory of (preprocessed) recordings")->required();
  feat->add_option("--out", feat_out, "Output CSV")->required();
  feat->add_option("--montage", feat_montage, "Montage id");
  feat->add_option("--window-s", fcfg.window_s, "Window length");
  feat->add_option("--hop-s", fcfg.hop_s, "Window hop");
  feat->add_option("--span-s", fcfg.span_s, "Analysed span per segment (0 = whole segment)");
  feat->add_option("--nw", fcfg.multitaper.nw, "Time-half-bandwidth product");
  feat->add_option("--k", fcfg.multitaper.k, "Number of tapers");
  feat->add_option("--pdc-order", fcfg.pdc_options.order, "MVAR order");
  feat->add_option("--pdc-subset", fcfg.pdc_subset, "Montage subset for PDC");
  feat->add_option("--baseline-label", fcfg.baseline_label, "Baseline annotation label");
  feat->add_flag("--no-pdc", no_pdc, "Band power only");
  feat->add_flag("--no-band-power", no_bp, "PDC only");
  feat->add_flag("--raw", raw, "Skip baseline normalization and standardization");

  // rank
  auto* rank = app.add_subcommand("rank", "Rank features by Kruskal-Wallis p");
  fs::path rank_in, rank_out;
  ComparisonArgs rank_cmp;
  double alpha = 0.01;
  int n_comparisons = 0;
  rank->add_option("--features", rank_in, "Feature CSV")->required();
  rank->add_option("--out", rank_out, "Output JSON")->required();
  rank->add_option("--alpha", alpha, "Family-wise level");
  rank->add_option("--comparisons", n_comparisons, "Bonferroni divisor (0 = feature count)");
  rank_cmp.add(rank);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "LOSO evaluation with scrambled-label baseline");
  fs::path eval_in, eval_out;
  ComparisonArgs eval_cmp;
  MlArgs eval_ml;
  int n_features = 180;
  eval->add_option("--features", eval_in, "Feature CSV")->required();
  eval->add_option("--out", eval_out, "Output JSON")->required();
  eval->add_option("--n-features", n_features, "Top-ranked features used per fold");
  eval_cmp.add(eval);
  eval_ml.add(eval);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Accuracy against number of ranked features");
  fs::path sweep_in, sweep_out;
  ComparisonArgs sweep_cmp;
  MlArgs sweep_ml;
  int max_features = 400;
  sweep->add_option("--features", sweep_in, "Feature CSV")->required();
  sweep->add_option("--out", sweep_out, "Output CSV")->required();
  sweep->add_option("--max-features", max_features, "Largest feature count");
  sweep_cmp.add(sweep);
  sweep_ml.add(sweep);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run every stage from a JSON config");
  fs::path pipe_cfg, pipe_out;
  pipe->add_option("--config", pipe_cfg, "Pipeline config JSON")->required();
  pipe->add_option("--out", pipe_out, "Override output_dir");

  // plot
  auto* plot = app.add_subcommand("plot", "Render SVG plots");
  std::string plot_kind;
  fs::path plot_in, plot_out;
  std::string plot_montage = "standard_57", plot_title;
  plot->add_option("--kind", plot_kind, "topomap | accuracy | sweep")
      ->required()
      ->check(CLI::IsMember({"topomap", "accuracy", "sweep"}));
  plot->add_option("--input", plot_in,
                   "topomap: CSV 'electrode,value'; accuracy: evaluation JSON; sweep: sweep CSV")
      ->required();
  plot->add_option("--out", plot_out, "Output SVG (sweep: output directory)")->required();
  plot->add_option("--montage", plot_montage, "Montage id (topomap)");
  plot->add_option("--title", plot_title, "Title");

  // behavior
  auto* beh = app.add_subcommand("behavior", "Kruskal-Wallis report on behavioral metrics");
  fs::path beh_in, beh_out;
  beh->add_option("--csv", beh_in, "Behavioral CSV")->required();
  beh->add_option("--out", beh_out, "Output JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*synth) {
    auto j = read_json(synth_spec);
    j["seed"] = synth_seed;
    const auto spec = synth_spec_from_json(j);
    write_study(gen_study(spec), synth_out);
    std::cout << "wrote " << spec.n_subjects << " recordings to " << synth_out.string() << '\n';
  } else if (*prep) {
    pcfg.filter = !no_filter;
    pcfg.detect_bad_channels = !no_bad;
    pcfg.asr = !no_asr;
    pcfg.car = !no_car;
    pcfg.eog_regression = !no_eog;
    const Montage montage = standard_montage(montage_id);
    std::vector<fs::path> inputs;
    if (fs::is_directory(prep_in)) {
      for (const auto& e : fs::directory_iterator(prep_in)) {
        if (e.path().extension() == ".json" && fs::exists(fs::path(e.path()).replace_extension(".f32"))) inputs.push_back(e.path());
      }
      std::sort(inputs.begin(), inputs.end());
    } else {
      inputs.push_back(prep_in);
    }
    if (inputs.empty()) throw DataError("no recordings found in " + prep_in.string());
    for (const auto& in : inputs) {
      const auto rec = load_recording(in);
      PreprocessLog log;
      const auto clean = preprocess_recording(rec, pcfg, montage, baseline_label,
                                              derive_seed(prep_seed, "ransac:" + rec.subject_id), &log);
      save_recording(clean, prep_out);
      std::cout << rec.subject_id << ": " << log.bad_channels.size() << " bad channel(s)\n";
    }
  } else if (*feat) {
    fcfg.pdc = !no_pdc;
    fcfg.band_power = !no_bp;
    const Montage montage = standard_montage(feat_montage);
    std::vector<fs::path> inputs;
    for (const auto& e : fs::directory_iterator(feat_in)) {
      if (e.path().extension() == ".json" && fs::exists(fs::path(e.path()).replace_extension(".f32"))) inputs.push_back(e.path());
    }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw DataError("no recordings found in " + feat_in.string());
    FeatureMatrix task, base;
    for (const auto& in : inputs) {
      auto rec = std::make_shared<const Recording>(load_recording(in));
      auto sf = extract_features(rec, fcfg, montage);
      task = task.features.empty() ? std::move(sf.task) : vconcat(task, sf.task);
      base = base.features.empty() ? std::move(sf.baseline) : vconcat(base, sf.baseline);
    }
    write_feature_csv(raw ? task : normalize_features(task, base), feat_out);
    std::cout << "wrote " << task.rows() << " rows x " << task.cols() << " features to " << feat_out.string() << '\n';
  } else if (*rank) {
    const auto fm = select_comparison(read_feature_csv(rank_in), rank_cmp.task, rank_cmp.negative, rank_cmp.positive);
    const int m = n_comparisons > 0 ? n_comparisons : static_cast<int>(fm.cols());
    write_json(rank_out, ranking_to_json(rank_features(fm, LabelKey::Condition), bonferroni_threshold(alpha, m)));
  } else if (*eval) {
    const auto fm = eval_ml.prepare(read_feature_csv(eval_in), eval_cmp);
    const int n = std::min(n_features, static_cast<int>(fm.cols()));
    const auto report = evaluate_with_baseline(fm, eval_ml.eval, n, eval_ml.seed);
    auto rj = to_json(report);
    rj["name"] = eval_cmp.name();
    rj["task"] = eval_cmp.task;
    write_json(eval_out, {{"format_version", 1}, {"seed", eval_ml.seed}, {"comparisons", json::array({rj})}});
    const auto q = quartiles(report.accuracies());
    std::cout << "median accuracy " << q.median << ", real vs scrambled p = " << report.real_vs_scrambled.p << '\n';
  } else if (*sweep) {
    const auto fm = sweep_ml.prepare(read_feature_csv(sweep_in), sweep_cmp);
    auto res = feature_sweep(fm, sweep_ml.eval, max_features, sweep_ml.seed);
    res.name = sweep_cmp.name();
    write_sweep_csv({res}, sweep_out);
    std::cout << "best feature count " << best_feature_count({res}) << '\n';
  } else if (*pipe) {
    auto cfg = load_pipeline_config(pipe_cfg);
    if (!pipe_out.empty()) cfg.output_dir = pipe_out;
    const auto res = run_pipeline(cfg);
    for (std::size_t k = 0; k < res.reports.size(); ++k) {
      const auto q = quartiles(res.reports[k].accuracies());
      std::cout << res.comparisons[k].name() << ": median accuracy " << q.median << ", p = "
                << res.reports[k].real_vs_scrambled.p << '\n';
    }
    std::cout << "outputs in " << res.output_dir.string() << '\n';
  } else if (*plot) {
    if (plot_kind == "topomap") {
      std::ifstream in(plot_in);
      if (!in) throw DataError("cannot open " + plot_in.string());
      std::string line;
      std::getline(in, line);
      std::vector<std::string> names;
      std::vector<double> values;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError("topomap CSV rows must be 'electrode,value'");
        names.push_back(line.substr(0, comma));
        try {
          values.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
          throw DataError("topomap CSV: bad value '" + line.substr(comma + 1) + "'");
        }
      }
      render_topomap(names, values, standard_montage(plot_montage), plot_out, plot_title);
    } else if (plot_kind == "accuracy") {
      const auto j = read_json(plot_in);
      std::vector<AccuracySeries> series;
      try {
        for (const auto& c : j.at("comparisons")) {
          AccuracySeries s{c.value("name", std::string{}), c.at("accuracies").get<std::vector<double>>(), {}};
          if (c.contains("baseline_accuracies")) s.baseline = c.at("baseline_accuracies").get<std::vector<double>>();
          series.push_back(std::move(s));
        }
      } catch (const json::exception& e) {
        throw DataError(plot_in.string() + ": " + e.what());
      }
      render_accuracy_plot(series, plot_out, plot_title);
    } else {
      const auto sweeps = read_sweep_csv(plot_in);
      if (sweeps.empty()) throw DataError("sweep CSV has no rows");
      fs::create_directories(plot_out);
      for (const auto& s : sweeps) {
        std::string stem = s.name;
        for (auto& ch : stem) {
          if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')) ch = '_';
        }
        render_sweep_plot(s, plot_out / ("sweep_" + stem + ".svg"), s.name);
      }
    }
  } else if (*beh) {
    write_json(beh_out, behavioral_report(load_behavioral_csv(beh_in)));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
