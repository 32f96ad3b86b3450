#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <openssl/evp.h>

#include "eegdecode/error.hpp"
#include "eegdecode/pipeline.hpp"
#include "eegdecode/render.hpp"
#include "eegdecode/rng.hpp"
#include "json_util.hpp"

namespace eegdecode {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string file_stem_for(const std::string& name) {
  std::string out = name;
  for (auto& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<fs::path> recording_manifests(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("recordings directory not found: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() != ".json") continue;
    if (!fs::exists(fs::path(p).replace_extension(".f32"))) continue;
    out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no recordings in " + dir.string());
  return out;
}

FeatureMatrix window_features(const std::vector<Window>& windows, const FeatureConfig& cfg,
                              const std::vector<std::string>& pdc_electrodes, PdcStabilityReport* report) {
  FeatureMatrix fm;
  bool have = false;
  if (cfg.band_power) {
    fm = band_power_features(windows, cfg.bands, cfg.multitaper);
    have = true;
  }
  if (cfg.pdc) {
    auto pdc_fm = pdc_band_features(windows, pdc_electrodes, cfg.bands, cfg.pdc_options, report);
    fm = have ? hconcat(fm, pdc_fm) : std::move(pdc_fm);
    have = true;
  }
  if (!have) throw ConfigError("features: both band_power and pdc are disabled");
  return fm;
}

std::vector<FrequencyBand> bands_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("features.bands must be a non-empty array");
  std::vector<FrequencyBand> out;
  for (const auto& b : j) {
    if (b.is_string()) {
      try {
        out.push_back(canonical_band(b.get<std::string>()));
      } catch (const std::exception&) {
        throw ConfigError("features.bands: unknown band '" + b.get<std::string>() + "'");
      }
      continue;
    }
    detail::StrictObject o(b, "features.bands[]");
    FrequencyBand fb{o.required<std::string>("name"), o.required<double>("lo"), o.required<double>("hi")};
    o.finish();
    if (!(fb.lo >= 0.0 && fb.hi > fb.lo)) throw ConfigError("features.bands: band '" + fb.name + "' has invalid edges");
    out.push_back(fb);
  }
  return out;
}

json bands_to_json(const std::vector<FrequencyBand>& bands) {
  json out = json::array();
  for (const auto& b : bands) out.push_back({{"name", b.name}, {"lo", b.lo}, {"hi", b.hi}});
  return out;
}

}  // namespace

Recording preprocess_recording(const Recording& rec, const PreprocessConfig& cfg, const Montage& montage,
                               const std::string& baseline_label, std::uint64_t seed, PreprocessLog* log) {
  validate(rec);
  Recording out = rec;
  if (cfg.filter) {
    out = apply_filter_zero_phase(out, design_bandpass_fir(cfg.low_hz, cfg.high_hz, rec.fs, cfg.transition_bw_hz));
  }
  std::vector<BadChannel> bad;
  if (cfg.detect_bad_channels) {
    auto opts = cfg.bad_channels;
    opts.ransac_seed = seed;
    bad = find_bad_channels(out, opts, &montage);
  }
  std::vector<std::string> bad_names;
  for (const auto& b : bad) bad_names.push_back(b.name);

  if (cfg.asr) {
    const auto it = std::find_if(out.annotations.begin(), out.annotations.end(),
                                 [&](const Annotation& a) { return a.label == baseline_label; });
    if (it == out.annotations.end()) {
      throw DataError("ASR calibration needs a '" + baseline_label + "' segment in recording '" + rec.subject_id + "'");
    }
    Recording work = out;
    for (const auto& name : bad_names) work.channel_roles[static_cast<std::size_t>(*work.channel_index(name))] = ChannelRole::Other;
    const auto model = asr_calibrate(crop(work, it->start_s, it->end_s), cfg.asr_window_s);
    out.samples = asr_clean(work, model, cfg.asr_cutoff).samples;
  }
  if (cfg.interpolate && !bad_names.empty()) out = interpolate_channels(out, montage, bad_names);
  if (cfg.car) out = common_average_reference(out);
  if (cfg.eog_regression && !out.eog_indices().empty()) out = regress_out_eog(out);
  if (log) log->bad_channels = std::move(bad);
  return out;
}

SubjectFeatures extract_features(const std::shared_ptr<const Recording>& rec, const FeatureConfig& cfg,
                                 const Montage& montage) {
  const double span = cfg.span_s > 0.0 ? cfg.span_s : std::numeric_limits<double>::infinity();
  std::vector<Window> task_windows;
  std::vector<Window> base_windows;
  for (const auto& a : rec->annotations) {
    if (a.label == cfg.baseline_label) {
      auto w = segment_annotation(rec, a, cfg.window_s, cfg.hop_s, std::numeric_limits<double>::infinity());
      base_windows.insert(base_windows.end(), w.begin(), w.end());
    } else {
      auto w = segment_annotation(rec, a, cfg.window_s, cfg.hop_s, span);
      task_windows.insert(task_windows.end(), w.begin(), w.end());
    }
  }
  if (base_windows.empty()) {
    throw DataError("recording '" + rec->subject_id + "' has no '" + cfg.baseline_label + "' baseline segment");
  }
  if (task_windows.empty()) throw DataError("recording '" + rec->subject_id + "' has no task segments");
  const auto electrodes = cfg.pdc_electrodes.empty() ? montage.subset(cfg.pdc_subset) : cfg.pdc_electrodes;
  PdcStabilityReport task_report;
  PdcStabilityReport base_report;
  SubjectFeatures out;
  out.task = window_features(task_windows, cfg, electrodes, &task_report);
  out.baseline = window_features(base_windows, cfg, electrodes, &base_report);
  out.unstable_task_windows = task_report.unstable_rows.size();
  out.unstable_baseline_windows = base_report.unstable_rows.size();
  out.max_spectral_radius = std::max(task_report.max_spectral_radius, base_report.max_spectral_radius);
  return out;
}

PreprocessConfig preprocess_config_from_json(const json& j) {
  detail::StrictObject o(j, "preprocess");
  PreprocessConfig c;
  o.optional("filter", c.filter);
  o.optional("low_hz", c.low_hz);
  o.optional("high_hz", c.high_hz);
  o.optional("transition_bw_hz", c.transition_bw_hz);
  if (o.has("bad_channels")) {
    detail::StrictObject b(o.at("bad_channels"), "preprocess.bad_channels");
    b.optional("enabled", c.detect_bad_channels);
    b.optional("flat_s", c.bad_channels.flat_s);
    b.optional("flat_tolerance_v", c.bad_channels.flat_tolerance_v);
    b.optional("noise_z", c.bad_channels.noise_z);
    b.optional("noise_lowpass_hz", c.bad_channels.noise_lowpass_hz);
    b.optional("corr_threshold", c.bad_channels.corr_threshold);
    b.optional("corr_window_s", c.bad_channels.corr_window_s);
    b.optional("ransac_subsets", c.bad_channels.ransac_subsets);
    b.optional("ransac_fraction", c.bad_channels.ransac_fraction);
    b.finish();
  }
  if (o.has("asr")) {
    detail::StrictObject a(o.at("asr"), "preprocess.asr");
    a.optional("enabled", c.asr);
    a.optional("cutoff", c.asr_cutoff);
    a.optional("window_s", c.asr_window_s);
    a.finish();
  }
  o.optional("interpolate", c.interpolate);
  o.optional("car", c.car);
  o.optional("eog_regression", c.eog_regression);
  o.finish();
  return c;
}

FeatureConfig feature_config_from_json(const json& j) {
  detail::StrictObject o(j, "features");
  FeatureConfig c;
  o.optional("window_s", c.window_s);
  o.optional("hop_s", c.hop_s);
  o.optional("span_s", c.span_s);
  if (o.has("bands")) c.bands = bands_from_json(o.at("bands"));
  if (o.has("multitaper")) {
    detail::StrictObject m(o.at("multitaper"), "features.multitaper");
    m.optional("nw", c.multitaper.nw);
    m.optional("k", c.multitaper.k);
    m.finish();
  }
  o.optional("band_power", c.band_power);
  if (o.has("pdc")) {
    detail::StrictObject p(o.at("pdc"), "features.pdc");
    p.optional("enabled", c.pdc);
    p.optional("order", c.pdc_options.order);
    p.optional("grid_points", c.pdc_options.grid_points);
    p.optional("subset", c.pdc_subset);
    p.optional("electrodes", c.pdc_electrodes);
    bool reject = c.pdc_options.unstable == StabilityPolicy::Reject;
    p.optional("reject_unstable", reject);
    c.pdc_options.unstable = reject ? StabilityPolicy::Reject : StabilityPolicy::Accept;
    p.finish();
  }
  o.optional("baseline_label", c.baseline_label);
  o.finish();
  if (!(c.window_s > 0.0 && c.hop_s > 0.0)) throw ConfigError("features: window_s and hop_s must be positive");
  if (c.span_s < 0.0) throw ConfigError("features: span_s must be >= 0");
  c.multitaper.validate();
  if (c.pdc_options.order < 1) throw ConfigError("features.pdc: order must be >= 1");
  return c;
}

MlConfig ml_config_from_json(const json& j) {
  detail::StrictObject o(j, "ml");
  MlConfig c;
  o.optional("reference_condition", c.reference_condition);
  o.optional("n_per_class", c.n_per_class);
  o.optional("with_replacement", c.with_replacement);
  if (o.has("svm")) {
    detail::StrictObject s(o.at("svm"), "ml.svm");
    s.optional("degree", c.svm.degree);
    s.optional("coef0", c.svm.coef0);
    s.optional("box_constraint", c.svm.c);
    s.optional("tolerance", c.svm.tolerance);
    s.optional("max_iterations", c.svm.max_iterations);
    s.finish();
  }
  o.optional("inner_folds", c.inner_folds);
  o.optional("n_features", c.n_features);
  o.optional("sweep", c.sweep);
  o.optional("max_sweep_features", c.max_sweep_features);
  o.finish();
  c.svm.validate();
  if (c.n_per_class < 1) throw ConfigError("ml: n_per_class must be >= 1");
  if (c.n_features < 1) throw ConfigError("ml: n_features must be >= 1");
  if (c.max_sweep_features < 1) throw ConfigError("ml: max_sweep_features must be >= 1");
  if (c.inner_folds == 1 || c.inner_folds < 0) throw ConfigError("ml: inner_folds must be 0 or >= 2");
  return c;
}

PipelineConfig pipeline_config_from_json(const json& j, const fs::path& base_dir) {
  detail::StrictObject o(j, "pipeline config");
  const int version = o.required<int>("format_version");
  if (version != 1) throw ConfigError("pipeline config: unsupported format_version " + std::to_string(version));
  PipelineConfig c;
  c.source = j;
  c.seed = o.required<std::uint64_t>("seed");
  o.optional("montage", c.montage);
  const auto resolve = [&](const fs::path& p) { return p.is_absolute() || base_dir.empty() ? p : base_dir / p; };
  {
    detail::StrictObject in(o.at("input").is_object() ? o.at("input") : json::object(), "pipeline config.input");
    int sources = 0;
    if (in.has("recordings_dir")) {
      c.input.recordings_dir = resolve(in.required<std::string>("recordings_dir"));
      ++sources;
    }
    if (in.has("synth")) {
      json spec = in.at("synth");
      if (spec.is_object() && !spec.contains("seed")) spec["seed"] = derive_seed(c.seed, "synth");
      c.input.synth = synth_spec_from_json(spec);
      ++sources;
    }
    if (in.has("synth_spec")) {
      const auto path = resolve(in.required<std::string>("synth_spec"));
      std::ifstream f(path);
      if (!f) throw ConfigError("cannot open synth spec " + path.string());
      json spec;
      try {
        f >> spec;
      } catch (const json::exception& e) {
        throw ConfigError("synth spec " + path.string() + ": " + e.what());
      }
      if (spec.is_object() && !spec.contains("seed")) spec["seed"] = derive_seed(c.seed, "synth");
      c.input.synth = synth_spec_from_json(spec);
      ++sources;
    }
    in.finish();
    if (sources != 1) throw ConfigError("pipeline config.input: give exactly one of recordings_dir, synth, synth_spec");
  }
  c.output_dir = resolve(o.required<std::string>("output_dir"));
  if (o.has("preprocess")) c.preprocess = preprocess_config_from_json(o.at("preprocess"));
  if (o.has("features")) c.features = feature_config_from_json(o.at("features"));
  if (o.has("selection")) {
    detail::StrictObject s(o.at("selection"), "selection");
    s.optional("alpha", c.selection.alpha);
    s.optional("comparisons", c.selection.comparisons);
    s.finish();
    bonferroni_threshold(c.selection.alpha, 1);
    if (c.selection.comparisons < 0) throw ConfigError("selection: comparisons must be >= 0");
  }
  if (o.has("ml")) c.ml = ml_config_from_json(o.at("ml"));
  if (o.has("plots")) {
    detail::StrictObject p(o.at("plots"), "plots");
    p.optional("enabled", c.plots.enabled);
    p.optional("topomap_band", c.plots.topomap_band);
    p.finish();
  }
  o.finish();
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return pipeline_config_from_json(j, path.parent_path());
}

json to_json(const PipelineConfig& c) {
  json input = json::object();
  if (c.input.synth) input["synth"] = to_json(*c.input.synth);
  else input["recordings_dir"] = c.input.recordings_dir.string();
  const auto& p = c.preprocess;
  const auto& f = c.features;
  const auto& m = c.ml;
  return {{"format_version", 1},
          {"seed", c.seed},
          {"montage", c.montage},
          {"input", input},
          {"output_dir", c.output_dir.string()},
          {"preprocess",
           {{"filter", p.filter},
            {"low_hz", p.low_hz},
            {"high_hz", p.high_hz},
            {"transition_bw_hz", p.transition_bw_hz},
            {"bad_channels",
             {{"enabled", p.detect_bad_channels},
              {"flat_s", p.bad_channels.flat_s},
              {"flat_tolerance_v", p.bad_channels.flat_tolerance_v},
              {"noise_z", p.bad_channels.noise_z},
              {"noise_lowpass_hz", p.bad_channels.noise_lowpass_hz},
              {"corr_threshold", p.bad_channels.corr_threshold},
              {"corr_window_s", p.bad_channels.corr_window_s},
              {"ransac_subsets", p.bad_channels.ransac_subsets},
              {"ransac_fraction", p.bad_channels.ransac_fraction}}},
            {"asr", {{"enabled", p.asr}, {"cutoff", p.asr_cutoff}, {"window_s", p.asr_window_s}}},
            {"interpolate", p.interpolate},
            {"car", p.car},
            {"eog_regression", p.eog_regression}}},
          {"features",
           {{"window_s", f.window_s},
            {"hop_s", f.hop_s},
            {"span_s", f.span_s},
            {"bands", bands_to_json(f.bands)},
            {"multitaper", {{"nw", f.multitaper.nw}, {"k", f.multitaper.k}}},
            {"band_power", f.band_power},
            {"pdc",
             {{"enabled", f.pdc},
              {"order", f.pdc_options.order},
              {"grid_points", f.pdc_options.grid_points},
              {"subset", f.pdc_subset},
              {"electrodes", f.pdc_electrodes},
              {"reject_unstable", f.pdc_options.unstable == StabilityPolicy::Reject}}},
            {"baseline_label", f.baseline_label}}},
          {"selection", {{"alpha", c.selection.alpha}, {"comparisons", c.selection.comparisons}}},
          {"ml",
           {{"reference_condition", m.reference_condition},
            {"n_per_class", m.n_per_class},
            {"with_replacement", m.with_replacement},
            {"svm",
             {{"degree", m.svm.degree},
              {"coef0", m.svm.coef0},
              {"box_constraint", m.svm.c},
              {"tolerance", m.svm.tolerance},
              {"max_iterations", m.svm.max_iterations}}},
            {"inner_folds", m.inner_folds},
            {"n_features", m.n_features},
            {"sweep", m.sweep},
            {"max_sweep_features", m.max_sweep_features}}},
          {"plots", {{"enabled", c.plots.enabled}, {"topomap_band", c.plots.topomap_band}}}};
}

std::vector<Comparison> plan_comparisons(const FeatureMatrix& fm, const std::string& reference) {
  std::set<std::string> tasks;
  std::set<std::pair<std::string, std::string>> present;
  for (const auto& l : fm.labels) {
    tasks.insert(l.task);
    present.insert({l.task, l.condition});
  }
  std::vector<Comparison> out;
  for (const auto& t : tasks) {
    if (!present.count({t, reference})) {
      throw DataError("task '" + t + "' has no windows for reference condition '" + reference + "'");
    }
    for (const auto& [task, cond] : present) {
      if (task == t && cond != reference) out.push_back({t, reference, cond});
    }
  }
  if (out.empty()) throw DataError("no comparisons: only the reference condition is present");
  return out;
}

FeatureMatrix comparison_rows(const FeatureMatrix& fm, const Comparison& cmp) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < fm.rows(); ++i) {
    const auto& l = fm.labels[static_cast<std::size_t>(i)];
    if (l.task == cmp.task && (l.condition == cmp.negative || l.condition == cmp.positive)) rows.push_back(i);
  }
  return fm.select_rows(rows);
}

FeatureMatrix normalize_features(const FeatureMatrix& task, const FeatureMatrix& baseline) {
  return standardize_across_subjects(normalize_to_baseline(task, baseline));
}

std::string sha256_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw NumericError("SHA-256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult result;
  result.output_dir = cfg.output_dir;
  fs::create_directories(cfg.output_dir);
  const fs::path manifest_path = cfg.output_dir / "run-manifest.json";

  json manifest = {{"format_version", 1},
                   {"seed", cfg.seed},
                   {"config", cfg.source},
                   {"resolved_config", to_json(cfg)},
                   {"status", "running"}};
  std::vector<std::string> outputs;
  json inputs = json::object();
  std::string stage = "input";

  const auto finish_manifest = [&](const std::string& status) {
    manifest["status"] = status;
    json hashes = json::object();
    for (const auto& name : outputs) {
      if (fs::exists(cfg.output_dir / name)) hashes[name] = sha256_hex(cfg.output_dir / name);
    }
    manifest["outputs"] = hashes;
    manifest["inputs"] = inputs;
    write_json(manifest_path, manifest);
  };

  try {
    const Montage montage = standard_montage(cfg.montage);
    std::vector<fs::path> manifests;
    int n_subjects = 0;
    if (cfg.input.synth) {
      n_subjects = cfg.input.synth->n_subjects;
      inputs["synth_spec"] = to_json(*cfg.input.synth);
    } else {
      manifests = recording_manifests(cfg.input.recordings_dir);
      n_subjects = static_cast<int>(manifests.size());
      for (const auto& m : manifests) {
        inputs[m.filename().string()] = sha256_hex(m);
        const auto data = fs::path(m).replace_extension(".f32");
        inputs[data.filename().string()] = sha256_hex(data);
      }
    }

    FeatureMatrix task_fm;
    FeatureMatrix base_fm;
    json bad_report = json::object();
    json stability_report = json::object();
    for (int i = 0; i < n_subjects; ++i) {
      stage = "input";
      Recording raw = cfg.input.synth ? gen_subject(*cfg.input.synth, i) : load_recording(manifests[static_cast<std::size_t>(i)]);
      stage = "preprocess";
      PreprocessLog log;
      auto clean = std::make_shared<const Recording>(preprocess_recording(
          raw, cfg.preprocess, montage, cfg.features.baseline_label, derive_seed(cfg.seed, "ransac:" + raw.subject_id), &log));
      json bad = json::array();
      for (const auto& b : log.bad_channels) bad.push_back(b.name);
      bad_report[raw.subject_id] = bad;
      stage = "features";
      auto sf = extract_features(clean, cfg.features, montage);
      if (cfg.features.pdc) {
        stability_report[raw.subject_id] = {{"unstable_task_windows", sf.unstable_task_windows},
                                            {"task_windows", sf.task.rows()},
                                            {"unstable_baseline_windows", sf.unstable_baseline_windows},
                                            {"baseline_windows", sf.baseline.rows()},
                                            {"max_spectral_radius", sf.max_spectral_radius}};
      }
      task_fm = task_fm.features.empty() ? std::move(sf.task) : vconcat(task_fm, sf.task);
      base_fm = base_fm.features.empty() ? std::move(sf.baseline) : vconcat(base_fm, sf.baseline);
    }
    manifest["bad_channels"] = bad_report;
    if (cfg.features.pdc) manifest["mvar_stability"] = stability_report;

    stage = "normalize";
    const FeatureMatrix features = normalize_features(task_fm, base_fm);
    write_feature_csv(features, cfg.output_dir / "features.csv");
    outputs.push_back("features.csv");
    outputs.push_back(labels_sidecar(cfg.output_dir / "features.csv").filename().string());

    stage = "rank";
    result.comparisons = plan_comparisons(features, cfg.ml.reference_condition);
    const int m = cfg.selection.comparisons > 0 ? cfg.selection.comparisons : static_cast<int>(features.cols());
    const double threshold = bonferroni_threshold(cfg.selection.alpha, m);
    std::vector<FeatureMatrix> balanced;
    json ranking = {{"format_version", 1}, {"alpha", cfg.selection.alpha}, {"comparisons_corrected", m},
                    {"threshold", threshold}, {"comparisons", json::array()}};
    for (const auto& cmp : result.comparisons) {
      balanced.push_back(balance_classes(comparison_rows(features, cmp), LabelKey::Condition, cfg.ml.n_per_class,
                                         derive_seed(cfg.seed, "balance:" + cmp.name()), cfg.ml.with_replacement));
      const auto ranked = rank_features(balanced.back(), LabelKey::Condition);
      auto rj = ranking_to_json(ranked, threshold);
      ranking["comparisons"].push_back({{"name", cmp.name()},
                                        {"task", cmp.task},
                                        {"negative_class", cmp.negative},
                                        {"positive_class", cmp.positive},
                                        {"n_rows", balanced.back().rows()},
                                        {"features", rj["features"]}});
    }
    write_json(cfg.output_dir / "ranking.json", ranking);
    outputs.push_back("ranking.json");

    stage = "evaluate";
    EvaluationConfig ecfg;
    ecfg.svm = cfg.ml.svm;
    ecfg.class_key = LabelKey::Condition;
    ecfg.inner_folds = cfg.ml.inner_folds;
    json evaluation = {{"format_version", 1}, {"seed", cfg.seed}, {"comparisons", json::array()}};
    for (std::size_t k = 0; k < result.comparisons.size(); ++k) {
      const auto& cmp = result.comparisons[k];
      ecfg.negative_class = cmp.negative;
      ecfg.positive_class = cmp.positive;
      const int n_features = std::min(cfg.ml.n_features, static_cast<int>(balanced[k].cols()));
      auto report = evaluate_with_baseline(balanced[k], ecfg, n_features, derive_seed(cfg.seed, "evaluate:" + cmp.name()));
      auto rj = to_json(report);
      rj["name"] = cmp.name();
      rj["task"] = cmp.task;
      evaluation["comparisons"].push_back(std::move(rj));
      result.reports.push_back(std::move(report));
    }
    write_json(cfg.output_dir / "evaluation.json", evaluation);
    outputs.push_back("evaluation.json");

    if (cfg.ml.sweep) {
      stage = "sweep";
      for (std::size_t k = 0; k < result.comparisons.size(); ++k) {
        const auto& cmp = result.comparisons[k];
        ecfg.negative_class = cmp.negative;
        ecfg.positive_class = cmp.positive;
        result.sweeps.push_back(
            feature_sweep(balanced[k], ecfg, cfg.ml.max_sweep_features, derive_seed(cfg.seed, "sweep:" + cmp.name())));
        result.sweeps.back().name = cmp.name();
      }
      write_sweep_csv(result.sweeps, cfg.output_dir / "sweep.csv");
      outputs.push_back("sweep.csv");
      manifest["sweep_best_feature_count"] = best_feature_count(result.sweeps);
    }

    if (cfg.plots.enabled) {
      stage = "plot";
      std::vector<AccuracySeries> series;
      for (std::size_t k = 0; k < result.comparisons.size(); ++k) {
        series.push_back({result.comparisons[k].name(), result.reports[k].accuracies(), result.reports[k].baseline_accuracies});
      }
      render_accuracy_plot(series, cfg.output_dir / "accuracy.svg", "Test-set accuracy per held-out subject");
      outputs.push_back("accuracy.svg");
      for (std::size_t k = 0; k < result.sweeps.size(); ++k) {
        const auto name = "sweep_" + file_stem_for(result.comparisons[k].name()) + ".svg";
        render_sweep_plot(result.sweeps[k], cfg.output_dir / name, result.comparisons[k].name());
        outputs.push_back(name);
      }
      for (std::size_t k = 0; k < result.comparisons.size(); ++k) {
        const auto& fm = balanced[k];
        std::vector<std::string> names;
        std::vector<double> values;
        for (Eigen::Index c = 0; c < fm.cols(); ++c) {
          const auto& d = fm.features[static_cast<std::size_t>(c)];
          if (d.kind != FeatureKind::BandPower || d.band != cfg.plots.topomap_band) continue;
          double pos = 0.0, neg = 0.0;
          int n_pos = 0, n_neg = 0;
          for (Eigen::Index r = 0; r < fm.rows(); ++r) {
            if (fm.labels[static_cast<std::size_t>(r)].condition == result.comparisons[k].positive) {
              pos += fm.values(r, c);
              ++n_pos;
            } else {
              neg += fm.values(r, c);
              ++n_neg;
            }
          }
          names.push_back(d.channel);
          values.push_back(pos / n_pos - neg / n_neg);
        }
        if (names.empty()) continue;
        const auto name = "topomap_" + file_stem_for(result.comparisons[k].name()) + ".svg";
        render_topomap(names, values, montage, cfg.output_dir / name,
                       result.comparisons[k].name() + " " + cfg.plots.topomap_band + " power difference");
        outputs.push_back(name);
      }
    }
  } catch (const std::exception& e) {
    manifest["failed_stage"] = stage;
    manifest["error"] = e.what();
    try {
      finish_manifest("incomplete");
    } catch (...) {
    }
    const std::string msg = "pipeline stage '" + stage + "' failed: " + e.what();
    if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
    if (dynamic_cast<const NumericError*>(&e)) throw NumericError(msg);
    throw DataError(msg);
  }
  finish_manifest("complete");
  return result;
}

}  // namespace eegdecode
