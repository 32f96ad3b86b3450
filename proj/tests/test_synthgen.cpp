#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <doctest.h>

#include "eegdecode/error.hpp"
#include "eegdecode/evaluation.hpp"
#include "eegdecode/pipeline.hpp"
#include "eegdecode/stats.hpp"
#include "eegdecode/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace eegdecode;

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<std::string> kAlphaTargets{"O1", "Oz", "O2", "PO3", "POz", "PO4"};

SynthSpec small_spec(std::uint64_t seed) {
  SynthSpec s;
  s.n_subjects = 3;
  s.fs = 250.0;
  s.channels = {"Fz", "Cz", "Pz", "O1", "Oz", "O2"};
  s.tasks = {{"memory", 12.0}};
  s.baseline_s = 10.0;
  s.latent_sources = 4;
  s.seed = seed;
  return s;
}

double rms(const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

// Per-subject features without preprocessing, baseline-normalized and z-scored.
FeatureMatrix study_features(const SynthStudy& study, const FeatureConfig& cfg) {
  const Montage montage = standard_montage("standard_57");
  FeatureMatrix task;
  FeatureMatrix baseline;
  for (const auto& rec : study.recordings) {
    const auto f = extract_features(std::make_shared<const Recording>(rec), cfg, montage);
    task = task.rows() == 0 ? f.task : vconcat(task, f.task);
    baseline = baseline.rows() == 0 ? f.baseline : vconcat(baseline, f.baseline);
  }
  return normalize_features(task, baseline);
}

// The link model as documented: both channels resonate at the band centre,
// the sink hears the source two samples back.
std::vector<Eigen::MatrixXd> link_model(double coupling, double radius, double f0, double fs) {
  Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(2, 2);
  a1(0, 0) = a1(1, 1) = 2.0 * radius * std::cos(2.0 * kPi * f0 / fs);
  a2(0, 0) = a2(1, 1) = -radius * radius;
  a2(1, 0) = coupling;
  return {a1, a2};
}

}  // namespace

// ---------------------------------------------------------------------------
// VAR and oscillation generators

TEST_CASE("zero coefficients: sample covariance matches sigma within 5 percent") {
  Eigen::Matrix3d sigma;
  sigma << 2.0, 0.5, 0.1, 0.5, 1.0, -0.3, 0.1, -0.3, 0.7;
  const auto x = gen_var_process({Eigen::MatrixXd::Zero(3, 3)}, sigma, 100000, 1);
  REQUIRE(x.rows() == 100000);
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
  CHECK((cov - sigma).norm() / sigma.norm() < 0.05);
}

TEST_CASE("VAR generator errors: unstable, bad sigma, shape mismatch") {
  CHECK_THROWS_AS(gen_var_process({Eigen::MatrixXd::Constant(1, 1, 1.1)}, Eigen::MatrixXd::Identity(1, 1), 10, 1),
                  ConfigError);
  CHECK_THROWS_AS(gen_var_process({}, (Eigen::MatrixXd(2, 2) << 1, 2, 2, 1).finished(), 10, 1), ConfigError);
  CHECK_THROWS_AS(gen_var_process({Eigen::MatrixXd::Zero(2, 2)}, Eigen::MatrixXd::Identity(3, 3), 10, 1),
                  ConfigError);
}

TEST_CASE("VAR generator is seed-deterministic") {
  const std::vector<Eigen::MatrixXd> a{Eigen::MatrixXd::Constant(2, 2, 0.2)};
  const auto x = gen_var_process(a, Eigen::MatrixXd::Identity(2, 2), 500, 9);
  CHECK(x == gen_var_process(a, Eigen::MatrixXd::Identity(2, 2), 500, 9));
  CHECK(x != gen_var_process(a, Eigen::MatrixXd::Identity(2, 2), 500, 10));
}

TEST_CASE("oscillation: RMS within 2 percent and at least 90 percent of power near the band") {
  for (const auto& band : canonical_bands()) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto x = gen_oscillation(band, 7e-6, 20.0, 250.0, seed);
      REQUIRE(x.size() == 5000);
      const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
      CHECK(std::fabs(rms(v) / 7e-6 - 1.0) < 0.02);
      const auto psd = multitaper_psd(x, 250.0, MultitaperConfig{});
      const double inside = band_power(psd, {"near", std::max(0.0, band.lo - 1.0), band.hi + 1.0});
      const double total = band_power(psd, {"all", 0.0, 125.0});
      CHECK(inside / total >= 0.90);
    }
  }
}

TEST_CASE("oscillation: zero amplitude, determinism, invalid band") {
  const auto zero = gen_oscillation(canonical_band("alpha"), 0.0, 4.0, 250.0, 1);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));
  CHECK(gen_oscillation(canonical_band("beta"), 1.0, 4.0, 250.0, 5) ==
        gen_oscillation(canonical_band("beta"), 1.0, 4.0, 250.0, 5));
  CHECK_THROWS_AS(gen_oscillation({"bad", 40.0, 200.0}, 1.0, 4.0, 250.0, 1), ConfigError);
  CHECK_THROWS_AS(gen_oscillation({"bad", 0.0, 4.0}, 1.0, 4.0, 250.0, 1), ConfigError);
}

// ---------------------------------------------------------------------------
// Link model

TEST_CASE("analytic link PDC agrees with PDC evaluated from the generating coefficients") {
  const auto alpha = canonical_band("alpha");
  for (double coupling : {0.0, 0.05, 0.2, 0.5}) {
    const auto coeffs = link_model(coupling, 0.95, 10.0, 500.0);
    const auto grid = uniform_grid(alpha.lo, alpha.hi, 64);
    const double expected = oracle::band_pdc(coeffs, 500.0, grid, 1, 0);
    CHECK(analytic_link_pdc(coupling, 0.95, alpha, 500.0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("link coupling solver reaches the requested PDC") {
  const auto beta = canonical_band("beta");
  for (double target : {0.05, 0.2, 0.6}) {
    const double c = solve_link_coupling(target, 0.9, beta, 250.0);
    CHECK(analytic_link_pdc(c, 0.9, beta, 250.0) == doctest::Approx(target).epsilon(1e-6));
  }
  CHECK_THROWS_AS(solve_link_coupling(1.0, 0.9, beta, 250.0), ConfigError);
}

TEST_CASE("property: planted link raises the true analytic PDC by at least the realised effect") {
  SynthSpec spec = small_spec(11);
  spec.n_subjects = 5;
  spec.effects = {{EffectKind::PdcLink, {"Pz", "Oz"}, "alpha", 0.8, "altered", ""},
                  {EffectKind::PdcLink, {"Fz", "Cz"}, "theta", -0.4, "neutral", ""}};
  for (int i = 0; i < spec.n_subjects; ++i) {
    SubjectTruth truth;
    gen_subject(spec, i, &truth);
    for (std::size_t e = 0; e < 2; ++e) {
      const double realised = truth.effect_sizes[e];
      const double change = truth.target_pdc[e] / truth.base_pdc[e] - 1.0;
      CHECK(std::fabs(change - realised) < 1e-6);
      CHECK(std::fabs(truth.target_pdc[e] - truth.base_pdc[e]) >= std::fabs(realised) * truth.base_pdc[e] * (1.0 - 1e-6));
      CHECK(truth.base_pdc[e] == doctest::Approx(spec.link_base_pdc).epsilon(1e-6));
    }
  }
}

// ---------------------------------------------------------------------------
// Study generation

TEST_CASE("23 subjects give 23 recordings with baseline then condition segments") {
  SynthSpec spec = small_spec(12);
  spec.n_subjects = 23;
  spec.channels = {"Cz", "Pz"};
  spec.tasks = {{"memory", 6.0}, {"reading", 5.0}};
  spec.baseline_s = 8.0;
  spec.latent_sources = 1;
  const auto study = gen_study(spec);
  REQUIRE(study.recordings.size() == 23);
  std::set<std::string> ids;
  for (const auto& rec : study.recordings) {
    ids.insert(rec.subject_id);
    validate(rec);
    REQUIRE(rec.annotations.size() == 5);
    CHECK(rec.annotations[0].label == "rest");
    CHECK(rec.annotations[0].start_s == 0.0);
    CHECK(rec.n_samples() == std::llround((8.0 + 2 * 11.0) * 250.0));
    CHECK(rec.samples.allFinite());
  }
  CHECK(ids.size() == 23);
  CHECK(study.recordings[0].subject_id == "S01");
  CHECK(study.ground_truth["subjects"].size() == 23);
}

TEST_CASE("regenerating with the same seed is bit-identical, and the study survives disk") {
  SynthSpec spec = small_spec(13);
  spec.eog = true;
  spec.effects = {{EffectKind::BandPower, {"O1", "Oz"}, "alpha", 0.5, "altered", ""},
                  {EffectKind::PdcLink, {"Pz", "Oz"}, "alpha", 0.3, "altered", "memory"}};
  const auto a = gen_study(spec);
  const auto b = gen_study(spec);
  REQUIRE(a.recordings.size() == b.recordings.size());
  for (std::size_t i = 0; i < a.recordings.size(); ++i) CHECK(a.recordings[i] == b.recordings[i]);
  CHECK(a.ground_truth.dump() == b.ground_truth.dump());
  spec.seed = 14;
  CHECK_FALSE(gen_study(spec).recordings[0] == a.recordings[0]);

  fixture::TempDir dir("synth-disk");
  write_study(a, dir.path());
  for (const auto& rec : a.recordings) {
    CHECK(load_recording(dir.path() / (rec.subject_id + ".json")) == rec);
  }
  CHECK(std::filesystem::exists(dir.path() / "ground_truth.json"));
}

TEST_CASE("ground truth lists every planted feature with its condition and sign") {
  SynthSpec spec = small_spec(15);
  spec.effects = {{EffectKind::BandPower, {"O1", "Oz"}, "alpha", 0.5, "altered", ""},
                  {EffectKind::BandPower, {"Fz"}, "theta", -0.3, "neutral", "memory"},
                  {EffectKind::PdcLink, {"Pz", "Oz"}, "beta", 0.4, "altered", ""}};
  const auto gt = gen_study(spec).ground_truth;
  REQUIRE(gt["effects"].size() == 3);
  CHECK(gt["effects"][0]["features"] == nlohmann::json({"bp:O1:alpha", "bp:Oz:alpha"}));
  CHECK(gt["effects"][0]["expected_sign"] == 1);
  CHECK(gt["effects"][1]["expected_sign"] == -1);
  CHECK(gt["effects"][1]["task"] == "memory");
  CHECK(gt["effects"][2]["features"] == nlohmann::json({"pdc:Pz->Oz:beta"}));
  CHECK(gt["effects"][2]["condition"] == "altered");
  CHECK(gt["subjects"][0]["links"].size() == 1);
  CHECK(gt["spec"]["seed"] == 15);
}

TEST_CASE("planted band-power effect changes only its condition segments") {
  SynthSpec spec = small_spec(16);
  spec.n_subjects = 1;
  spec.jitter_sd = 0.0;
  spec.effects = {{EffectKind::BandPower, {"Oz"}, "alpha", 3.0, "altered", ""}};
  const auto with = gen_subject(spec, 0);
  spec.effects.clear();
  const auto without = gen_subject(spec, 0);
  const int oz = *with.channel_index("Oz");
  const int cz = *with.channel_index("Cz");
  CHECK(with.samples.col(cz) == without.samples.col(cz));
  for (const auto& a : with.annotations) {
    const auto first = static_cast<Eigen::Index>(std::llround(a.start_s * spec.fs));
    const auto len = static_cast<Eigen::Index>(std::llround((a.end_s - a.start_s) * spec.fs));
    const auto seg_with = with.samples.col(oz).segment(first, len);
    const auto seg_without = without.samples.col(oz).segment(first, len);
    if (split_label(a.label).first == "altered") {
      std::vector<double> xw(seg_with.data(), seg_with.data() + len);
      std::vector<double> xo(seg_without.data(), seg_without.data() + len);
      const auto pw = band_power(multitaper_psd(xw, spec.fs, MultitaperConfig{}), canonical_band("alpha"));
      const auto po = band_power(multitaper_psd(xo, spec.fs, MultitaperConfig{}), canonical_band("alpha"));
      CHECK(pw / po == doctest::Approx(4.0).epsilon(0.1));
    } else {
      CHECK(seg_with == seg_without);
    }
  }
}

TEST_CASE("spec validation") {
  SynthSpec spec = small_spec(17);
  spec.seed.reset();
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("seed"), ConfigError);
  spec = small_spec(17);
  spec.effects = {{EffectKind::BandPower, {"Oz"}, "alpha", -1.0, "altered", ""}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.effects = {{EffectKind::BandPower, {"Oz"}, "alpha", 0.5, "sleepy", ""}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.effects = {{EffectKind::PdcLink, {"Oz"}, "alpha", 0.5, "altered", ""}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec(17);
  spec.channels = {"Cz", "XX9"};
  CHECK_THROWS_WITH_AS(gen_subject(spec, 0), doctest::Contains("XX9"), DataError);
  spec = small_spec(17);
  spec.effects = {{EffectKind::BandPower, {"T7"}, "alpha", 0.5, "altered", ""}};
  CHECK_THROWS_WITH_AS(gen_subject(spec, 0), doctest::Contains("T7"), DataError);
}

TEST_CASE("spec JSON round trip is strict") {
  SynthSpec spec = small_spec(18);
  spec.effects = {{EffectKind::PdcLink, {"Pz", "Oz"}, "alpha", 0.3, "altered", "memory"}};
  const auto j = to_json(spec);
  const auto back = synth_spec_from_json(j);
  CHECK(to_json(back) == j);
  auto bad = j;
  bad["colour"] = "blue";
  CHECK_THROWS_AS(synth_spec_from_json(bad), ConfigError);
  bad = j;
  bad.erase("seed");
  CHECK_THROWS_AS(synth_spec_from_json(bad), ConfigError);
}

// ---------------------------------------------------------------------------
// End-to-end properties of generated studies

TEST_CASE("planted +50 percent alpha at 6 electrodes: those columns rank in the top 20 of 4205") {
  SynthSpec spec;
  spec.n_subjects = 8;
  spec.tasks = {{"memory", 20.0}};
  spec.baseline_s = 20.0;
  spec.seed = 19;
  spec.effects = {{EffectKind::BandPower, kAlphaTargets, "alpha", 0.5, "altered", ""}};
  const auto study = gen_study(spec);
  FeatureConfig cfg;
  const auto fm = study_features(study, cfg);
  REQUIRE(fm.cols() == 4205);
  const auto ranked = rank_features(fm, LabelKey::Condition);
  std::set<std::string> top;
  for (std::size_t i = 0; i < 20; ++i) top.insert(ranked[i].feature.to_string());
  for (const auto& ch : kAlphaTargets) CHECK(top.count("bp:" + ch + ":alpha") == 1);
}

TEST_CASE("no planted effect: LOSO accuracy averages 0.5 +/- 0.06 over 20 seeds") {
  FeatureConfig cfg;
  cfg.pdc = false;
  EvaluationConfig eval;
  eval.inner_folds = 0;
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthSpec spec = small_spec(1000 + seed);
    spec.n_subjects = 6;
    spec.tasks = {{"memory", 24.0}};
    const auto fm = balance_classes(study_features(gen_study(spec), cfg), LabelKey::Condition, 10, seed);
    const auto report = loso_evaluate(fm, eval, 10, seed);
    total += quartiles(report.accuracies()).median;
  }
  CHECK(std::fabs(total / 20.0 - 0.5) <= 0.06);
}
