#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegdecode/connectivity.hpp"
#include "eegdecode/evaluation.hpp"
#include "eegdecode/preprocess.hpp"
#include "eegdecode/spectral.hpp"
#include "eegdecode/synth.hpp"

namespace eegdecode {

struct PreprocessConfig {
  bool filter = true;
  double low_hz = 0.5;
  double high_hz = 50.0;
  double transition_bw_hz = 0.5;
  bool detect_bad_channels = true;
  BadChannelOptions bad_channels;
  bool asr = true;
  double asr_cutoff = 20.0;
  double asr_window_s = 0.5;
  bool interpolate = true;
  bool car = true;
  bool eog_regression = true;
};

struct PreprocessLog {
  std::vector<BadChannel> bad_channels;
};

/// Filter, bad-channel screening, ASR on the good channels (calibrated on the
/// baseline segment), spherical-spline repair of the bad channels, common
/// average reference, EOG regression. seed drives the RANSAC channel subsets.
Recording preprocess_recording(const Recording& rec, const PreprocessConfig& cfg, const Montage& montage,
                               const std::string& baseline_label, std::uint64_t seed, PreprocessLog* log = nullptr);

struct FeatureConfig {
  double window_s = 4.0;
  double hop_s = 2.0;
  double span_s = 0.0;  // per segment; 0 uses the whole segment
  std::vector<FrequencyBand> bands = canonical_bands();
  MultitaperConfig multitaper;
  bool band_power = true;
  bool pdc = true;
  PdcFeatureOptions pdc_options;
  std::string pdc_subset = "pdc28";        // montage subset, used when pdc_electrodes is empty
  std::vector<std::string> pdc_electrodes;
  std::string baseline_label = "rest";
};

struct SubjectFeatures {
  FeatureMatrix task;      // one row per task window
  FeatureMatrix baseline;  // one row per baseline window
  std::size_t unstable_task_windows = 0;  // MVAR fits with companion radius >= 1
  std::size_t unstable_baseline_windows = 0;
  double max_spectral_radius = 0.0;
};

SubjectFeatures extract_features(const std::shared_ptr<const Recording>& rec, const FeatureConfig& cfg,
                                 const Montage& montage);

struct SelectionConfig {
  double alpha = 0.01;
  int comparisons = 0;  // Bonferroni divisor; 0 uses the feature count
};

struct MlConfig {
  std::string reference_condition = "neutral";
  int n_per_class = 40;
  bool with_replacement = false;
  SvmConfig svm;
  int inner_folds = 5;
  int n_features = 180;
  bool sweep = true;
  int max_sweep_features = 400;
};

struct PlotConfig {
  bool enabled = true;
  std::string topomap_band = "alpha";
};

struct InputConfig {
  std::filesystem::path recordings_dir;
  std::optional<SynthSpec> synth;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string montage = "standard_57";
  InputConfig input;
  std::filesystem::path output_dir;
  PreprocessConfig preprocess;
  FeatureConfig features;
  SelectionConfig selection;
  MlConfig ml;
  PlotConfig plots;
  nlohmann::json source;  // configuration exactly as supplied
};

/// Strict parse: unknown keys and a missing seed are ConfigErrors. Relative
/// paths resolve against base_dir.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& cfg);

PreprocessConfig preprocess_config_from_json(const nlohmann::json& j);
FeatureConfig feature_config_from_json(const nlohmann::json& j);
MlConfig ml_config_from_json(const nlohmann::json& j);

struct Comparison {
  std::string task;
  std::string negative;  // reference condition
  std::string positive;

  std::string name() const { return task + ":" + negative + "_vs_" + positive; }
};

/// Every (task, non-reference condition) pair found in fm, in sorted order.
std::vector<Comparison> plan_comparisons(const FeatureMatrix& fm, const std::string& reference);

/// Rows of one task whose condition is either side of the comparison.
FeatureMatrix comparison_rows(const FeatureMatrix& fm, const Comparison& cmp);

/// Normalizes to the per-subject baseline and z-scores across subjects.
FeatureMatrix normalize_features(const FeatureMatrix& task, const FeatureMatrix& baseline);

struct PipelineResult {
  std::filesystem::path output_dir;
  std::vector<Comparison> comparisons;
  std::vector<EvaluationReport> reports;
  std::vector<SweepResult> sweeps;
};

/// preprocess -> features -> normalize -> rank -> LOSO + scrambled baseline -> sweep.
/// Writes features.csv, ranking.json, evaluation.json, sweep.csv, SVG plots and
/// run-manifest.json. A failing stage leaves a manifest marked incomplete.
PipelineResult run_pipeline(const PipelineConfig& cfg);

std::string sha256_hex(const std::filesystem::path& file);

}  // namespace eegdecode
