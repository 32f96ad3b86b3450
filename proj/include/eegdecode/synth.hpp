#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "eegdecode/signal_io.hpp"
#include "eegdecode/spectral.hpp"

namespace eegdecode {

/// Stable VAR simulation with Gaussian innovations N(0, sigma); the first 1000
/// samples are discarded as burn-in. Returns [n x m].
Eigen::MatrixXd gen_var_process(const std::vector<Eigen::MatrixXd>& coefficients, const Eigen::MatrixXd& sigma,
                                Eigen::Index n, std::uint64_t seed);

/// Band-pass filtered white noise scaled to the requested RMS.
std::vector<double> gen_oscillation(const FrequencyBand& band, double amplitude, double duration_s, double fs,
                                    std::uint64_t seed);

enum class EffectKind { BandPower, PdcLink };

struct PlantedEffect {
  EffectKind kind = EffectKind::BandPower;
  std::vector<std::string> channels;  // band power: targets; pdc link: {source, sink}
  std::string band;
  double effect = 0.0;                // relative change, > -1
  std::string condition;              // condition the change applies to
  std::string task;                   // empty: every task
};

struct SynthTask {
  std::string name;
  double duration_s = 0.0;
};

struct SynthSpec {
  int n_subjects = 23;
  double fs = 500.0;
  std::string montage = "standard_57";
  std::vector<std::string> channels;  // empty: every montage channel
  std::vector<std::string> conditions{"neutral", "altered"};
  std::vector<SynthTask> tasks{{"task", 82.0}};
  double baseline_s = 60.0;
  std::vector<PlantedEffect> effects;
  double jitter_sd = 0.2;
  double noise_rms_v = 10e-6;
  int latent_sources = 16;
  double independent_fraction = 0.2;
  double link_rms_ratio = 1.0;    // link process RMS relative to the noise floor
  double link_base_pdc = 0.2;     // band-averaged PDC of every link outside its effect segments
  double link_radius = 0.95;      // pole radius of the resonant link oscillators
  bool eog = false;               // adds VEOG/HEOG channels with blinks leaking frontally
  double blink_rate_hz = 0.25;
  std::optional<std::uint64_t> seed;

  /// Throws ConfigError on an invalid spec (including a missing seed).
  void validate() const;
};

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& spec);
SynthSpec load_synth_spec(const std::filesystem::path& path);

/// Band-averaged PDC (sink <- source) of the bivariate link model with the given
/// coupling, on a uniform grid over the band.
double analytic_link_pdc(double coupling, double radius, const FrequencyBand& band, double fs, int grid_points = 64);

/// Coupling whose analytic band-averaged PDC reaches target (bisection).
double solve_link_coupling(double target_pdc, double radius, const FrequencyBand& band, double fs);

struct SubjectTruth {
  std::string subject;
  double gain = 1.0;
  std::vector<std::string> condition_order;
  std::vector<double> effect_sizes;      // per planted effect, after jitter
  std::vector<double> base_pdc;          // per effect; NaN for band-power effects
  std::vector<double> target_pdc;
};

std::string synth_subject_id(const SynthSpec& spec, int index);

/// One subject: rest baseline, then every (condition, task) segment with the
/// conditions in a seeded random order.
Recording gen_subject(const SynthSpec& spec, int index, SubjectTruth* truth = nullptr);

struct SynthStudy {
  std::vector<Recording> recordings;
  std::vector<SubjectTruth> truths;
  nlohmann::json ground_truth;
};

SynthStudy gen_study(const SynthSpec& spec);

/// Expected (feature, condition, sign) entries plus per-subject realisations.
nlohmann::json ground_truth_manifest(const SynthSpec& spec, const std::vector<SubjectTruth>& truths);

/// Writes every recording and ground_truth.json into dir.
void write_study(const SynthStudy& study, const std::filesystem::path& dir);

}  // namespace eegdecode
