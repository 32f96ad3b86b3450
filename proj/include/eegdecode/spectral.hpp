#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegdecode/feature_matrix.hpp"
#include "eegdecode/signal_io.hpp"

namespace eegdecode {

struct FrequencyBand {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

/// Delta 1-4, Theta 4-8, Alpha 8-12, Beta 12-30, Gamma 30-40 Hz.
const std::vector<FrequencyBand>& canonical_bands();
const FrequencyBand& canonical_band(const std::string& name);

struct MultitaperConfig {
  double nw = 4.0;
  int k = 7;
  void validate() const;
};

struct Tapers {
  Eigen::MatrixXd tapers;          // [k x n], unit-norm rows
  Eigen::VectorXd concentrations;  // descending, in (0, 1]
};

/// Discrete prolate spheroidal sequences: top-k eigenvectors of the symmetric
/// tridiagonal Slepian matrix. Symmetric tapers have positive sum; antisymmetric
/// tapers start positive.
Tapers dpss_tapers(int n, double nw, int k);

struct Psd {
  std::vector<double> freqs;  // Hz, 0 .. fs/2
  std::vector<double> power;  // one-sided, V^2/Hz
};

/// Averaged tapered periodograms on an nfft = max(256, next_pow2(n)) grid.
/// Integrating over [0, fs/2] estimates the mean square of x.
Psd multitaper_psd(std::span<const double> x, double fs, const MultitaperConfig& cfg);

/// Same, reusing precomputed tapers (must match x.size()).
Psd multitaper_psd(std::span<const double> x, double fs, const Tapers& tapers);

/// Exact integral of the piecewise-linear PSD over [lo, hi].
double band_power(const Psd& psd, const FrequencyBand& band);

/// One row per window, columns scalp channels x bands (channel-major).
FeatureMatrix band_power_features(const std::vector<Window>& windows,
                                  const std::vector<FrequencyBand>& bands,
                                  const MultitaperConfig& cfg);

/// value <- (value - baseline_mean) / baseline_mean, per subject and feature.
/// Every subject in fm must have rows in baseline_fm.
FeatureMatrix normalize_to_baseline(const FeatureMatrix& fm, const FeatureMatrix& baseline_fm);

/// Column z-scores over all rows (population standard deviation).
FeatureMatrix standardize_across_subjects(const FeatureMatrix& fm);

}  // namespace eegdecode
