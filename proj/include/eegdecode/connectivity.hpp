#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegdecode/feature_matrix.hpp"
#include "eegdecode/signal_io.hpp"
#include "eegdecode/spectral.hpp"

namespace eegdecode {

/// x_t = sum_r A_r x_{t-r} + e_t, cov(e) = noise_cov.
struct MvarModel {
  int order = 0;
  std::vector<Eigen::MatrixXd> coefficients;  // A_1 .. A_p, each [m x m]
  Eigen::MatrixXd noise_cov;
  double fs = 0.0;
  double spectral_radius = 0.0;  // of the companion matrix
  bool stable = false;

  Eigen::Index channels() const { return noise_cov.rows(); }
};

/// Largest eigenvalue modulus of the [mp x mp] companion matrix.
double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& coefficients);

/// Least-squares fit (Householder QR) on mean-removed data [n x m]. The noise
/// covariance uses the denominator n - p - m*p.
MvarModel fit_mvar(const Eigen::Ref<const Eigen::MatrixXd>& data, int order, double fs = 1.0);

struct OrderSelection {
  int order = 1;
  std::vector<double> sbc;  // sbc[p-1] for p = 1..p_max
};

/// Schwarz criterion ln det(Sigma_p) + p m^2 ln(n_eff) / n_eff, with every
/// order fitted on the same n_eff = n - p_max samples and Sigma_p the
/// maximum-likelihood residual covariance. Ties resolve to the smaller order.
OrderSelection select_order_sbc(const Eigen::Ref<const Eigen::MatrixXd>& data, int p_max);

/// Partial directed coherence, values[f](sink, source).
struct PdcTensor {
  std::vector<double> freqs;
  std::vector<Eigen::MatrixXd> values;
  std::vector<std::string> channel_names;

  double at(Eigen::Index sink, Eigen::Index source, std::size_t f) const { return values[f](sink, source); }
};

enum class StabilityPolicy {
  Reject,  // unstable model raises NumericError
  Accept,  // caller has flagged the model and takes the values as-is
};

/// |Abar_ij(f)| / sqrt(sum_k |Abar_kj(f)|^2), Abar(f) = I - sum_r A_r e^{-i 2 pi f r / fs}.
PdcTensor pdc(const MvarModel& model, const std::vector<double>& freqs,
              StabilityPolicy policy = StabilityPolicy::Reject);

/// n points evenly spaced over [lo, hi] inclusive.
std::vector<double> uniform_grid(double lo, double hi, int n);

/// Mean PDC over grid points with lo <= f < hi (the top band also takes f == hi).
Eigen::MatrixXd band_average(const PdcTensor& t, const FrequencyBand& band, bool closed_top);

struct PdcFeatureOptions {
  int order = 15;
  int grid_points = 64;
  // Band-limited EEG routinely yields LS fits with a root a hair outside the
  // unit circle near the low-pass edge. Such windows are kept and reported.
  StabilityPolicy unstable = StabilityPolicy::Accept;
};

/// Windows whose fitted model was not stable.
struct PdcStabilityReport {
  std::vector<std::size_t> unstable_rows;
  double max_spectral_radius = 0.0;
};

/// Per window: MVAR on the electrode subset, PDC on a uniform grid spanning the
/// bands, band-averaged. Columns ordered (source, sink, band), self-pairs included.
FeatureMatrix pdc_band_features(const std::vector<Window>& windows,
                                const std::vector<std::string>& electrodes,
                                const std::vector<FrequencyBand>& bands,
                                const PdcFeatureOptions& opts = {},
                                PdcStabilityReport* report = nullptr);

}  // namespace eegdecode
