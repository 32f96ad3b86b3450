#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegdecode/signal_io.hpp"

namespace eegdecode {

// ---------------------------------------------------------------------------
// Band-pass filtering

/// Linear-phase FIR kernel. taps has odd length and is exactly symmetric.
struct FilterKernel {
  std::vector<double> taps;
  double fs = 0.0;
  double low_hz = 0.0;
  double high_hz = 0.0;
  double transition_bw_hz = 0.0;

  std::size_t group_delay() const { return (taps.size() - 1) / 2; }
};

/// Smallest odd integer >= 3.3 * fs / transition_bw (Hamming main-lobe width).
std::size_t hamming_kernel_length(double fs, double transition_bw_hz);

/// Hamming-windowed sinc band-pass with its -6 dB points at low and high.
FilterKernel design_bandpass_fir(double low_hz, double high_hz, double fs,
                                 double transition_bw_hz);

/// Hamming-windowed sinc low-pass with its -6 dB point at cutoff.
FilterKernel design_lowpass_fir(double cutoff_hz, double fs, double transition_bw_hz);

/// Zero-phase amplitude response at f Hz (response referenced to the kernel centre).
double kernel_gain(const FilterKernel& k, double f_hz);

/// Convolves x with the kernel, compensating the (L-1)/2 group delay.
/// Edges are padded by mirror reflection. Output length equals input length.
std::vector<double> filter_zero_phase(std::span<const double> x, const FilterKernel& k);

/// Applies filter_zero_phase to every channel.
Recording apply_filter_zero_phase(const Recording& rec, const FilterKernel& k);

// ---------------------------------------------------------------------------
// Bad channels

struct BadChannelOptions {
  double flat_s = 10.0;
  double flat_tolerance_v = 1e-8;
  double noise_z = 4.0;
  double noise_lowpass_hz = 40.0;
  double corr_threshold = 0.75;
  double corr_window_s = 1.0;
  int ransac_subsets = 50;
  double ransac_fraction = 0.25;
  std::uint64_t ransac_seed = 0x5eed;
};

enum class BadChannelRule { Flat, Noisy, LowCorrelation };

struct BadChannel {
  std::string name;
  BadChannelRule rule;
};

/// Screens scalp channels. Rule (c) predicts each channel by spherical-spline
/// interpolation from random channel subsets (median over subsets that exclude
/// the channel) when a montage is given; without one it uses the channel's
/// maximum absolute correlation with any other channel.
std::vector<BadChannel> find_bad_channels(const Recording& rec, const BadChannelOptions& opts,
                                          const Montage* montage = nullptr);

/// Names only, in channel order.
std::vector<std::string> detect_bad_channels(const Recording& rec,
                                             const BadChannelOptions& opts = {},
                                             const Montage* montage = nullptr);

// ---------------------------------------------------------------------------
// Spherical-spline interpolation (order 4)

/// g(x) = 1/(4 pi) sum_n (2n+1)/(n(n+1))^4 P_n(x), truncated once the
/// coefficient drops below 1e-10 or at n = 50.
double spherical_spline_g(double cos_angle);

/// Matrix W [targets x sources] such that values_at_targets = W * values_at_sources.
Eigen::MatrixXd spherical_spline_matrix(std::span<const Eigen::Vector3d> sources,
                                        std::span<const Eigen::Vector3d> targets);

/// Replaces bad scalp channels by spline estimates from the remaining scalp channels.
Recording interpolate_channels(const Recording& rec, const Montage& montage,
                               const std::vector<std::string>& bad);

// ---------------------------------------------------------------------------
// Artifact subspace reconstruction (PCA form)

struct AsrModel {
  std::vector<std::string> channel_names;
  Eigen::MatrixXd axes;        // principal axes of the calibration covariance, columns
  Eigen::VectorXd variances;   // matching eigenvalues, descending
  Eigen::MatrixXd mixing;      // symmetric square root of the calibration covariance
  Eigen::VectorXd rms_mean;    // per-component windowed RMS mean
  Eigen::VectorXd rms_std;     // per-component windowed RMS standard deviation
  double window_s = 0.5;
  double fs = 0.0;

  /// rms_mean + cutoff * rms_std.
  Eigen::VectorXd thresholds(double cutoff) const;
  bool operator==(const AsrModel&) const = default;
};

/// Calibrates on the scalp channels of a clean baseline (>= 30 s).
AsrModel asr_calibrate(const Recording& baseline, double window_s = 0.5);

struct AsrWindowResult {
  Eigen::MatrixXd reconstruction;    // [m x m]; identity when nothing is flagged
  Eigen::MatrixXd flagged_axes;      // columns: window principal axes above threshold
  bool identity = true;
};

/// Reconstruction operator for one window of scalp data [samples x m]. Clean
/// data is x_clean = R * x for every sample column vector x.
AsrWindowResult asr_window_operator(const Eigen::Ref<const Eigen::MatrixXd>& window,
                                    const AsrModel& model, double cutoff);

/// Sliding-window cleaning (50 % overlap, Hann-weighted blending of the
/// per-window operators). Only scalp channels are modified.
Recording asr_clean(const Recording& rec, const AsrModel& model, double cutoff = 20.0);

// ---------------------------------------------------------------------------
// Referencing and ocular regression

/// Least-squares removal of all EOG channels from every scalp channel.
Recording regress_out_eog(const Recording& rec);

/// Subtracts the per-sample scalp mean from every scalp channel.
Recording common_average_reference(const Recording& rec);

/// Copy of the [start_s, end_s) part of rec with annotations clipped to it.
Recording crop(const Recording& rec, double start_s, double end_s);

}  // namespace eegdecode
