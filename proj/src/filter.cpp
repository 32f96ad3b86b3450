#include <cmath>
#include <numbers>

#include "eegdecode/error.hpp"
#include "eegdecode/fft.hpp"
#include "eegdecode/preprocess.hpp"

namespace eegdecode {

namespace {

// Windowed-sinc low-pass normalized to unit DC gain.
std::vector<double> windowed_sinc(double cutoff_hz, double fs, std::size_t length) {
  const auto half = static_cast<std::ptrdiff_t>((length - 1) / 2);
  const double fc = cutoff_hz / fs;
  std::vector<double> h(length);
  double sum = 0.0;
  for (std::ptrdiff_t k = 0; k <= half; ++k) {
    const double x = 2.0 * fc * static_cast<double>(k);
    const double sinc = k == 0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const auto n = static_cast<double>(half + k);
    const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / static_cast<double>(length - 1));
    const double v = 2.0 * fc * sinc * w;
    h[static_cast<std::size_t>(half + k)] = v;
    h[static_cast<std::size_t>(half - k)] = v;
    sum += k == 0 ? v : 2.0 * v;
  }
  for (auto& v : h) v /= sum;
  return h;
}

void check_kernel_args(double fs, double transition_bw_hz) {
  if (!(fs > 0.0)) throw ConfigError("filter: fs must be positive");
  if (!(transition_bw_hz > 0.0)) throw ConfigError("filter: transition bandwidth must be positive");
}

}  // namespace

std::size_t hamming_kernel_length(double fs, double transition_bw_hz) {
  check_kernel_args(fs, transition_bw_hz);
  // 1e-9 guards against 3.3*fs/tbw landing a hair above an integer.
  auto n = static_cast<std::size_t>(std::ceil(3.3 * fs / transition_bw_hz - 1e-9));
  if (n % 2 == 0) ++n;
  return std::max<std::size_t>(n, 3);
}

FilterKernel design_bandpass_fir(double low_hz, double high_hz, double fs,
                                 double transition_bw_hz) {
  check_kernel_args(fs, transition_bw_hz);
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0)) {
    throw ConfigError("band-pass edges must satisfy 0 < low < high < fs/2");
  }
  const std::size_t len = hamming_kernel_length(fs, transition_bw_hz);
  const auto hi = windowed_sinc(high_hz, fs, len);
  const auto lo = windowed_sinc(low_hz, fs, len);
  FilterKernel k{std::vector<double>(len), fs, low_hz, high_hz, transition_bw_hz};
  const std::size_t half = (len - 1) / 2;
  for (std::size_t i = 0; i <= half; ++i) {
    const double v = hi[half + i] - lo[half + i];
    k.taps[half + i] = v;
    k.taps[half - i] = v;
  }
  return k;
}

FilterKernel design_lowpass_fir(double cutoff_hz, double fs, double transition_bw_hz) {
  check_kernel_args(fs, transition_bw_hz);
  if (!(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0)) {
    throw ConfigError("low-pass cutoff must lie in (0, fs/2)");
  }
  const std::size_t len = hamming_kernel_length(fs, transition_bw_hz);
  return FilterKernel{windowed_sinc(cutoff_hz, fs, len), fs, 0.0, cutoff_hz, transition_bw_hz};
}

double kernel_gain(const FilterKernel& k, double f_hz) {
  const auto half = static_cast<double>(k.group_delay());
  double re = 0.0;
  for (std::size_t n = 0; n < k.taps.size(); ++n) {
    re += k.taps[n] * std::cos(2.0 * std::numbers::pi * f_hz * (static_cast<double>(n) - half) / k.fs);
  }
  return re;
}

std::vector<double> filter_zero_phase(std::span<const double> x, const FilterKernel& k) {
  const std::size_t n = x.size();
  const std::size_t len = k.taps.size();
  if (n <= len) {
    throw DataError("signal of " + std::to_string(n) + " samples is not longer than the " +
                    std::to_string(len) + "-tap kernel");
  }
  const std::size_t pad = k.group_delay();
  std::vector<double> padded(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    padded[i] = x[pad - i];
    padded[pad + n + i] = x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));
  const auto full = fft_convolve(padded, k.taps);
  return {full.begin() + static_cast<std::ptrdiff_t>(2 * pad),
          full.begin() + static_cast<std::ptrdiff_t>(2 * pad + n)};
}

Recording apply_filter_zero_phase(const Recording& rec, const FilterKernel& k) {
  validate(rec);
  if (std::abs(k.fs - rec.fs) > 1e-9 * rec.fs) {
    throw ConfigError("kernel sampling rate does not match recording");
  }
  Recording out = rec;
  std::vector<double> col(static_cast<std::size_t>(rec.n_samples()));
  for (Eigen::Index c = 0; c < rec.n_channels(); ++c) {
    Eigen::VectorXd::Map(col.data(), rec.n_samples()) = rec.samples.col(c);
    const auto y = filter_zero_phase(col, k);
    out.samples.col(c) = Eigen::VectorXd::Map(y.data(), rec.n_samples());
  }
  return out;
}

}  // namespace eegdecode
