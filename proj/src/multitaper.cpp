#include <algorithm>
#include <cmath>

#include "eegdecode/error.hpp"
#include "eegdecode/fft.hpp"
#include "eegdecode/spectral.hpp"

namespace eegdecode {

const std::vector<FrequencyBand>& canonical_bands() {
  static const std::vector<FrequencyBand> bands = {
      {"delta", 1.0, 4.0}, {"theta", 4.0, 8.0}, {"alpha", 8.0, 12.0},
      {"beta", 12.0, 30.0}, {"gamma", 30.0, 40.0}};
  return bands;
}

const FrequencyBand& canonical_band(const std::string& name) {
  for (const auto& b : canonical_bands()) {
    if (b.name == name) return b;
  }
  throw ConfigError("unknown band '" + name + "'");
}

void MultitaperConfig::validate() const {
  if (!(nw >= 1.0)) throw ConfigError("multitaper: nw must be >= 1");
  if (k < 1 || k > static_cast<int>(std::floor(2.0 * nw - 1.0 + 1e-12))) {
    throw ConfigError("multitaper: taper count must lie in [1, 2*nw - 1]");
  }
}

Psd multitaper_psd(std::span<const double> x, double fs, const Tapers& tapers) {
  const auto n = x.size();
  if (static_cast<std::size_t>(tapers.tapers.cols()) != n) {
    throw DataError("multitaper: taper length does not match signal length");
  }
  if (!(fs > 0.0)) throw ConfigError("multitaper: fs must be positive");
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("multitaper: non-finite input");
  }
  const std::size_t nfft = std::max<std::size_t>(256, next_pow2(n));
  const std::size_t bins = nfft / 2 + 1;
  Psd psd;
  psd.freqs.resize(bins);
  psd.power.assign(bins, 0.0);
  for (std::size_t j = 0; j < bins; ++j) psd.freqs[j] = static_cast<double>(j) * fs / static_cast<double>(nfft);

  std::vector<double> tapered(n);
  const auto k = tapers.tapers.rows();
  for (Eigen::Index t = 0; t < k; ++t) {
    for (std::size_t i = 0; i < n; ++i) tapered[i] = x[i] * tapers.tapers(t, static_cast<Eigen::Index>(i));
    const auto spec = rfft(tapered, nfft);
    for (std::size_t j = 0; j < bins; ++j) psd.power[j] += std::norm(spec[j]);
  }
  const double scale = 1.0 / (static_cast<double>(k) * fs);
  for (std::size_t j = 0; j < bins; ++j) {
    const bool edge = j == 0 || j == bins - 1;
    psd.power[j] *= edge ? scale : 2.0 * scale;
  }
  return psd;
}

Psd multitaper_psd(std::span<const double> x, double fs, const MultitaperConfig& cfg) {
  cfg.validate();
  if (x.size() < 8) throw DataError("multitaper: need at least 8 samples");
  return multitaper_psd(x, fs, dpss_tapers(static_cast<int>(x.size()), cfg.nw, cfg.k));
}

double band_power(const Psd& psd, const FrequencyBand& band) {
  if (psd.freqs.size() < 2) throw DataError("band_power: empty spectrum");
  if (!(band.lo < band.hi)) throw ConfigError("band '" + band.name + "' has zero or negative width");
  const double top = psd.freqs.back();
  if (band.lo < 0.0 || band.hi > top + 1e-9 * top) {
    throw ConfigError("band '" + band.name + "' lies outside the spectrum");
  }
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < psd.freqs.size(); ++j) {
    const double f0 = psd.freqs[j];
    const double f1 = psd.freqs[j + 1];
    const double a = std::max(f0, band.lo);
    const double b = std::min(f1, band.hi);
    if (b <= a) continue;
    const double slope = (psd.power[j + 1] - psd.power[j]) / (f1 - f0);
    const double pa = psd.power[j] + slope * (a - f0);
    const double pb = psd.power[j] + slope * (b - f0);
    total += 0.5 * (pa + pb) * (b - a);
  }
  return total;
}

}  // namespace eegdecode
