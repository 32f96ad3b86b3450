#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "eegdecode/connectivity.hpp"
#include "eegdecode/error.hpp"

namespace eegdecode {

PdcTensor pdc(const MvarModel& model, const std::vector<double>& freqs, StabilityPolicy policy) {
  if (!model.stable && policy == StabilityPolicy::Reject) {
    throw NumericError("PDC: MVAR model is unstable (spectral radius " + std::to_string(model.spectral_radius) + ")");
  }
  if (model.fs <= 0.0) throw ConfigError("PDC: model has no sampling rate");
  const auto m = model.channels();
  PdcTensor out;
  out.freqs = freqs;
  out.values.reserve(freqs.size());
  for (double f : freqs) {
    if (!(f >= 0.0 && f <= model.fs / 2.0)) {
      throw ConfigError("PDC: frequency " + std::to_string(f) + " Hz outside [0, fs/2]");
    }
    Eigen::MatrixXcd abar = Eigen::MatrixXcd::Identity(m, m);
    for (int r = 1; r <= model.order; ++r) {
      const std::complex<double> phase = std::polar(1.0, -2.0 * std::numbers::pi * f * r / model.fs);
      abar -= model.coefficients[static_cast<std::size_t>(r - 1)].cast<std::complex<double>>() * phase;
    }
    Eigen::MatrixXd mag = abar.cwiseAbs();
    for (Eigen::Index j = 0; j < m; ++j) {
      const double norm = mag.col(j).norm();
      if (!(norm > 0.0)) throw NumericError("PDC: zero column in Abar(f)");
      mag.col(j) /= norm;
    }
    out.values.push_back(std::move(mag));
  }
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 1 || !(hi >= lo)) throw ConfigError("uniform_grid: invalid range or point count");
  if (n == 1) return {lo};
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  g.back() = hi;
  return g;
}

Eigen::MatrixXd band_average(const PdcTensor& t, const FrequencyBand& band, bool closed_top) {
  if (t.values.empty()) throw DataError("band_average: empty PDC tensor");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(t.values.front().rows(), t.values.front().cols());
  int count = 0;
  for (std::size_t f = 0; f < t.freqs.size(); ++f) {
    const double hz = t.freqs[f];
    if (hz >= band.lo && (hz < band.hi || (closed_top && hz == band.hi))) {
      acc += t.values[f];
      ++count;
    }
  }
  if (count == 0) throw ConfigError("band_average: no grid points inside band '" + band.name + "'");
  return acc / count;
}

FeatureMatrix pdc_band_features(const std::vector<Window>& windows,
                                const std::vector<std::string>& electrodes,
                                const std::vector<FrequencyBand>& bands,
                                const PdcFeatureOptions& opts, PdcStabilityReport* report) {
  if (windows.empty()) throw DataError("pdc_band_features: no windows");
  if (electrodes.empty()) throw ConfigError("pdc_band_features: empty electrode subset");
  if (bands.empty()) throw ConfigError("pdc_band_features: no bands");
  if (opts.grid_points < 2) throw ConfigError("pdc_band_features: grid needs at least 2 points");

  double lo = bands.front().lo;
  double hi = bands.front().hi;
  std::size_t top = 0;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    lo = std::min(lo, bands[b].lo);
    if (bands[b].hi > hi) {
      hi = bands[b].hi;
      top = b;
    }
  }
  const auto grid = uniform_grid(lo, hi, opts.grid_points);

  FeatureMatrix fm;
  for (const auto& src : electrodes) {
    for (const auto& sink : electrodes) {
      for (const auto& b : bands) fm.features.push_back({FeatureKind::Pdc, src, sink, b.name});
    }
  }
  const auto m = static_cast<Eigen::Index>(electrodes.size());
  fm.values.resize(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(fm.features.size()));

  const Recording* layout = nullptr;
  std::vector<int> cols;
  for (std::size_t r = 0; r < windows.size(); ++r) {
    const auto& w = windows[r];
    if (w.source.get() != layout) {
      layout = w.source.get();
      cols.clear();
      for (const auto& name : electrodes) {
        const auto idx = layout->channel_index(name);
        if (!idx || layout->channel_roles[static_cast<std::size_t>(*idx)] != ChannelRole::Scalp) {
          throw DataError("pdc_band_features: electrode '" + name + "' is not a scalp channel of subject '" +
                          layout->subject_id + "'");
        }
        cols.push_back(*idx);
      }
    }
    const auto data = w.data();
    Eigen::MatrixXd sub(data.rows(), m);
    for (Eigen::Index c = 0; c < m; ++c) sub.col(c) = data.col(cols[static_cast<std::size_t>(c)]);

    MvarModel model;
    try {
      model = fit_mvar(sub, opts.order, w.fs());
      if (report) {
        report->max_spectral_radius = std::max(report->max_spectral_radius, model.spectral_radius);
        if (!model.stable) report->unstable_rows.push_back(r);
      }
      const auto tensor = pdc(model, grid, opts.unstable);
      std::vector<Eigen::MatrixXd> per_band;
      for (std::size_t b = 0; b < bands.size(); ++b) per_band.push_back(band_average(tensor, bands[b], b == top));
      Eigen::Index col = 0;
      for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
          for (const auto& avg : per_band) fm.values(static_cast<Eigen::Index>(r), col++) = avg(i, j);
        }
      }
    } catch (const NumericError& e) {
      throw NumericError("pdc_band_features: window of subject '" + w.subject + "' at " +
                         std::to_string(w.start_s) + " s: " + e.what());
    }
    fm.labels.push_back({w.subject, w.condition, w.task, w.start_s});
  }
  return fm;
}

}  // namespace eegdecode
