#include <cmath>
#include <map>

#include "eegdecode/error.hpp"
#include "eegdecode/spectral.hpp"

namespace eegdecode {

namespace {

// Scalp channel names shared by every window; throws if windows disagree.
std::vector<int> common_scalp_layout(const std::vector<Window>& windows) {
  const auto& first = *windows.front().source;
  const auto idx = first.scalp_indices();
  for (const auto& w : windows) {
    const auto& rec = *w.source;
    if (w.source.get() == &first) continue;
    if (rec.channel_names != first.channel_names || rec.channel_roles != first.channel_roles) {
      throw DataError("band_power_features: windows have inconsistent channel layouts");
    }
    if (rec.fs != first.fs) throw DataError("band_power_features: windows have different sampling rates");
  }
  for (const auto& w : windows) {
    if (w.length != windows.front().length) throw DataError("band_power_features: windows differ in length");
  }
  return idx;
}

}  // namespace

FeatureMatrix band_power_features(const std::vector<Window>& windows,
                                  const std::vector<FrequencyBand>& bands,
                                  const MultitaperConfig& cfg) {
  cfg.validate();
  if (windows.empty()) throw DataError("band_power_features: no windows");
  if (bands.empty()) throw ConfigError("band_power_features: no bands");
  const auto scalp = common_scalp_layout(windows);
  const auto& names = windows.front().source->channel_names;

  FeatureMatrix fm;
  for (int c : scalp) {
    for (const auto& b : bands) {
      fm.features.push_back({FeatureKind::BandPower, names[static_cast<std::size_t>(c)], "", b.name});
    }
  }
  const auto n = static_cast<int>(windows.front().length);
  if (n < 8) throw DataError("band_power_features: windows shorter than 8 samples");
  const Tapers tapers = dpss_tapers(n, cfg.nw, cfg.k);

  fm.values.resize(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(fm.features.size()));
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < windows.size(); ++r) {
    const auto& w = windows[r];
    const auto data = w.data();
    Eigen::Index col = 0;
    for (int c : scalp) {
      Eigen::VectorXd::Map(x.data(), n) = data.col(c);
      const Psd psd = multitaper_psd(x, w.fs(), tapers);
      for (const auto& b : bands) fm.values(static_cast<Eigen::Index>(r), col++) = band_power(psd, b);
    }
    fm.labels.push_back({w.subject, w.condition, w.task, w.start_s});
  }
  return fm;
}

FeatureMatrix normalize_to_baseline(const FeatureMatrix& fm, const FeatureMatrix& baseline_fm) {
  fm.check_shape();
  baseline_fm.check_shape();
  if (fm.features != baseline_fm.features) {
    throw DataError("normalize_to_baseline: baseline features differ from data features");
  }
  std::map<std::string, std::pair<Eigen::VectorXd, int>> sums;
  for (Eigen::Index i = 0; i < baseline_fm.rows(); ++i) {
    auto& [sum, count] = sums[baseline_fm.labels[static_cast<std::size_t>(i)].subject];
    if (count == 0) sum = Eigen::VectorXd::Zero(baseline_fm.cols());
    sum += baseline_fm.values.row(i).transpose();
    ++count;
  }
  FeatureMatrix out = fm;
  std::map<std::string, Eigen::VectorXd> means;
  for (auto& [subject, acc] : sums) means[subject] = acc.first / static_cast<double>(acc.second);

  for (Eigen::Index i = 0; i < fm.rows(); ++i) {
    const auto& subject = fm.labels[static_cast<std::size_t>(i)].subject;
    const auto it = means.find(subject);
    if (it == means.end()) throw DataError("normalize_to_baseline: no baseline rows for subject '" + subject + "'");
    const auto& mean = it->second;
    for (Eigen::Index j = 0; j < fm.cols(); ++j) {
      if (mean[j] == 0.0 || !std::isfinite(mean[j])) {
        throw DataError("normalize_to_baseline: baseline mean of feature '" +
                        fm.features[static_cast<std::size_t>(j)].to_string() + "' is zero for subject '" +
                        subject + "'");
      }
      out.values(i, j) = (fm.values(i, j) - mean[j]) / mean[j];
    }
  }
  return out;
}

FeatureMatrix standardize_across_subjects(const FeatureMatrix& fm) {
  fm.check_shape();
  if (fm.rows() < 2) throw DataError("standardize: need at least 2 rows");
  FeatureMatrix out = fm;
  const double n = static_cast<double>(fm.rows());
  for (Eigen::Index j = 0; j < fm.cols(); ++j) {
    auto col = out.values.col(j);
    const double scale = col.cwiseAbs().maxCoeff();
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (!(sd > 1e-13 * scale) || !std::isfinite(sd)) {
      throw DataError("standardize: feature '" + fm.features[static_cast<std::size_t>(j)].to_string() +
                      "' has zero variance");
    }
    col /= sd;
  }
  return out;
}

}  // namespace eegdecode
