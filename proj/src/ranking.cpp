#include <algorithm>
#include <map>
#include <numeric>

#include "eegdecode/error.hpp"
#include "eegdecode/stats.hpp"

namespace eegdecode {

std::vector<RankedFeature> rank_features(const FeatureMatrix& fm, LabelKey class_key) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(fm.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return rank_features(fm, class_key, rows);
}

std::vector<RankedFeature> rank_features(const FeatureMatrix& fm, LabelKey class_key,
                                         const std::vector<Eigen::Index>& rows) {
  fm.check_shape();
  if (fm.cols() == 0) throw DataError("rank_features: no features");
  std::map<std::string, int> classes;
  for (auto r : rows) classes.emplace(label_value(fm.labels[static_cast<std::size_t>(r)], class_key), 0);
  if (classes.size() != 2) {
    throw DataError("rank_features: expected exactly 2 classes, found " + std::to_string(classes.size()));
  }
  int next = 0;
  for (auto& [name, id] : classes) id = next++;
  std::vector<int> cls;
  cls.reserve(rows.size());
  for (auto r : rows) cls.push_back(classes.at(label_value(fm.labels[static_cast<std::size_t>(r)], class_key)));

  std::vector<RankedFeature> out;
  out.reserve(static_cast<std::size_t>(fm.cols()));
  std::vector<std::vector<double>> groups(2);
  for (Eigen::Index c = 0; c < fm.cols(); ++c) {
    groups[0].clear();
    groups[1].clear();
    for (std::size_t i = 0; i < rows.size(); ++i) groups[static_cast<std::size_t>(cls[i])].push_back(fm.values(rows[i], c));
    const auto res = kruskal_wallis(groups);
    out.push_back({fm.features[static_cast<std::size_t>(c)], c, res.p, res.h});
  }
  std::vector<std::string> keys;
  keys.reserve(out.size());
  for (const auto& f : out) keys.push_back(f.feature.to_string());
  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out[a].p != out[b].p) return out[a].p < out[b].p;
    return keys[a] < keys[b];
  });
  std::vector<RankedFeature> sorted;
  sorted.reserve(out.size());
  for (auto i : order) sorted.push_back(out[i]);
  return sorted;
}

nlohmann::json ranking_to_json(const std::vector<RankedFeature>& ranked, double threshold) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : ranked) {
    features.push_back({{"feature", f.feature.to_string()}, {"column", f.column}, {"h", f.h}, {"p", f.p},
                        {"significant", f.p < threshold}});
  }
  return {{"format_version", 1}, {"threshold", threshold}, {"features", features}};
}

std::vector<RankedFeature> ranking_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != 1) throw DataError("ranking: unsupported format_version");
    std::vector<RankedFeature> out;
    for (const auto& f : j.at("features")) {
      out.push_back({FeatureDescriptor::parse(f.at("feature").get<std::string>()), f.at("column").get<Eigen::Index>(),
                     f.at("p").get<double>(), f.at("h").get<double>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("ranking: malformed JSON: ") + e.what());
  }
}

}  // namespace eegdecode
