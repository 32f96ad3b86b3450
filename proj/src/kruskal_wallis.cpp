#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "eegdecode/error.hpp"
#include "eegdecode/stats.hpp"

namespace eegdecode {

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DataError("Kruskal-Wallis: need at least 2 groups");
  TestResult res;
  std::vector<std::pair<double, std::size_t>> pooled;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw DataError("Kruskal-Wallis: group " + std::to_string(g) + " is empty");
    res.group_sizes.push_back(static_cast<int>(groups[g].size()));
    for (double v : groups[g]) {
      if (std::isnan(v)) throw DataError("Kruskal-Wallis: NaN value");
      pooled.emplace_back(v, g);
    }
  }
  const auto n = pooled.size();
  if (n < 3) throw DataError("Kruskal-Wallis: need at least 3 observations");
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<double> rank_sum(groups.size(), 0.0);
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) rank_sum[pooled[k].second] += avg;
    const double t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }
  const double nn = static_cast<double>(n);
  const double correction = 1.0 - tie_sum / (nn * nn * nn - nn);
  if (correction <= 0.0) return res;  // all values identical

  double s = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) s += rank_sum[g] * rank_sum[g] / static_cast<double>(groups[g].size());
  const double h = (12.0 / (nn * (nn + 1.0)) * s - 3.0 * (nn + 1.0)) / correction;
  res.h = std::max(0.0, h);
  const double dof = static_cast<double>(groups.size() - 1);
  res.p = res.h > 0.0 ? boost::math::gamma_q(dof / 2.0, res.h / 2.0) : 1.0;
  return res;
}

double bonferroni_threshold(double alpha, int comparisons) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("Bonferroni: alpha must lie in (0, 1)");
  if (comparisons < 1) throw ConfigError("Bonferroni: comparison count must be >= 1");
  return alpha / comparisons;
}

}  // namespace eegdecode
