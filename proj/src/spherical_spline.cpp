#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "eegdecode/error.hpp"
#include "eegdecode/preprocess.hpp"

namespace eegdecode {

double spherical_spline_g(double x) {
  x = std::clamp(x, -1.0, 1.0);
  // Legendre recurrence: (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}.
  double p_prev = 1.0;
  double p = x;
  double sum = 0.0;
  for (int n = 1; n <= 50; ++n) {
    const double nn = n * (n + 1.0);
    const double coef = (2.0 * n + 1.0) / (nn * nn * nn * nn);
    if (coef / (4.0 * std::numbers::pi) < 1e-10) break;
    sum += coef * p;
    const double p_next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
    p_prev = p;
    p = p_next;
  }
  return sum / (4.0 * std::numbers::pi);
}

Eigen::MatrixXd spherical_spline_matrix(std::span<const Eigen::Vector3d> sources,
                                        std::span<const Eigen::Vector3d> targets) {
  const auto k = static_cast<Eigen::Index>(sources.size());
  if (k < 1) throw DataError("spline interpolation needs at least one source");

  // [G 1; 1^T 0] [c; c0] = [v; 0]
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const double g = spherical_spline_g(sources[static_cast<std::size_t>(i)].dot(
          sources[static_cast<std::size_t>(j)]));
      system(i, j) = g;
      system(j, i) = g;
    }
    system(i, k) = 1.0;
    system(k, i) = 1.0;
  }
  const auto t = static_cast<Eigen::Index>(targets.size());
  Eigen::MatrixXd eval(t, k + 1);
  for (Eigen::Index r = 0; r < t; ++r) {
    for (Eigen::Index j = 0; j < k; ++j) {
      eval(r, j) = spherical_spline_g(targets[static_cast<std::size_t>(r)].dot(
          sources[static_cast<std::size_t>(j)]));
    }
    eval(r, k) = 1.0;
  }
  // W = eval * inv(system)[:, :k]; system is symmetric so solve system * Z = eval^T.
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(system);
  const Eigen::MatrixXd z = cod.solve(eval.transpose());
  return z.topRows(k).transpose();
}

Recording interpolate_channels(const Recording& rec, const Montage& montage,
                               const std::vector<std::string>& bad) {
  validate(rec);
  if (bad.empty()) return rec;

  std::set<std::string> bad_set(bad.begin(), bad.end());
  std::vector<int> good_idx;
  std::vector<int> bad_idx;
  for (int c : rec.scalp_indices()) {
    (bad_set.count(rec.channel_names[static_cast<std::size_t>(c)]) ? bad_idx : good_idx).push_back(c);
  }
  if (bad_idx.size() != bad_set.size()) {
    throw DataError("interpolate_channels: bad list names channels that are not scalp channels");
  }
  if (good_idx.size() < 4) {
    throw DataError("interpolate_channels: fewer than 4 good scalp channels remain");
  }

  std::vector<Eigen::Vector3d> src;
  std::vector<Eigen::Vector3d> dst;
  for (int c : good_idx) src.push_back(montage.position(rec.channel_names[static_cast<std::size_t>(c)]));
  for (int c : bad_idx) dst.push_back(montage.position(rec.channel_names[static_cast<std::size_t>(c)]));
  const Eigen::MatrixXd w = spherical_spline_matrix(src, dst);

  Eigen::MatrixXd good(rec.n_samples(), static_cast<Eigen::Index>(good_idx.size()));
  for (std::size_t j = 0; j < good_idx.size(); ++j) {
    good.col(static_cast<Eigen::Index>(j)) = rec.samples.col(good_idx[j]);
  }
  const Eigen::MatrixXd est = good * w.transpose();

  Recording out = rec;
  for (std::size_t j = 0; j < bad_idx.size(); ++j) {
    out.samples.col(bad_idx[j]) = est.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

}  // namespace eegdecode
