#include <algorithm>
#include <cmath>
#include <numbers>

#include "eegdecode/error.hpp"
#include "eegdecode/preprocess.hpp"

namespace eegdecode {

namespace {

constexpr double kMinCalibrationS = 30.0;
// Only the strongest 66 % of window components are eligible for reconstruction.
constexpr double kMaxRemovedFraction = 0.66;

Eigen::MatrixXd scalp_matrix(const Recording& rec, const std::vector<int>& idx) {
  Eigen::MatrixXd x(rec.n_samples(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = rec.samples.col(idx[j]);
  return x;
}

// Eigenvectors sorted by descending eigenvalue with a deterministic sign
// (largest-magnitude entry positive).
void sorted_eigen(const Eigen::MatrixXd& cov, Eigen::MatrixXd& vecs, Eigen::VectorXd& vals) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericError("ASR: eigendecomposition failed");
  const auto m = cov.rows();
  vecs.resize(m, m);
  vals.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index src = m - 1 - j;
    Eigen::VectorXd v = es.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    vecs.col(j) = v;
    vals[j] = std::max(es.eigenvalues()[src], 0.0);
  }
}

std::vector<Eigen::Index> window_starts(Eigen::Index n, Eigen::Index win) {
  std::vector<Eigen::Index> starts;
  const Eigen::Index hop = std::max<Eigen::Index>(1, win / 2);
  for (Eigen::Index s = 0; s + win <= n; s += hop) starts.push_back(s);
  if (starts.empty() || starts.back() + win < n) starts.push_back(std::max<Eigen::Index>(0, n - win));
  return starts;
}

}  // namespace

Eigen::VectorXd AsrModel::thresholds(double cutoff) const {
  if (std::isinf(cutoff)) return Eigen::VectorXd::Constant(rms_mean.size(), INFINITY);
  return rms_mean + cutoff * rms_std;
}

AsrModel asr_calibrate(const Recording& baseline, double window_s) {
  validate(baseline);
  if (!(window_s > 0.0)) throw ConfigError("ASR window must be positive");
  if (baseline.duration_s() + 1e-9 < kMinCalibrationS) {
    throw DataError("ASR calibration needs at least 30 s of baseline data");
  }
  const auto idx = baseline.scalp_indices();
  if (idx.empty()) throw DataError("ASR calibration: no scalp channels");
  const Eigen::MatrixXd x = scalp_matrix(baseline, idx);
  const auto n = x.rows();

  AsrModel model;
  for (int c : idx) model.channel_names.push_back(baseline.channel_names[static_cast<std::size_t>(c)]);
  model.window_s = window_s;
  model.fs = baseline.fs;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  sorted_eigen(cov, model.axes, model.variances);
  model.mixing = model.axes * model.variances.cwiseSqrt().asDiagonal() * model.axes.transpose();

  const Eigen::MatrixXd comp = x * model.axes;
  const auto win = std::max<Eigen::Index>(2, std::llround(window_s * baseline.fs));
  const auto starts = window_starts(n, win);
  Eigen::MatrixXd rms(static_cast<Eigen::Index>(starts.size()), comp.cols());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    rms.row(static_cast<Eigen::Index>(w)) =
        (comp.middleRows(starts[w], win).colwise().squaredNorm() / static_cast<double>(win)).cwiseSqrt();
  }
  model.rms_mean = rms.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rms.rowwise() - model.rms_mean.transpose();
  const double denom = std::max<double>(1.0, static_cast<double>(rms.rows() - 1));
  model.rms_std = (centered.colwise().squaredNorm() / denom).cwiseSqrt().transpose();
  // Components with zero variance in calibration would give a zero threshold.
  const double floor = 1e-12 * std::max(1e-300, model.rms_mean.maxCoeff());
  for (Eigen::Index k = 0; k < model.rms_mean.size(); ++k) {
    model.rms_mean[k] = std::max(model.rms_mean[k], floor);
    model.rms_std[k] = std::max(model.rms_std[k], floor);
  }
  return model;
}

AsrWindowResult asr_window_operator(const Eigen::Ref<const Eigen::MatrixXd>& window,
                                    const AsrModel& model, double cutoff) {
  const auto m = window.cols();
  if (m != model.axes.rows()) throw DataError("ASR: channel count differs from calibration");
  AsrWindowResult out;
  out.reconstruction = Eigen::MatrixXd::Identity(m, m);
  out.flagged_axes.resize(m, 0);
  if (std::isinf(cutoff)) return out;

  const Eigen::MatrixXd cov = (window.transpose() * window) / static_cast<double>(window.rows());
  Eigen::MatrixXd axes;
  Eigen::VectorXd var;
  sorted_eigen(cov, axes, var);

  // Threshold along each window axis, expressed through the calibration axes.
  const Eigen::MatrixXd scaled = model.thresholds(cutoff).asDiagonal() * model.axes.transpose();
  const auto max_removed = static_cast<Eigen::Index>(std::floor(kMaxRemovedFraction * static_cast<double>(m)));
  std::vector<char> keep(static_cast<std::size_t>(m), 1);
  Eigen::Index removed = 0;
  for (Eigen::Index j = 0; j < max_removed; ++j) {
    const double thr2 = (scaled * axes.col(j)).squaredNorm();
    if (var[j] > thr2) {
      keep[static_cast<std::size_t>(j)] = 0;
      ++removed;
    }
  }
  if (removed == 0) return out;

  out.identity = false;
  out.flagged_axes.resize(m, removed);
  Eigen::MatrixXd kept_proj = axes.transpose() * model.mixing;
  for (Eigen::Index j = 0, f = 0; j < m; ++j) {
    if (!keep[static_cast<std::size_t>(j)]) {
      kept_proj.row(j).setZero();
      out.flagged_axes.col(f++) = axes.col(j);
    }
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kept_proj);
  out.reconstruction = model.mixing * cod.pseudoInverse() * axes.transpose();
  return out;
}

Recording asr_clean(const Recording& rec, const AsrModel& model, double cutoff) {
  validate(rec);
  const auto idx = rec.scalp_indices();
  if (idx.size() != model.channel_names.size()) {
    throw DataError("ASR: recording scalp channels differ from calibration");
  }
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (rec.channel_names[static_cast<std::size_t>(idx[j])] != model.channel_names[j]) {
      throw DataError("ASR: recording scalp channels differ from calibration");
    }
  }
  if (!(cutoff > 0.0)) throw ConfigError("ASR cutoff must be positive");
  if (std::isinf(cutoff)) return rec;

  const Eigen::MatrixXd x = scalp_matrix(rec, idx);
  const auto n = x.rows();
  const auto win = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2, std::llround(model.window_s * rec.fs)));
  const auto starts = window_starts(n, win);

  Eigen::VectorXd hann(win);
  for (Eigen::Index i = 0; i < win; ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(win));
  }
  Eigen::VectorXd weight_sum = Eigen::VectorXd::Zero(n);
  for (auto s : starts) weight_sum.segment(s, win) += hann;

  Eigen::MatrixXd correction = Eigen::MatrixXd::Zero(n, x.cols());
  bool any = false;
  for (auto s : starts) {
    const auto block = x.middleRows(s, win);
    const auto op = asr_window_operator(block, model, cutoff);
    if (op.identity) continue;
    any = true;
    const Eigen::MatrixXd delta = op.reconstruction - Eigen::MatrixXd::Identity(x.cols(), x.cols());
    correction.middleRows(s, win) += hann.asDiagonal() * (block * delta.transpose());
  }
  if (!any) return rec;

  Recording out = rec;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.samples.col(idx[j]) += correction.col(static_cast<Eigen::Index>(j)).cwiseQuotient(weight_sum);
  }
  return out;
}

}  // namespace eegdecode
