#include <algorithm>
#include <cmath>

#include "eegdecode/error.hpp"
#include "eegdecode/preprocess.hpp"

namespace eegdecode {

Recording regress_out_eog(const Recording& rec) {
  validate(rec);
  const auto eog = rec.eog_indices();
  if (eog.empty()) throw DataError("regress_out_eog: recording has no EOG channels");
  const auto scalp = rec.scalp_indices();

  Eigen::MatrixXd e(rec.n_samples(), static_cast<Eigen::Index>(eog.size()));
  for (std::size_t j = 0; j < eog.size(); ++j) e.col(static_cast<Eigen::Index>(j)) = rec.samples.col(eog[j]);

  // Orthonormal basis of the EOG column space; rank-revealing so that silent
  // or duplicated EOG channels drop out.
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(e);
  const auto rank = qr.rank();
  if (rank == 0) return rec;
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(e.rows(), rank);

  Recording out = rec;
  for (int c : scalp) {
    const Eigen::VectorXd coef = q.transpose() * rec.samples.col(c);
    out.samples.col(c) -= q * coef;
    // Second pass removes the rounding residue left by the first projection.
    const Eigen::VectorXd again = q.transpose() * out.samples.col(c);
    out.samples.col(c) -= q * again;
  }
  return out;
}

Recording common_average_reference(const Recording& rec) {
  validate(rec);
  const auto scalp = rec.scalp_indices();
  if (scalp.size() < 2) throw DataError("common_average_reference needs at least 2 scalp channels");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(rec.n_samples());
  for (int c : scalp) mean += rec.samples.col(c);
  mean /= static_cast<double>(scalp.size());
  Recording out = rec;
  for (int c : scalp) out.samples.col(c) -= mean;
  return out;
}

Recording crop(const Recording& rec, double start_s, double end_s) {
  const auto first = std::clamp<Eigen::Index>(std::llround(start_s * rec.fs), 0, rec.n_samples());
  const auto last = std::clamp<Eigen::Index>(std::llround(end_s * rec.fs), first, rec.n_samples());
  Recording out;
  out.samples = rec.samples.middleRows(first, last - first);
  out.fs = rec.fs;
  out.channel_names = rec.channel_names;
  out.channel_roles = rec.channel_roles;
  out.subject_id = rec.subject_id;
  const double t0 = static_cast<double>(first) / rec.fs;
  const double t1 = static_cast<double>(last) / rec.fs;
  for (const auto& a : rec.annotations) {
    const double s = std::max(a.start_s, t0);
    const double e = std::min(a.end_s, t1);
    if (e > s) out.annotations.push_back({s - t0, e - t0, a.label});
  }
  return out;
}

}  // namespace eegdecode
