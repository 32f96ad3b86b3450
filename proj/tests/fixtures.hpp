#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "eegdecode/rng.hpp"
#include "eegdecode/signal_io.hpp"
#include "eegdecode/svm.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("eegdecode-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Gaussian white-noise recording with the given channel names (all scalp),
/// quantized to float32 so disk round trips are exact.
inline eegdecode::Recording noise_recording(const std::vector<std::string>& names, double fs, double duration_s,
                                            std::uint64_t seed, double scale = 1e-5) {
  eegdecode::Recording rec;
  rec.fs = fs;
  rec.subject_id = "T01";
  rec.channel_names = names;
  rec.channel_roles.assign(names.size(), eegdecode::ChannelRole::Scalp);
  const auto n = static_cast<Eigen::Index>(std::llround(fs * duration_s));
  rec.samples.resize(n, static_cast<Eigen::Index>(names.size()));
  auto rng = eegdecode::make_rng(seed, "fixture-noise");
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index c = 0; c < rec.samples.cols(); ++c) {
      rec.samples(s, c) = static_cast<double>(static_cast<float>(scale * eegdecode::standard_normal(rng)));
    }
  }
  return rec;
}

inline std::vector<double> column(const eegdecode::Recording& rec, int c) {
  std::vector<double> out(static_cast<std::size_t>(rec.n_samples()));
  for (Eigen::Index s = 0; s < rec.n_samples(); ++s) out[static_cast<std::size_t>(s)] = rec.samples(s, c);
  return out;
}

inline Eigen::MatrixXd random_points(int n, int d, eegdecode::Rng& rng) {
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = eegdecode::standard_normal(rng);
  return x;
}

// Labels from a random hyperplane through the origin, with a margin gap.
inline Eigen::VectorXi separable_labels(Eigen::MatrixXd& x, eegdecode::Rng& rng) {
  Eigen::VectorXd w(x.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = eegdecode::standard_normal(rng);
  w.normalize();
  Eigen::VectorXi y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double s = x.row(i).dot(w);
    if (std::fabs(s) < 0.3) {
      x.row(i) += (0.3 - std::fabs(s) + 0.1) * (s >= 0 ? 1.0 : -1.0) * w.transpose();
      s = x.row(i).dot(w);
    }
    y(i) = s >= 0 ? 1 : -1;
  }
  if ((y.array() == 1).all() || (y.array() == -1).all()) {
    x.row(0) = -x.row(0);
    y(0) = -y(0);
  }
  return y;
}

inline Eigen::VectorXd full_decisions(const Eigen::MatrixXd& kernel, const Eigen::VectorXi& y, const eegdecode::DualSolution& sol) {
  return kernel * (sol.alphas.array() * y.cast<double>().array()).matrix() + Eigen::VectorXd::Constant(y.size(), sol.bias);
}

}  // namespace fixture
