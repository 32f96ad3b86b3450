#pragma once

#include <vector>

#include <Eigen/Dense>

namespace eegdecode {

/// Polynomial kernel K(u, v) = (u.v + coef0)^degree, soft margin C.
struct SvmConfig {
  int degree = 2;
  double coef0 = 1.0;
  double c = 1.0;
  double tolerance = 1e-3;
  long max_iterations = 10'000'000;

  void validate() const;
};

struct TrainedClassifier {
  Eigen::MatrixXd support_vectors;  // [n_sv x d]
  Eigen::VectorXd alphas;           // in [0, C]
  Eigen::VectorXi labels;           // +1 / -1, one per support vector
  double bias = 0.0;
  int degree = 2;
  double coef0 = 1.0;
  double c = 1.0;
  long iterations = 0;
  bool converged = false;

  Eigen::Index dimension() const { return support_vectors.cols(); }
};

/// Full training-set dual solution, exposed for diagnostics.
struct DualSolution {
  Eigen::VectorXd alphas;  // one per training row
  double bias = 0.0;
  long iterations = 0;
  bool converged = false;
};

double polynomial_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                         const Eigen::Ref<const Eigen::RowVectorXd>& v, int degree, double coef0);

Eigen::MatrixXd kernel_matrix(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b,
                              int degree, double coef0);

/// SMO on the soft-margin dual with maximal-violating-pair working sets.
/// Stops when the KKT gap m(alpha) - M(alpha) falls below cfg.tolerance.
DualSolution solve_svm_dual(const Eigen::MatrixXd& kernel, const Eigen::VectorXi& y, const SvmConfig& cfg);

/// y entries must be +1 or -1 with both present.
TrainedClassifier train_ksvm(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                             const SvmConfig& cfg = {});

struct Prediction {
  Eigen::VectorXi labels;     // +1 when decision >= 0
  Eigen::VectorXd decisions;  // sum_i alpha_i y_i K(x_i, x) + b
};

Prediction predict(const TrainedClassifier& model, const Eigen::Ref<const Eigen::MatrixXd>& x);

}  // namespace eegdecode
