#include <cmath>
#include <limits>

#include "eegdecode/error.hpp"
#include "eegdecode/svm.hpp"

namespace eegdecode {

void SvmConfig::validate() const {
  if (degree < 1) throw ConfigError("SVM degree must be >= 1");
  if (!(c > 0.0)) throw ConfigError("SVM box constraint C must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("SVM tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("SVM max_iterations must be >= 1");
}

double polynomial_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                         const Eigen::Ref<const Eigen::RowVectorXd>& v, int degree, double coef0) {
  return std::pow(u.dot(v) + coef0, degree);
}

Eigen::MatrixXd kernel_matrix(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b,
                              int degree, double coef0) {
  Eigen::MatrixXd k = a * b.transpose();
  k.array() += coef0;
  if (degree == 2) {
    k = k.array().square().matrix();
  } else if (degree != 1) {
    k = k.array().pow(static_cast<double>(degree)).matrix();
  }
  return k;
}

DualSolution solve_svm_dual(const Eigen::MatrixXd& kernel, const Eigen::VectorXi& y, const SvmConfig& cfg) {
  cfg.validate();
  const auto n = y.size();
  if (kernel.rows() != n || kernel.cols() != n) throw DataError("SVM: kernel size does not match labels");
  const double c = cfg.c;
  constexpr double kTau = 1e-12;

  // min 0.5 a'Qa - e'a, Q_ij = y_i y_j K_ij, 0 <= a <= C, y'a = 0. grad = Qa - e.
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
  const Eigen::VectorXd yd = y.cast<double>();
  const auto in_up = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0.0); };
  const auto in_low = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] > 0.0) || (y[t] < 0 && alpha[t] < c); };

  DualSolution sol;
  long iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -yd[t] * grad[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < cfg.tolerance) {
      sol.converged = true;
      break;
    }

    const double kii = kernel(i, i);
    const double kjj = kernel(j, j);
    const double kij = kernel(i, j);
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = kii + kjj + 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = kii + kjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    // grad += Q_:i dai + Q_:j daj
    grad.array() += yd.array() * (kernel.col(i).array() * (yd[i] * dai) + kernel.col(j).array() * (yd[j] * daj));
  }
  sol.iterations = iter;

  // rho from free multipliers, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = yd[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      sum_free += yg;
      ++n_free;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  sol.bias = -rho;
  sol.alphas = alpha;
  return sol;
}

TrainedClassifier train_ksvm(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y,
                             const SvmConfig& cfg) {
  cfg.validate();
  if (x.rows() != y.size()) throw DataError("SVM: feature rows and labels differ in count");
  if (x.rows() < 2 || x.cols() < 1) throw DataError("SVM: need at least 2 samples and 1 feature");
  if (!x.allFinite()) throw DataError("SVM: non-finite features");
  bool pos = false;
  bool neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1) pos = true;
    else if (y[i] == -1) neg = true;
    else throw DataError("SVM: labels must be +1 or -1");
  }
  if (!pos || !neg) throw DataError("SVM: training data contains a single class");

  const Eigen::MatrixXd kernel = kernel_matrix(x, x, cfg.degree, cfg.coef0);
  const auto sol = solve_svm_dual(kernel, y, cfg);

  TrainedClassifier model;
  model.degree = cfg.degree;
  model.coef0 = cfg.coef0;
  model.c = cfg.c;
  model.bias = sol.bias;
  model.iterations = sol.iterations;
  model.converged = sol.converged;
  Eigen::Index n_sv = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) n_sv += sol.alphas[i] > 0.0;
  model.support_vectors.resize(n_sv, x.cols());
  model.alphas.resize(n_sv);
  model.labels.resize(n_sv);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (sol.alphas[i] > 0.0) {
      model.support_vectors.row(k) = x.row(i);
      model.alphas[k] = sol.alphas[i];
      model.labels[k] = y[i];
      ++k;
    }
  }
  if (!sol.converged) throw NumericError("SVM: SMO did not converge within the iteration limit");
  return model;
}

Prediction predict(const TrainedClassifier& model, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.cols() != model.dimension()) {
    throw DataError("SVM predict: expected " + std::to_string(model.dimension()) + " features, got " +
                    std::to_string(x.cols()));
  }
  Prediction out;
  if (model.support_vectors.rows() == 0) {
    out.decisions = Eigen::VectorXd::Constant(x.rows(), model.bias);
  } else {
    const Eigen::VectorXd coef = model.alphas.cwiseProduct(model.labels.cast<double>());
    out.decisions = kernel_matrix(x, model.support_vectors, model.degree, model.coef0) * coef;
    out.decisions.array() += model.bias;
  }
  out.labels = (out.decisions.array() >= 0.0).select(Eigen::VectorXi::Ones(x.rows()), -1);
  return out;
}

}  // namespace eegdecode
