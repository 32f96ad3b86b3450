#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "eegdecode/connectivity.hpp"
#include "eegdecode/error.hpp"

namespace eegdecode {

namespace {

// Lagged regressors [x_{t-1} ... x_{t-p}] for t = first .. n-1.
Eigen::MatrixXd lagged_design(const Eigen::MatrixXd& x, int p, Eigen::Index first) {
  const auto m = x.cols();
  const auto rows = x.rows() - first;
  Eigen::MatrixXd z(rows, m * p);
  for (int r = 1; r <= p; ++r) z.middleCols((r - 1) * m, m) = x.middleRows(first - r, rows);
  return z;
}

struct LsFit {
  Eigen::MatrixXd coef;   // [m*p x m]
  Eigen::MatrixXd resid;  // [rows x m]
};

LsFit least_squares(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  const auto k = z.cols();
  const Eigen::VectorXd diag = qr.matrixQR().diagonal().head(k).cwiseAbs();
  if (k == 0 || diag.minCoeff() <= 1e-10 * diag.maxCoeff() || !std::isfinite(diag.maxCoeff())) {
    throw NumericError("MVAR: regressor matrix is rank deficient");
  }
  LsFit fit;
  fit.coef = qr.solve(y);
  fit.resid = y - z * fit.coef;
  return fit;
}

void check_data(const Eigen::Ref<const Eigen::MatrixXd>& data, int order, int needed_order) {
  if (order < 1) throw ConfigError("MVAR order must be >= 1");
  const auto n = data.rows();
  const auto m = data.cols();
  if (m < 1) throw DataError("MVAR: no channels");
  if (n <= m * needed_order + 1) {
    throw DataError("MVAR: " + std::to_string(n) + " samples is too few for order " +
                    std::to_string(needed_order) + " with " + std::to_string(m) + " channels");
  }
  if (!data.allFinite()) throw DataError("MVAR: non-finite data");
}

}  // namespace

double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& coefficients) {
  const auto p = static_cast<Eigen::Index>(coefficients.size());
  if (p == 0) return 0.0;
  const auto m = coefficients.front().rows();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m * p, m * p);
  for (Eigen::Index r = 0; r < p; ++r) c.block(0, r * m, m, m) = coefficients[static_cast<std::size_t>(r)];
  if (p > 1) c.block(m, 0, m * (p - 1), m * (p - 1)).setIdentity();
  const Eigen::EigenSolver<Eigen::MatrixXd> es(c, false);
  if (es.info() != Eigen::Success) throw NumericError("MVAR: companion eigenvalues did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

MvarModel fit_mvar(const Eigen::Ref<const Eigen::MatrixXd>& data, int order, double fs) {
  check_data(data, order, order);
  const auto m = data.cols();
  const Eigen::MatrixXd x = data.rowwise() - data.colwise().mean();
  const Eigen::MatrixXd z = lagged_design(x, order, order);
  const Eigen::MatrixXd y = x.bottomRows(x.rows() - order);
  const auto fit = least_squares(z, y);

  MvarModel model;
  model.order = order;
  model.fs = fs;
  for (int r = 0; r < order; ++r) {
    model.coefficients.push_back(fit.coef.middleRows(r * m, m).transpose());
  }
  const double dof = static_cast<double>(x.rows() - order - m * order);
  model.noise_cov = (fit.resid.transpose() * fit.resid) / dof;
  model.noise_cov = 0.5 * (model.noise_cov + model.noise_cov.transpose()).eval();
  model.spectral_radius = companion_spectral_radius(model.coefficients);
  model.stable = model.spectral_radius < 1.0;
  return model;
}

OrderSelection select_order_sbc(const Eigen::Ref<const Eigen::MatrixXd>& data, int p_max) {
  check_data(data, p_max, p_max);
  const auto m = static_cast<double>(data.cols());
  const Eigen::MatrixXd x = data.rowwise() - data.colwise().mean();
  const Eigen::MatrixXd y = x.bottomRows(x.rows() - p_max);
  const double n_eff = static_cast<double>(y.rows());
  const Eigen::MatrixXd z_full = lagged_design(x, p_max, p_max);

  OrderSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= p_max; ++p) {
    const auto fit = least_squares(z_full.leftCols(static_cast<Eigen::Index>(p * m)), y);
    const Eigen::MatrixXd sigma = (fit.resid.transpose() * fit.resid) / n_eff;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
    const double logdet = ldlt.vectorD().array().log().sum();
    if (!std::isfinite(logdet)) throw NumericError("SBC: singular residual covariance");
    const double sbc = logdet + p * m * m * std::log(n_eff) / n_eff;
    sel.sbc.push_back(sbc);
    if (sbc < best) {
      best = sbc;
      sel.order = p;
    }
  }
  return sel;
}

}  // namespace eegdecode
