#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "eegdecode/error.hpp"
#include "eegdecode/fft.hpp"
#include "eegdecode/spectral.hpp"

namespace eegdecode {

namespace {

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1, size n-1
};

// Number of eigenvalues strictly below x (Sturm sequence via LDL^T pivots).
int count_below(const Tridiagonal& t, double x) {
  const double tiny = std::numeric_limits<double>::min();
  int count = 0;
  double q = t.diag[0] - x;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < t.diag.size(); ++i) {
    if (std::abs(q) < tiny) q = -tiny;
    q = t.diag[i] - x - t.off[i - 1] * t.off[i - 1] / q;
    if (q < 0.0) ++count;
  }
  return count;
}

// index-th smallest eigenvalue by bisection.
double eigenvalue_by_bisection(const Tridiagonal& t, int index, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(t, mid) > index) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Solves (T - shift I) y = b with partial pivoting (LAPACK gttrf/gttrs scheme).
std::vector<double> shifted_solve(const Tridiagonal& t, double shift, std::vector<double> b,
                                  double pivot_floor) {
  const std::size_t n = t.diag.size();
  std::vector<double> d(n), du(n, 0.0), du2(n, 0.0), dl(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = t.diag[i] - shift;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    du[i] = t.off[i];
    dl[i] = t.off[i];
  }
  std::vector<char> swapped(n, 0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (std::abs(d[i]) < pivot_floor) d[i] = d[i] < 0.0 ? -pivot_floor : pivot_floor;
      const double f = dl[i] / d[i];
      dl[i] = f;
      d[i + 1] -= f * du[i];
    } else {
      const double f = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = f;
      const double tmp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = tmp - f * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du[i + 1];
      }
      swapped[i] = 1;
    }
  }
  if (std::abs(d[n - 1]) < pivot_floor) d[n - 1] = d[n - 1] < 0.0 ? -pivot_floor : pivot_floor;
  // L solve
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (swapped[i]) std::swap(b[i], b[i + 1]);
    b[i + 1] -= dl[i] * b[i];
  }
  // U solve
  b[n - 1] /= d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (std::size_t ii = n - 2; ii-- > 0;) {
    b[ii] = (b[ii] - du[ii] * b[ii + 1] - du2[ii] * b[ii + 2]) / d[ii];
  }
  return b;
}

// Fraction of energy inside [-W, W]: sum over lags of autocorrelation times
// the Dirichlet-type kernel sin(2 pi W l)/(pi l).
double concentration(const Eigen::VectorXd& v, double w) {
  const auto n = static_cast<std::size_t>(v.size());
  const std::size_t nfft = next_pow2(2 * n);
  auto spec = rfft(std::span<const double>(v.data(), n), nfft);
  for (auto& c : spec) c = std::norm(c);
  const auto r = irfft(spec, nfft);
  double lambda = 2.0 * w * r[0];
  for (std::size_t l = 1; l < n; ++l) {
    lambda += 2.0 * r[l] * std::sin(2.0 * std::numbers::pi * w * static_cast<double>(l)) /
              (std::numbers::pi * static_cast<double>(l));
  }
  return lambda;
}

}  // namespace

Tapers dpss_tapers(int n, double nw, int k) {
  if (n < 8) throw ConfigError("dpss: need at least 8 samples");
  if (!(nw >= 1.0)) throw ConfigError("dpss: time-half-bandwidth must be >= 1");
  if (k < 1 || k > static_cast<int>(std::floor(2.0 * nw - 1.0 + 1e-12)) || k > n) {
    throw ConfigError("dpss: taper count must lie in [1, 2*nw - 1]");
  }
  const double w = nw / n;
  Tridiagonal t;
  t.diag.resize(static_cast<std::size_t>(n));
  t.off.resize(static_cast<std::size_t>(n - 1));
  const double c = std::cos(2.0 * std::numbers::pi * w);
  for (int i = 0; i < n; ++i) {
    const double a = (n - 1 - 2.0 * i) / 2.0;
    t.diag[static_cast<std::size_t>(i)] = a * a * c;
  }
  for (int i = 1; i < n; ++i) t.off[static_cast<std::size_t>(i - 1)] = i * (n - static_cast<double>(i)) / 2.0;

  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (int i = 0; i < n; ++i) {
    const double r = (i > 0 ? t.off[static_cast<std::size_t>(i - 1)] : 0.0) +
                     (i + 1 < n ? t.off[static_cast<std::size_t>(i)] : 0.0);
    lo = std::min(lo, t.diag[static_cast<std::size_t>(i)] - r);
    hi = std::max(hi, t.diag[static_cast<std::size_t>(i)] + r);
  }
  const double norm = std::max(std::abs(lo), std::abs(hi));

  Tapers out;
  out.tapers.resize(k, n);
  out.concentrations.resize(k);
  for (int j = 0; j < k; ++j) {
    const double lambda = eigenvalue_by_bisection(t, n - 1 - j, lo, hi);
    // Inverse iteration from a deterministic start vector.
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = 1.0 + 0.01 * std::sin(0.7 * i + j);
    Eigen::VectorXd vec;
    for (int it = 0; it < 4; ++it) {
      v = shifted_solve(t, lambda, std::move(v), norm * std::numeric_limits<double>::epsilon());
      vec = Eigen::VectorXd::Map(v.data(), n);
      for (int p = 0; p < j; ++p) vec -= out.tapers.row(p).transpose() * out.tapers.row(p).dot(vec);
      vec.normalize();
      Eigen::VectorXd::Map(v.data(), n) = vec;
    }
    if (j % 2 == 0) {
      if (vec.sum() < 0.0) vec = -vec;
    } else {
      const double thresh = std::max(1e-7, 1.0 / n);
      for (int i = 0; i < n; ++i) {
        if (vec[i] * vec[i] > thresh) {
          if (vec[i] < 0.0) vec = -vec;
          break;
        }
      }
    }
    out.tapers.row(j) = vec.transpose();
    out.concentrations[j] = std::min(1.0, concentration(vec, w));
  }
  return out;
}

}  // namespace eegdecode
