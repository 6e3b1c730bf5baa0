#include "fbl/matrix_kernels.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "fbl/special.hpp"

namespace fbl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void finish(EigenSample& e, double gap_tol) {
  std::sort(e.lambdas.begin(), e.lambdas.end(), std::greater<>());
  for (double& l : e.lambdas) l = std::max(l, 0.0);
  const double top = e.lambdas.empty() ? 0.0 : e.lambdas.front();
  e.degenerate = false;
  for (std::size_t i = 1; i < e.lambdas.size(); ++i)
    if (e.lambdas[i - 1] - e.lambdas[i] < gap_tol * top) e.degenerate = true;
  if (!e.lambdas.empty() && e.lambdas.back() <= 0.0) e.degenerate = true;
}

// Lower-triangular Bartlett factor of CW_r(dof, I).
Eigen::MatrixXcd bartlett_factor(int dof, int r, RandomStream& stream) {
  Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    l(i, i) = std::sqrt(stream.gamma(static_cast<double>(dof - i)));
    for (int j = 0; j < i; ++j) l(i, j) = stream.complex_normal();
  }
  return l;
}

void small_hermitian_eigs(const Eigen::MatrixXcd& a, EigenSample& out) {
  const int r = static_cast<int>(a.rows());
  if (r == 1) {
    out.lambdas = {a(0, 0).real()};
    return;
  }
  if (r == 2) {
    const double p = a(0, 0).real(), c = a(1, 1).real();
    const double m = 0.5 * (p + c), d = 0.5 * (p - c);
    const double h = std::sqrt(d * d + std::norm(a(0, 1)));
    const double l1 = m + h;
    const double det = p * c - std::norm(a(0, 1));
    out.lambdas = {l1, l1 > 0.0 ? det / l1 : m - h};
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a,
                                                     Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SamplingError("Hermitian eigensolver did not converge");
  out.lambdas.assign(es.eigenvalues().data(),
                     es.eigenvalues().data() + es.eigenvalues().size());
}

}  // namespace

Eigen::MatrixXd LogMatrix::to_dense() const {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = sign_at(i, j) * std::exp(log_at(i, j));
  return m;
}

Eigen::MatrixXcd sample_gaussian_matrix(int rows, int cols,
                                        RandomStream& stream) {
  if (rows < 1 || cols < 1)
    throw DomainError("sample_gaussian_matrix: dimensions must be >= 1");
  Eigen::MatrixXcd z(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) z(i, j) = stream.complex_normal();
  return z;
}

EigenSample hermitian_eigs(const Eigen::MatrixXcd& a, double gap_tol) {
  EigenSample e;
  small_hermitian_eigs(a, e);
  finish(e, gap_tol);
  return e;
}

SigmaDraw draw_sigma_output(std::span<const double> sigma_diag, int n_rx,
                            RandomStream& stream, double gap_tol) {
  const int n = static_cast<int>(sigma_diag.size());
  const Eigen::MatrixXcd z = sample_gaussian_matrix(n, n_rx, stream);
  const Eigen::Map<const Eigen::VectorXd> s(sigma_diag.data(), n);
  const Eigen::MatrixXcd w = z.adjoint() * s.cast<std::complex<double>>().asDiagonal() * z;
  SigmaDraw d;
  d.eig = hermitian_eigs(w, gap_tol);
  d.trace_zz = z.squaredNorm();
  return d;
}

SigmaDraw draw_two_level_output(double s, int n_tx, int n_coh, int n_rx,
                                RandomStream& stream, double gap_tol) {
  Eigen::MatrixXcd z1(n_tx, n_rx);
  for (int j = 0; j < n_rx; ++j)
    for (int i = 0; i < n_tx; ++i) z1(i, j) = stream.complex_normal();
  const Eigen::MatrixXcd l = bartlett_factor(n_coh - n_tx, n_rx, stream);
  const Eigen::MatrixXcd w2 = l * l.adjoint();
  const Eigen::MatrixXcd w = s * (z1.adjoint() * z1) + w2;
  SigmaDraw d;
  d.eig = hermitian_eigs(w, gap_tol);
  d.trace_zz = z1.squaredNorm() + w2.trace().real();
  return d;
}

EigenSample sample_sigma_eigs(std::span<const double> sigma_diag,
                              const SystemConfig& cfg, RandomStream& stream) {
  if (static_cast<int>(sigma_diag.size()) != cfg.n_coh())
    throw DimensionError("sigma_diag length must equal n_coh");
  for (double v : sigma_diag)
    if (!(v > 0.0)) throw DomainError("sigma_diag entries must be positive");
  return draw_sigma_output(sigma_diag, cfg.n_rx, stream).eig;
}

EigenSample sample_wishart_eigs(int n_coh, int n_rx, RandomStream& stream,
                                double gap_tol) {
  if (n_rx < 1 || n_coh <= n_rx)
    throw DimensionError("sample_wishart_eigs: need n_coh > n_rx >= 1");
  const Eigen::MatrixXcd l = bartlett_factor(n_coh, n_rx, stream);
  return hermitian_eigs(l * l.adjoint(), gap_tol);
}

LogDet log_vandermonde(const EigenSample& lams) {
  LogDet v{0.0, 1};
  for (int i = 0; i < lams.size(); ++i)
    for (int j = i + 1; j < lams.size(); ++j) {
      const double d = lams.lambdas[i] - lams.lambdas[j];
      if (d == 0.0) return LogDet::zero();
      v.log_abs += std::log(std::abs(d));
      if (d < 0) v.sign = -v.sign;
    }
  return v;
}

LogMatrix build_matrix_M(const EigenSample& lams, double xi,
                         const SystemConfig& cfg) {
  const int t = cfg.n_tx, r = cfg.n_rx, n = cfg.n_coh(), p = cfg.p();
  if (lams.size() != r)
    throw DimensionError("build_matrix_M: expected n_rx eigenvalues");
  if (!(xi > 0.0)) throw DomainError("build_matrix_M: xi must be positive");
  const double log_xi = std::log(xi);
  LogMatrix m(p, p);
  for (int i = 1; i <= p; ++i) {
    for (int j = 1; j <= p; ++j) {
      if (i <= r && j <= t) {
        const double lam = lams.lambdas[i - 1];
        const int shape = std::max(n + j - p - t, 0);
        const double lg = log_reg_inc_gamma(shape, lam * xi);
        if (lg == kNegInf || (lam == 0.0 && t - j > 0)) {
          m.set(i - 1, j - 1, kNegInf, 0);
        } else {
          m.set(i - 1, j - 1, (t - j) * std::log(lam) + lg, 1);
        }
      } else if (i > r && j <= t) {
        const int k = n - i, l = t - j;
        if (l > k) {
          m.set(i - 1, j - 1, kNegInf, 0);
        } else {
          m.set(i - 1, j - 1, log_falling_factorial(k, l) + (k - l) * log_xi,
                1);
        }
      } else if (i <= r && j > t) {
        const double lam = lams.lambdas[i - 1];
        if (lam == 0.0) {  // n - j >= n - p > 0
          m.set(i - 1, j - 1, kNegInf, 0);
        } else {
          m.set(i - 1, j - 1, (n - j) * std::log(lam) - lam * xi, 1);
        }
      } else {
        throw DimensionError("build_matrix_M: entry (" + std::to_string(i) +
                             "," + std::to_string(j) + ") undefined");
      }
    }
  }
  return m;
}

namespace {

// Partial-pivot LU on an already scaled copy; returns log|det| and sign.
LogDet lu_log_det(std::vector<long double>& a, int n) {
  LogDet out{0.0, 1};
  for (int c = 0; c < n; ++c) {
    int piv = c;
    long double best = std::fabs(a[c * n + c]);
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(a[r * n + c]) > best) {
        best = std::fabs(a[r * n + c]);
        piv = r;
      }
    if (best == 0.0L) return LogDet::zero();
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      out.sign = -out.sign;
    }
    const long double d = a[c * n + c];
    if (d < 0) out.sign = -out.sign;
    out.log_abs += static_cast<double>(std::log(std::fabs(d)));
    for (int r = c + 1; r < n; ++r) {
      const long double f = a[r * n + c] / d;
      if (f == 0.0L) continue;
      for (int k = c + 1; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return out;
}

}  // namespace

LogDet log_abs_det(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw DimensionError("log_abs_det: matrix must be square");
  const int n = static_cast<int>(m.rows());
  if (n == 0) return {0.0, 1};
  std::vector<long double> a(static_cast<std::size_t>(n) * n);
  double log_scale = 0.0;
  for (int j = 0; j < n; ++j) {
    const double cmax = m.col(j).cwiseAbs().maxCoeff();
    if (!std::isfinite(cmax))
      throw DomainError("log_abs_det: nonfinite entry");
    if (cmax == 0.0) return LogDet::zero();
    log_scale += std::log(cmax);
    for (int i = 0; i < n; ++i) a[i * n + j] = m(i, j) / cmax;
  }
  LogDet d = lu_log_det(a, n);
  if (d.sign != 0) d.log_abs += log_scale;
  return d;
}

LogDet log_abs_det(const LogMatrix& m) {
  if (m.rows != m.cols)
    throw DimensionError("log_abs_det: matrix must be square");
  const int n = m.rows;
  if (n == 0) return {0.0, 1};
  std::vector<double> rmax(n, kNegInf), cmax(n, kNegInf);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m.sign_at(i, j) != 0) rmax[i] = std::max(rmax[i], m.log_at(i, j));
  for (int i = 0; i < n; ++i)
    if (rmax[i] == kNegInf) return LogDet::zero();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (m.sign_at(i, j) != 0)
        cmax[j] = std::max(cmax[j], m.log_at(i, j) - rmax[i]);
  double log_scale = 0.0;
  for (int k = 0; k < n; ++k) {
    if (cmax[k] == kNegInf) return LogDet::zero();
    log_scale += rmax[k] + cmax[k];
  }
  std::vector<long double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a[i * n + j] =
          m.sign_at(i, j) == 0
              ? 0.0L
              : m.sign_at(i, j) *
                    std::exp(static_cast<long double>(m.log_at(i, j) -
                                                      rmax[i] - cmax[j]));
  LogDet d = lu_log_det(a, n);
  if (d.sign != 0) d.log_abs += log_scale;
  return d;
}

double log_kernel_ratio(const EigenSample& lams, double xi,
                        const SystemConfig& cfg) {
  const int t = cfg.n_tx, r = cfg.n_rx, n = cfg.n_coh();
  if (lams.size() != r)
    throw DimensionError("log_kernel_ratio: expected n_rx eigenvalues");
  if (r == 1) {
    const double lam = lams.lambdas[0];
    const double x = lam * xi;
    if (lam > 0.0) {
      // det M = K^{-1} xi^{t(n-t)} e^{-x} Lambda^{n-1} 1F1(t; n; x)
      double log_k = std::lgamma(static_cast<double>(n));
      for (int u = 1; u <= t; ++u) log_k -= std::lgamma(static_cast<double>(u));
      return log_hyp1f1(t, n, x) - log_k + t * (n - t) * std::log(xi) -
             x + (n - 1) * std::log(lam);
    }
  }
  const LogDet v = log_vandermonde(lams);
  if (v.sign == 0) throw SamplingError("degenerate eigenvalues (tie)");
  const LogDet d = log_abs_det(build_matrix_M(lams, xi, cfg));
  if (d.sign * v.sign <= 0)
    throw SamplingError("USTM kernel ratio is not positive");
  return d.log_abs - v.log_abs;
}

}  // namespace fbl
