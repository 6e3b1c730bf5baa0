#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "fbl/config.hpp"
#include "fbl/rng.hpp"

namespace fbl {

/// Retryable failure of a random draw (eigensolver trouble, degenerate
/// spectrum past the retry budget).
class SamplingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Relative eigenvalue gap below which a sample is flagged as degenerate.
inline constexpr double kDefaultGapTolerance = 1e-10;

/// Ordered eigenvalues Lambda_1 >= ... >= Lambda_nrx >= 0.
struct EigenSample {
  std::vector<double> lambdas;
  bool degenerate = false;

  int size() const { return static_cast<int>(lambdas.size()); }
};

/// log|x| with a sign; sign 0 stands for an exact zero (log_abs = -inf).
struct LogDet {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;

  static LogDet zero() { return {}; }
};

/// Dense matrix stored entrywise as (log|a_ij|, sign). Lets the USTM kernel
/// matrix be assembled even when its raw entries over/underflow a double.
struct LogMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> log_abs;
  std::vector<signed char> sign;

  LogMatrix() = default;
  LogMatrix(int r, int c)
      : rows(r),
        cols(c),
        log_abs(static_cast<std::size_t>(r) * c,
                -std::numeric_limits<double>::infinity()),
        sign(static_cast<std::size_t>(r) * c, 0) {}

  void set(int i, int j, double log_value, int s) {
    const auto k = static_cast<std::size_t>(i) * cols + j;
    log_abs[k] = s == 0 ? -std::numeric_limits<double>::infinity() : log_value;
    sign[k] = static_cast<signed char>(s);
  }
  double log_at(int i, int j) const {
    return log_abs[static_cast<std::size_t>(i) * cols + j];
  }
  int sign_at(int i, int j) const {
    return sign[static_cast<std::size_t>(i) * cols + j];
  }
  /// Plain double copy; entries beyond double range become 0 or +-inf.
  Eigen::MatrixXd to_dense() const;
};

/// Draw output of Z^H Sigma Z: ordered eigenvalues plus tr(Z^H Z) of the
/// same Z (the information density needs both).
struct SigmaDraw {
  EigenSample eig;
  double trace_zz = 0.0;
};

Eigen::MatrixXcd sample_gaussian_matrix(int rows, int cols,
                                        RandomStream& stream);

/// Eigenvalues (descending) of a Hermitian matrix; flags small gaps.
EigenSample hermitian_eigs(const Eigen::MatrixXcd& a,
                           double gap_tol = kDefaultGapTolerance);

/// Reference route: builds Z (n_coh x n_rx) explicitly and diagonalizes
/// Z^H Sigma Z.
SigmaDraw draw_sigma_output(std::span<const double> sigma_diag, int n_rx,
                            RandomStream& stream,
                            double gap_tol = kDefaultGapTolerance);

/// Fast route for the two-level Sigma = diag(s,...,s [n_tx], 1,...,1):
/// Z^H Sigma Z = s Z1^H Z1 + W2 with W2 ~ CW_{n_rx}(n_coh - n_tx, I) drawn
/// by Bartlett decomposition. Same law as draw_sigma_output, far fewer
/// variates per draw.
SigmaDraw draw_two_level_output(double s, int n_tx, int n_coh, int n_rx,
                                RandomStream& stream,
                                double gap_tol = kDefaultGapTolerance);

EigenSample sample_sigma_eigs(std::span<const double> sigma_diag,
                              const SystemConfig& cfg, RandomStream& stream);

/// Eigenvalues of Z^H Z, Z ~ CN(0,1)^{n_coh x n_rx} (central complex
/// Wishart). Uses the Bartlett factor, so only n_rx(n_rx+1)/2 variates.
EigenSample sample_wishart_eigs(int n_coh, int n_rx, RandomStream& stream,
                                double gap_tol = kDefaultGapTolerance);

/// log of prod_{i<j} (Lambda_i - Lambda_j).
LogDet log_vandermonde(const EigenSample& lams);

/// The p x p USTM kernel matrix M(Lambda, xi), p = max(n_tx, n_rx):
///   rows i <= n_rx, cols j <= n_tx : Lambda_i^{n_tx-j} P([n_coh+j-p-n_tx]^+, Lambda_i xi)
///   rows i >  n_rx, cols j <= n_tx : (n_coh-i)!/(n_coh-i-n_tx+j)! xi^{n_coh-i-n_tx+j}
///   rows i <= n_rx, cols j >  n_tx : Lambda_i^{n_coh-j} exp(-Lambda_i xi)
/// (1-based indices; the middle block is zero where the falling factorial
/// vanishes).
LogMatrix build_matrix_M(const EigenSample& lams, double xi,
                         const SystemConfig& cfg);

LogDet log_abs_det(const Eigen::MatrixXd& m);
LogDet log_abs_det(const LogMatrix& m);

/// log( det M(Lambda, xi) / V(Lambda) ). For n_rx = 1 the value comes from
/// the equivalent 1F1(n_tx; n_coh; Lambda xi) form, since the determinant
/// expansion loses precision to cancellation once n_tx grows. Throws SamplingError for a
/// degenerate spectrum or a nonpositive ratio.
double log_kernel_ratio(const EigenSample& lams, double xi,
                        const SystemConfig& cfg);

}  // namespace fbl
