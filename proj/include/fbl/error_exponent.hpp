#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fbl/bounds.hpp"
#include "fbl/config.hpp"
#include "fbl/matrix_kernels.hpp"

namespace fbl {

/// xi(mu) = rho / ((n_tx + rho)(1 + mu)).
double exponent_xi(double mu, double rho, int n_tx);

/// c(mu) in nats, as a sum of log terms. rho defaults to rb_power(cfg).
double gallager_c(double mu, const SystemConfig& cfg);
double gallager_c(double mu, const SystemConfig& cfg, double rho);

/// log of prod e^{xi Lambda_i} Lambda_i^{n_rx - n_coh} det M(Lambda, xi) / V(Lambda).
double log_exponent_integrand(const EigenSample& lams, double xi,
                              const SystemConfig& cfg);

/// Log-density of the ordered eigenvalues of Z^H Z, Z ~ CN(0,1)^{n_coh x n_rx}.
double log_wishart_eig_density(const EigenSample& lams, int n_coh);

enum class ExponentEstimator {
  // Lambda drawn from an equal-weight mixture of USTM output eigenvalue laws
  // at per-antenna SNRs b = rho/n_tx, rho/(n_tx r), rho/(n_tx r^2), ... down
  // to ladder_floor, plus b = 0 (the Wishart law itself). Weights are
  // bounded for every mu in [0,1].
  importance,
  // Lambda drawn from the Wishart law directly. Finite variance only when
  // rho / n_tx < 1.
  wishart,
};

struct ExponentOptions {
  ExponentEstimator estimator = ExponentEstimator::importance;
  double ladder_ratio = 2.0;
  double ladder_floor = 0.05;
  int threads = 0;
  // Effective sample size below this fraction of N is an instability error.
  double min_ess_fraction = 1e-4;
};

struct ExponentEval {
  double mu = 0.0;
  double e_of_mu = 0.0;  // nats per RB
  double c_of_mu = 0.0;
  double ci_halfwidth = 0.0;
  double ess = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Holds one set of eigenvalue draws and evaluates E(mu) on it for any mu
/// (common random numbers across mu). Draw i uses RandomStream(seed, i, 0).
class ExponentSampler {
public:
  ExponentSampler(const SystemConfig& cfg, std::size_t n_samples,
                  std::uint64_t seed, const ExponentOptions& opts = {});

  /// Results are memoized per mu; not safe for concurrent calls.
  ExponentEval evaluate(double mu) const;

  const SystemConfig& config() const { return cfg_; }
  double rho() const { return rho_; }
  /// Per-antenna SNRs of the proposal mixture (empty for the Wishart route).
  const std::vector<double>& ladder() const { return ladder_; }
  std::size_t n_samples() const { return draws_.size(); }
  std::uint64_t seed() const { return seed_; }

private:
  SystemConfig cfg_;
  ExponentOptions opts_;
  std::uint64_t seed_;
  double rho_;
  std::vector<EigenSample> draws_;
  // importance route: -log(q(Lambda) / f_W(Lambda)) per draw
  std::vector<double> base_;
  std::vector<double> ladder_;
  mutable std::map<double, ExponentEval> memo_;
};

/// Throws NumericalError when the weights collapse onto a few samples.
ExponentEval gallager_E(double mu, const SystemConfig& cfg,
                        std::size_t n_samples, std::uint64_t seed,
                        const ExponentOptions& opts = {});

struct ExponentBound {
  double rate_rb_nats = 0.0;  // k_bits log 2 / n_res
  double eps_avg = 1.0;
  double eps_max = 1.0;
  double mu_star = 0.0;
  double log_eps_avg = 0.0;
  bool unimodal = true;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

inline constexpr int kMuGridPoints = 41;

struct MuSearchResult {
  double mu_star = 0.0;
  double log_eps = 0.0;  // unclipped
  bool unimodal = true;
};

/// min over mu in [0,1] of -n_res (E(mu) - mu R): uniform grid, then
/// golden-section refinement to 1e-4 around the grid argmin.
MuSearchResult minimize_over_mu(const ExponentSampler& s, double rate_rb_nats,
                                int grid_points = kMuGridPoints);

/// Average-error bound exp(-n_res (E(mu) - mu R)), clipped to <= 1.
ExponentBound eexp_avg_error(int k_bits, const ExponentSampler& s,
                             int grid_points = kMuGridPoints);

/// Maximum-error bound from the doubled codebook: 2 eps_avg(k_bits + 1).
/// eps_avg of the returned bound is the k_bits value.
ExponentBound eexp_max_error(int k_bits, const ExponentSampler& s,
                             int grid_points = kMuGridPoints);

struct ExponentCurvePoint {
  double snr_db = 0.0;
  ExponentBound bound;
};

/// eps_avg / eps_max over an SNR grid; a fresh sampler (same seed) per
/// point. Throws NumericalError when eps_max is not nonincreasing in SNR.
std::vector<ExponentCurvePoint> eexp_curve(const SystemConfig& cfg_template,
                                           int k_bits,
                                           const std::vector<double>& snr_db,
                                           std::size_t n_samples,
                                           std::uint64_t seed,
                                           const ExponentOptions& opts = {});

/// SNR at which the curve's eps_max crosses epsilon, by linear
/// interpolation of log eps in dB. NaN when the curve never crosses.
double curve_snr_at(const std::vector<ExponentCurvePoint>& curve,
                    double epsilon);

/// Bisection on the maximum-error bound, same contract as snr_search.
SnrSearchResult eexp_snr_search(const SystemConfig& cfg_template, int k_bits,
                                double epsilon, double snr_lo_db,
                                double snr_hi_db, std::size_t n_samples,
                                std::uint64_t seed,
                                const ExponentOptions& opts = {},
                                double tol_db = 0.05);

}  // namespace fbl
