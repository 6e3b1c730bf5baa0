#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbl/config.hpp"
#include "fbl/info_density.hpp"

namespace fbl {

class BracketError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class BoundKind { achievability, converse };

struct BoundResult {
  BoundKind kind = BoundKind::achievability;
  double rate_bits_per_slot = 0.0;
  double epsilon_target = 0.0;
  // achievability: k = log2 M of the reported codebook.
  int log2_m = 0;
  // converse: minimizing threshold gamma (nats).
  double gamma = 0.0;
  // achievability: [rate at eps_hat + h, rate at eps_hat - h].
  // converse: [point estimate, confidence-corrected value].
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Rate from the bare point estimate (no CI / DKW correction).
  double point_estimate = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::string warning;
};

struct EpsilonEstimate {
  double value = 0.0;
  double half_width = 0.0;  // ~95% normal-approximation half-width

  double upper() const { return value + half_width; }
};

/// log((M-1)/2) for M = 2^k, safe for large k.
double dt_log_threshold_pow2(int k);

/// (1/N) sum_n exp(-[S_n - log_threshold]^+).
EpsilonEstimate dt_epsilon_at(std::span<const double> samples,
                              double log_threshold);

/// Dependence-testing error bound for an M-codeword codebook.
EpsilonEstimate dt_epsilon(const SumSampleBatch& batch, std::uint64_t m);
EpsilonEstimate dt_epsilon_pow2(const SumSampleBatch& batch, int k);

/// Largest k with eps_ub(2^k) <= epsilon, judged on the upper CI edge.
/// Rate is k / (n_subc n_ofdm n_res). Rate 0 if even M = 2 fails.
BoundResult dt_max_rate(const SumSampleBatch& batch, const SystemConfig& cfg,
                        double epsilon);

/// Metaconverse objective inf_gamma { gamma - log([P(S <= gamma) - band - eps]^+) }
/// over gamma > 0, evaluated at the order statistics of `sorted`. Returns
/// +inf when no gamma is admissible. *arg receives the minimizing gamma.
double metaconverse_objective(std::span<const double> sorted, double epsilon,
                              double band, double* arg = nullptr);

/// Dvoretzky-Kiefer-Wolfowitz band sqrt(log(2/alpha) / (2N)).
double dkw_band(std::size_t n, double alpha);

inline constexpr double kConverseAlpha = 1e-3;

/// Converse rate bound; the reported value uses the empirical CDF lowered by
/// the DKW band at confidence 1 - alpha. Sentinel +inf when the samples
/// cannot resolve epsilon.
BoundResult mc_rate_upper(const SumSampleBatch& batch, const SystemConfig& cfg,
                          double epsilon, double alpha = kConverseAlpha);

struct SnrProbe {
  double snr_db;
  EpsilonEstimate eps;
};

struct SnrSearchResult {
  double snr_db = 0.0;
  std::vector<SnrProbe> probes;
};

/// Bisection for the smallest SNR (dB) at which eps_of_snr(snr) <= epsilon,
/// to `tol_db`. The bound must be nonincreasing in SNR; a probe sequence
/// that contradicts this beyond its own Monte-Carlo error raises
/// NumericalError. `trivially_feasible` short-circuits to snr_lo_db.
SnrSearchResult snr_search(
    const std::function<EpsilonEstimate(double)>& eps_of_snr, double epsilon,
    double snr_lo_db, double snr_hi_db, double tol_db = 0.05,
    bool trivially_feasible = false);

/// DT-bound SNR requirement for k_bits information bits at error epsilon.
/// Every probe redraws its batch from the same seed (common random
/// numbers), so the probe curve is smooth in SNR.
SnrSearchResult dt_snr_search(const SystemConfig& cfg_template, int k_bits,
                              double epsilon, double snr_lo_db,
                              double snr_hi_db, std::size_t n_samples,
                              std::uint64_t seed, int threads = 0,
                              double tol_db = 0.05);

/// Same search driven by a target rate in bits per time-frequency slot:
/// k_bits = round(rate * n_subc * n_ofdm * n_res).
SnrSearchResult dt_snr_search_rate(const SystemConfig& cfg_template,
                                   double rate_bits_per_slot, double epsilon,
                                   double snr_lo_db, double snr_hi_db,
                                   std::size_t n_samples, std::uint64_t seed,
                                   int threads = 0);

}  // namespace fbl
