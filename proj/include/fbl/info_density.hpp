#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fbl/config.hpp"
#include "fbl/matrix_kernels.hpp"
#include "fbl/rng.hpp"

namespace fbl {

/// (Sigma, xi, rho) for one information-density sampler. sigma_diag has
/// n_coh positive entries.
struct InfoDensityParams {
  std::vector<double> sigma_diag;
  double xi = 0.0;
  double rho = 0.0;
};

/// Sigma = diag(rho/n_tx + 1 [n_tx times], 1 [n_coh - n_tx]),
/// xi = rho / (n_tx + rho), with rho = rb_power(cfg).
InfoDensityParams ustm_sigma_dt(const SystemConfig& cfg);
InfoDensityParams ustm_sigma_dt(const SystemConfig& cfg, double rho);

double c_sigma(const InfoDensityParams& params, const SystemConfig& cfg);

/// log psi(Lambda, xi), evaluated entirely in the log domain.
double log_psi(const EigenSample& lams, const InfoDensityParams& params,
               const SystemConfig& cfg);

/// One draw of i(Sigma, xi) = c(Sigma) - tr(Z^H Z) - log psi, from an
/// explicit Z ~ CN(0,1)^{n_coh x n_rx}. Degenerate spectra are redrawn from
/// the same stream (bounded retries).
double sample_info_density(const InfoDensityParams& params,
                           const SystemConfig& cfg, RandomStream& stream);

/// Precomputed per-configuration state for repeated information-density
/// draws. Uses the Bartlett shortcut when Sigma is two-level (the USTM
/// case) and the explicit-Z route otherwise or when `reference` is set.
class InfoDensitySampler {
public:
  InfoDensitySampler(const SystemConfig& cfg, InfoDensityParams params,
                     bool reference = false);

  /// Returns one draw; adds the number of degenerate redraws to *resamples.
  double draw(RandomStream& stream, std::size_t* resamples = nullptr) const;

  const InfoDensityParams& params() const { return params_; }
  double c() const { return c_; }

private:
  SystemConfig cfg_;
  InfoDensityParams params_;
  double c_ = 0.0;
  bool two_level_ = false;
  bool reference_ = false;
};

/// N Monte-Carlo draws of S = sum_{k=1}^{n_res} i_k, natural-log units.
struct SumSampleBatch {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t cfg_digest = 0;
  std::size_t n = 0;
  std::size_t resamples = 0;
};

struct BatchOptions {
  int threads = 0;          // 0: OpenMP default
  bool reference = false;   // serial explicit-Z route (for testing)
  double max_resample_fraction = 1e-4;
};

/// Draw i of RB k uses RandomStream(seed, i, k); the batch is identical for
/// any thread count. Throws SamplingError when the degenerate-redraw rate
/// exceeds opts.max_resample_fraction.
SumSampleBatch sample_sum_batch(const SystemConfig& cfg, std::size_t n_samples,
                                std::uint64_t seed,
                                const BatchOptions& opts = {});

/// Batches for several packet lengths from one pass: the batch for n_res = m
/// holds the prefix sums over RBs 0..m-1 and is bit-identical to
/// sample_sum_batch with cfg.n_res = m. Valid only when the per-RB law does
/// not depend on n_res (rb_power independent of n_res, i.e. downlink);
/// throws DomainError otherwise. n_res_list must be ascending.
std::vector<SumSampleBatch> sample_sum_batch_prefixes(
    const SystemConfig& cfg, const std::vector<int>& n_res_list,
    std::size_t n_samples, std::uint64_t seed, const BatchOptions& opts = {});

/// Binary cache: "FBLSUMS1", u64 cfg digest, u64 seed, u64 N, then N
/// little-endian IEEE-754 doubles.
void write_batch(const std::string& path, const SumSampleBatch& batch);
SumSampleBatch read_batch(const std::string& path,
                          std::uint64_t expected_digest);

}  // namespace fbl
