#include "fbl/info_density.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>

namespace fbl {

namespace {

constexpr int kMaxRedraws = 16;

bool is_two_level(const InfoDensityParams& p, int n_tx) {
  const auto& s = p.sigma_diag;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double want = static_cast<int>(i) < n_tx ? s[0] : 1.0;
    if (s[i] != want) return false;
  }
  return true;
}

}  // namespace

InfoDensityParams ustm_sigma_dt(const SystemConfig& cfg, double rho) {
  validate_config(cfg);
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw DomainError("ustm_sigma_dt: rho must be positive (xi > 0)");
  InfoDensityParams p;
  p.rho = rho;
  p.xi = rho / (cfg.n_tx + rho);
  p.sigma_diag.assign(cfg.n_coh(), 1.0);
  std::fill_n(p.sigma_diag.begin(), cfg.n_tx, rho / cfg.n_tx + 1.0);
  return p;
}

InfoDensityParams ustm_sigma_dt(const SystemConfig& cfg) {
  return ustm_sigma_dt(cfg, rb_power(cfg));
}

double c_sigma(const InfoDensityParams& params, const SystemConfig& cfg) {
  const int t = cfg.n_tx, r = cfg.n_rx, n = cfg.n_coh(), q = cfg.q();
  const double rho = params.rho;
  if (!(rho > 0.0)) throw DomainError("c_sigma: rho must be positive");
  if (static_cast<int>(params.sigma_diag.size()) != n)
    throw DimensionError("c_sigma: sigma_diag length must equal n_coh");
  double log_det_sigma = 0.0;
  for (double s : params.sigma_diag) log_det_sigma += std::log(s);
  double c = t * (n - t) * std::log(rho / t) - r * log_det_sigma -
             t * (n - t - r) * std::log1p(rho / t);
  for (int u = 1; u <= t; ++u) c += std::lgamma(static_cast<double>(u));
  for (int u = n - q + 1; u <= n; ++u) c -= std::lgamma(static_cast<double>(u));
  return c;
}

double log_psi(const EigenSample& lams, const InfoDensityParams& params,
               const SystemConfig& cfg) {
  if (lams.degenerate) throw SamplingError("log_psi: degenerate sample");
  const int t = cfg.n_tx, r = cfg.n_rx, n = cfg.n_coh();
  double acc = log_kernel_ratio(lams, params.xi, cfg);
  const double decay = 1.0 / (1.0 + params.rho / t);
  for (double l : lams.lambdas) acc += -l * decay - (n - r) * std::log(l);
  return acc;
}

InfoDensitySampler::InfoDensitySampler(const SystemConfig& cfg,
                                       InfoDensityParams params,
                                       bool reference)
    : cfg_(validate_config(cfg)),
      params_(std::move(params)),
      c_(c_sigma(params_, cfg_)),
      two_level_(is_two_level(params_, cfg.n_tx)),
      reference_(reference) {
  if (!(params_.xi > 0.0)) throw DomainError("xi must be positive");
}

double InfoDensitySampler::draw(RandomStream& stream,
                                std::size_t* resamples) const {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const SigmaDraw d =
        (two_level_ && !reference_)
            ? draw_two_level_output(params_.sigma_diag[0], cfg_.n_tx,
                                    cfg_.n_coh(), cfg_.n_rx, stream)
            : draw_sigma_output(params_.sigma_diag, cfg_.n_rx, stream);
    if (!d.eig.degenerate) {
      try {
        const double v = c_ - d.trace_zz - log_psi(d.eig, params_, cfg_);
        if (std::isfinite(v)) return v;
      } catch (const SamplingError&) {
      }
    }
    if (resamples) ++*resamples;
  }
  throw SamplingError("information density: redraw budget exhausted");
}

double sample_info_density(const InfoDensityParams& params,
                           const SystemConfig& cfg, RandomStream& stream) {
  return InfoDensitySampler(cfg, params, true).draw(stream);
}

SumSampleBatch sample_sum_batch(const SystemConfig& cfg, std::size_t n_samples,
                                std::uint64_t seed, const BatchOptions& opts) {
  validate_config(cfg);
  if (n_samples < 1) throw DomainError("sample_sum_batch: need n_samples >= 1");
  const InfoDensitySampler sampler(cfg, ustm_sigma_dt(cfg), opts.reference);

  SumSampleBatch batch;
  batch.seed = seed;
  batch.cfg_digest = config_digest(cfg);
  batch.n = n_samples;
  batch.values.resize(n_samples);
  const auto n = static_cast<std::int64_t>(n_samples);
  const int n_res = cfg.n_res;
  std::size_t resamples = 0;
  std::exception_ptr failure;

  auto one = [&](std::int64_t i, std::size_t* redraws) {
    double s = 0.0;
    for (int k = 0; k < n_res; ++k) {
      RandomStream stream(seed, static_cast<std::uint64_t>(i),
                          static_cast<std::uint32_t>(k));
      s += sampler.draw(stream, redraws);
    }
    batch.values[static_cast<std::size_t>(i)] = s;
  };

  if (opts.reference) {
    for (std::int64_t i = 0; i < n; ++i) one(i, &resamples);
  } else {
    const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel num_threads(threads) reduction(+ : resamples)
    {
      std::size_t local = 0;
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < n; ++i) {
        try {
          one(i, &local);
        } catch (...) {
#pragma omp critical(fbl_batch_failure)
          if (!failure) failure = std::current_exception();
        }
      }
      resamples += local;
    }
  }
  if (failure) std::rethrow_exception(failure);
  batch.resamples = resamples;
  const double draws = static_cast<double>(n_samples) * n_res;
  if (resamples > opts.max_resample_fraction * draws)
    throw SamplingError("degenerate-redraw rate " +
                        std::to_string(resamples / draws) +
                        " exceeds the configured threshold");
  return batch;
}

namespace {

constexpr char kMagic[8] = {'F', 'B', 'L', 'S', 'U', 'M', 'S', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw std::runtime_error("batch cache: truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

std::vector<SumSampleBatch> sample_sum_batch_prefixes(
    const SystemConfig& cfg, const std::vector<int>& n_res_list,
    std::size_t n_samples, std::uint64_t seed, const BatchOptions& opts) {
  if (n_res_list.empty()) return {};
  if (n_samples < 1) throw DomainError("sample_sum_batch_prefixes: need n_samples >= 1");
  if (!std::is_sorted(n_res_list.begin(), n_res_list.end()) || n_res_list.front() < 1 ||
      std::adjacent_find(n_res_list.begin(), n_res_list.end()) != n_res_list.end())
    throw DomainError("sample_sum_batch_prefixes: n_res list must be strictly ascending and positive");
  const int max_res = n_res_list.back();
  SystemConfig c = cfg;
  c.n_res = max_res;
  validate_config(c);
  const double rho = rb_power(c);
  for (int m : n_res_list) {
    SystemConfig cm = cfg;
    cm.n_res = m;
    if (rb_power(cm) != rho)
      throw DomainError("sample_sum_batch_prefixes: per-RB power depends on n_res");
  }
  const InfoDensitySampler sampler(c, ustm_sigma_dt(c), opts.reference);
  const std::size_t outs = n_res_list.size();
  std::vector<SumSampleBatch> out(outs);
  for (std::size_t j = 0; j < outs; ++j) {
    SystemConfig cm = cfg;
    cm.n_res = n_res_list[j];
    out[j].seed = seed;
    out[j].cfg_digest = config_digest(cm);
    out[j].n = n_samples;
    out[j].values.resize(n_samples);
  }
  // redraw counts per RB index, summed into prefixes afterwards
  std::vector<std::size_t> redraws(max_res, 0);
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(n_samples);
  auto one = [&](std::int64_t i, std::vector<std::size_t>& rd) {
    double s = 0.0;
    std::size_t j = 0;
    for (int k = 0; k < max_res; ++k) {
      RandomStream stream(seed, static_cast<std::uint64_t>(i), static_cast<std::uint32_t>(k));
      s += sampler.draw(stream, &rd[k]);
      if (k + 1 == n_res_list[j]) out[j++].values[static_cast<std::size_t>(i)] = s;
    }
  };
  if (opts.reference) {
    for (std::int64_t i = 0; i < n; ++i) one(i, redraws);
  } else {
    const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
    {
      std::vector<std::size_t> local(max_res, 0);
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < n; ++i) {
        try {
          one(i, local);
        } catch (...) {
#pragma omp critical(fbl_batch_failure)
          if (!failure) failure = std::current_exception();
        }
      }
#pragma omp critical(fbl_batch_redraws)
      for (int k = 0; k < max_res; ++k) redraws[k] += local[k];
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::size_t acc = 0;
  std::size_t j = 0;
  for (int k = 0; k < max_res; ++k) {
    acc += redraws[k];
    if (k + 1 == n_res_list[j]) {
      out[j].resamples = acc;
      const double draws = static_cast<double>(n_samples) * n_res_list[j];
      if (acc > opts.max_resample_fraction * draws)
        throw SamplingError("degenerate-redraw rate " + std::to_string(acc / draws) +
                            " exceeds the configured threshold");
      ++j;
    }
  }
  return out;
}

void write_batch(const std::string& path, const SumSampleBatch& batch) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write batch cache '" + path + "'");
  f.write(kMagic, 8);
  put_u64(f, batch.cfg_digest);
  put_u64(f, batch.seed);
  put_u64(f, batch.values.size());
  for (double v : batch.values) put_u64(f, std::bit_cast<std::uint64_t>(v));
  if (!f) throw std::runtime_error("short write on batch cache '" + path + "'");
}

SumSampleBatch read_batch(const std::string& path,
                          std::uint64_t expected_digest) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open batch cache '" + path + "'");
  char magic[8];
  if (!f.read(magic, 8) || !std::equal(magic, magic + 8, kMagic))
    throw std::runtime_error("batch cache: bad magic in '" + path + "'");
  SumSampleBatch b;
  b.cfg_digest = get_u64(f);
  if (b.cfg_digest != expected_digest)
    throw std::runtime_error("batch cache: configuration digest mismatch");
  b.seed = get_u64(f);
  b.n = get_u64(f);
  b.values.resize(b.n);
  for (auto& v : b.values) {
    v = std::bit_cast<double>(get_u64(f));
    if (!std::isfinite(v))
      throw std::runtime_error("batch cache: nonfinite sample");
  }
  return b;
}

}  // namespace fbl
