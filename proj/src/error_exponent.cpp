#include "fbl/error_exponent.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

#include "fbl/info_density.hpp"
#include "fbl/special.hpp"

namespace fbl {

namespace {

constexpr int kMaxRedraws = 16;
constexpr double kZ95 = 1.959963984540054;

double log_norm_k(int t, int r, int n) {
  const int q = std::min(t, r);
  double v = 0.0;
  for (int u = n - q + 1; u <= n; ++u) v += std::lgamma(static_cast<double>(u));
  for (int u = 1; u <= t; ++u) v -= std::lgamma(static_cast<double>(u));
  return v;
}

void check_mu(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0))
    throw DomainError("error exponent: mu must lie in [0,1]");
}

template <class F>
void parallel_indexed(std::size_t n, int threads, F&& body) {
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(n);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(fbl_exponent_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

double exponent_xi(double mu, double rho, int n_tx) {
  return rho / ((n_tx + rho) * (1.0 + mu));
}

double gallager_c(double mu, const SystemConfig& cfg, double rho) {
  check_mu(mu);
  if (!(rho > 0.0)) throw DomainError("gallager_c: rho must be positive");
  const int t = cfg.n_tx, r = cfg.n_rx, n = cfg.n_coh();
  const double xi = exponent_xi(mu, rho, t);
  return r * t * std::log1p(rho / t) +
         (1.0 + mu) * (t * (n - t) * std::log(xi) - log_norm_k(t, r, n));
}

double gallager_c(double mu, const SystemConfig& cfg) {
  return gallager_c(mu, cfg, rb_power(validate_config(cfg)));
}

double log_exponent_integrand(const EigenSample& lams, double xi,
                              const SystemConfig& cfg) {
  const int r = cfg.n_rx, n = cfg.n_coh();
  double v = log_kernel_ratio(lams, xi, cfg);
  for (double l : lams.lambdas) v += xi * l + (r - n) * std::log(l);
  return v;
}

double log_wishart_eig_density(const EigenSample& lams, int n_coh) {
  const int r = lams.size();
  const LogDet v = log_vandermonde(lams);
  if (v.sign == 0) return -std::numeric_limits<double>::infinity();
  double d = 2.0 * v.log_abs;
  for (int i = 1; i <= r; ++i) {
    const double l = lams.lambdas[i - 1];
    d += -l + (n_coh - r) * std::log(l) -
         std::lgamma(static_cast<double>(n_coh - i + 1)) -
         std::lgamma(static_cast<double>(r - i + 1));
  }
  return d;
}

ExponentSampler::ExponentSampler(const SystemConfig& cfg,
                                 std::size_t n_samples, std::uint64_t seed,
                                 const ExponentOptions& opts)
    : cfg_(validate_config(cfg)),
      opts_(opts),
      seed_(seed),
      rho_(rb_power(cfg)) {
  if (n_samples < 1) throw DomainError("ExponentSampler: need n_samples >= 1");
  const int t = cfg_.n_tx, r = cfg_.n_rx, n = cfg_.n_coh();
  draws_.resize(n_samples);
  const bool importance = opts_.estimator == ExponentEstimator::importance;
  if (importance) {
    if (!(opts_.ladder_ratio > 1.0) || !(opts_.ladder_floor > 0.0))
      throw DomainError("ExponentSampler: need ladder_ratio > 1, ladder_floor > 0");
    for (double b = rho_ / t; b >= opts_.ladder_floor; b /= opts_.ladder_ratio)
      ladder_.push_back(b);
    ladder_.push_back(0.0);
    base_.resize(n_samples);
  }
  const auto m = static_cast<double>(ladder_.size());
  const double log_k = log_norm_k(t, r, n);

  // log( q(Lambda) / f_W(Lambda) ) = log mean_m (1+b_m)^{-tr} F(Lambda, xi_m)
  auto log_mixture_ratio = [&](const EigenSample& e) {
    double acc = -std::numeric_limits<double>::infinity();
    for (double b : ladder_) {
      double term = 0.0;
      if (b > 0.0) {
        const double xi_b = b / (1.0 + b);
        term = -t * r * std::log1p(b) + log_k - t * (n - t) * std::log(xi_b) +
               log_exponent_integrand(e, xi_b, cfg_);
      }
      acc = log_add(acc, term);
    }
    return acc - std::log(m);
  };

  parallel_indexed(n_samples, opts_.threads, [&](std::size_t i) {
    RandomStream stream(seed_, i, 0);
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      EigenSample e;
      if (importance) {
        const auto pick = std::min(
            static_cast<std::size_t>(stream.uniform() * m), ladder_.size() - 1);
        const double b = ladder_[pick];
        e = b > 0.0 ? draw_two_level_output(1.0 + b, t, n, r, stream).eig
                    : sample_wishart_eigs(n, r, stream);
      } else {
        e = sample_wishart_eigs(n, r, stream);
      }
      if (e.degenerate) continue;
      if (importance) {
        try {
          base_[i] = -log_mixture_ratio(e);
        } catch (const SamplingError&) {
          continue;
        }
        if (!std::isfinite(base_[i])) continue;
      }
      draws_[i] = std::move(e);
      return;
    }
    throw SamplingError("error exponent: redraw budget exhausted");
  });
}

ExponentEval ExponentSampler::evaluate(double mu) const {
  check_mu(mu);
  if (auto it = memo_.find(mu); it != memo_.end()) return it->second;
  const double xi = exponent_xi(mu, rho_, cfg_.n_tx);
  const bool importance = opts_.estimator == ExponentEstimator::importance;
  const std::size_t count = draws_.size();
  std::vector<double> logw(count);

  parallel_indexed(count, opts_.threads, [&](std::size_t i) {
    logw[i] = (1.0 + mu) * log_exponent_integrand(draws_[i], xi, cfg_);
    if (importance) logw[i] += base_[i];
  });

  double top = -std::numeric_limits<double>::infinity();
  for (double v : logw) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw NumericalError("error exponent: nonfinite log-integrand");
    top = std::max(top, v);
  }
  if (!std::isfinite(top))
    throw NumericalError("error exponent: every weight vanished");
  double s1 = 0.0, s2 = 0.0;
  for (double v : logw) {
    const double w = std::exp(v - top);
    s1 += w;
    s2 += w * w;
  }
  const double nn = static_cast<double>(count);
  const double mean = s1 / nn;
  const double var = std::max(s2 / nn - mean * mean, 0.0);

  ExponentEval ev;
  ev.mu = mu;
  ev.c_of_mu = gallager_c(mu, cfg_, rho_);
  ev.e_of_mu = ev.c_of_mu - (top + std::log(mean));
  ev.ci_halfwidth = kZ95 * std::sqrt(var / nn) / mean;
  ev.ess = s1 * s1 / s2;
  ev.n_samples = count;
  ev.seed = seed_;
  if (ev.ess < opts_.min_ess_fraction * nn)
    throw NumericalError("error exponent: effective sample size " +
                         std::to_string(ev.ess) + " of " +
                         std::to_string(count) + " at mu=" + std::to_string(mu));
  memo_.emplace(mu, ev);
  return ev;
}

ExponentEval gallager_E(double mu, const SystemConfig& cfg,
                        std::size_t n_samples, std::uint64_t seed,
                        const ExponentOptions& opts) {
  check_mu(mu);
  return ExponentSampler(cfg, n_samples, seed, opts).evaluate(mu);
}

MuSearchResult minimize_over_mu(const ExponentSampler& s, double rate_rb_nats,
                                int grid_points) {
  if (grid_points < 3) throw DomainError("minimize_over_mu: grid too small");
  const double n_res = s.config().n_res;
  auto f = [&](double mu) {
    return -n_res * (s.evaluate(mu).e_of_mu - mu * rate_rb_nats);
  };
  std::vector<double> g(grid_points);
  for (int j = 0; j < grid_points; ++j) g[j] = f(j / (grid_points - 1.0));
  const int jbest =
      static_cast<int>(std::min_element(g.begin(), g.end()) - g.begin());

  MuSearchResult out;
  int changes = 0, prev_sign = 0;
  for (int j = 1; j < grid_points; ++j) {
    const double d = g[j] - g[j - 1];
    const int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sg == 0) continue;
    if (prev_sign != 0 && sg != prev_sign) ++changes;
    prev_sign = sg;
  }
  out.unimodal = changes <= 1;

  double lo = std::max(0, jbest - 1) / (grid_points - 1.0);
  double hi = std::min(grid_points - 1, jbest + 1) / (grid_points - 1.0);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-4) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  out.mu_star = jbest / (grid_points - 1.0);
  out.log_eps = g[jbest];
  const double xg = f1 <= f2 ? x1 : x2, fg = std::min(f1, f2);
  if (fg < out.log_eps) {
    out.mu_star = xg;
    out.log_eps = fg;
  }
  return out;
}

ExponentBound eexp_avg_error(int k_bits, const ExponentSampler& s,
                             int grid_points) {
  if (k_bits < 1) throw DomainError("eexp_avg_error: need k_bits >= 1");
  ExponentBound b;
  b.rate_rb_nats = k_bits * std::numbers::ln2 / s.config().n_res;
  const MuSearchResult m = minimize_over_mu(s, b.rate_rb_nats, grid_points);
  b.mu_star = m.mu_star;
  b.log_eps_avg = m.log_eps;
  b.eps_avg = std::min(1.0, std::exp(m.log_eps));
  b.eps_max = b.eps_avg;
  b.unimodal = m.unimodal;
  b.n_samples = s.n_samples();
  b.seed = s.seed();
  return b;
}

ExponentBound eexp_max_error(int k_bits, const ExponentSampler& s,
                             int grid_points) {
  ExponentBound b = eexp_avg_error(k_bits, s, grid_points);
  const ExponentBound doubled = eexp_avg_error(k_bits + 1, s, grid_points);
  b.eps_max = std::min(1.0, 2.0 * std::exp(doubled.log_eps_avg));
  b.unimodal = b.unimodal && doubled.unimodal;
  return b;
}

std::vector<ExponentCurvePoint> eexp_curve(const SystemConfig& cfg_template,
                                           int k_bits,
                                           const std::vector<double>& snr_db,
                                           std::size_t n_samples,
                                           std::uint64_t seed,
                                           const ExponentOptions& opts) {
  std::vector<ExponentCurvePoint> out;
  out.reserve(snr_db.size());
  for (double snr : snr_db) {
    SystemConfig c = cfg_template;
    c.snr_db = snr;
    const ExponentSampler s(c, n_samples, seed, opts);
    out.push_back({snr, eexp_max_error(k_bits, s)});
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    const bool rising = out[i].snr_db > out[i - 1].snr_db;
    const auto& hi = rising ? out[i] : out[i - 1];
    const auto& lo = rising ? out[i - 1] : out[i];
    if (hi.bound.eps_max > lo.bound.eps_max * (1.0 + 1e-9))
      throw NumericalError("error-exponent bound increases with SNR between " +
                           std::to_string(lo.snr_db) + " and " +
                           std::to_string(hi.snr_db) + " dB");
  }
  return out;
}

double curve_snr_at(const std::vector<ExponentCurvePoint>& curve,
                    double epsilon) {
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double e0 = curve[i - 1].bound.eps_max, e1 = curve[i].bound.eps_max;
    if (e0 > epsilon && e1 <= epsilon) {
      const double l0 = std::log(e0), l1 = std::log(e1), le = std::log(epsilon);
      const double f = (l0 - le) / (l0 - l1);
      return curve[i - 1].snr_db + f * (curve[i].snr_db - curve[i - 1].snr_db);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

SnrSearchResult eexp_snr_search(const SystemConfig& cfg_template, int k_bits,
                                double epsilon, double snr_lo_db,
                                double snr_hi_db, std::size_t n_samples,
                                std::uint64_t seed,
                                const ExponentOptions& opts, double tol_db) {
  auto eps_of = [&](double snr) {
    SystemConfig c = cfg_template;
    c.snr_db = snr;
    const ExponentSampler s(c, n_samples, seed, opts);
    const ExponentBound b = eexp_max_error(k_bits, s);
    // relative MC error of the exponential bound ~ n_res * CI on E(mu*)
    const double h = b.eps_max * c.n_res * s.evaluate(b.mu_star).ci_halfwidth;
    return EpsilonEstimate{b.eps_max, h};
  };
  return snr_search(eps_of, epsilon, snr_lo_db, snr_hi_db, tol_db);
}

}  // namespace fbl
