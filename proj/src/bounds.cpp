#include "fbl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fbl {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> sorted_copy(const SumSampleBatch& batch) {
  std::vector<double> s = batch.values;
  std::sort(s.begin(), s.end());
  return s;
}

// eps_ub on ascending samples; sums run in ascending order so the result
// depends only on the empirical measure.
EpsilonEstimate dt_epsilon_sorted(std::span<const double> s, double th) {
  const auto split = std::upper_bound(s.begin(), s.end(), th) - s.begin();
  const double n = static_cast<double>(s.size());
  double sum = static_cast<double>(split), sum2 = sum;
  for (auto i = static_cast<std::size_t>(split); i < s.size(); ++i) {
    const double v = std::exp(-(s[i] - th));
    sum += v;
    sum2 += v * v;
  }
  EpsilonEstimate e;
  e.value = sum / n;
  const double var = std::max(sum2 / n - e.value * e.value, 0.0);
  e.half_width = kZ95 * std::sqrt(var / n);
  return e;
}

}  // namespace

double dt_log_threshold_pow2(int k) {
  if (k < 1) throw DomainError("dt threshold: need M >= 2");
  return k * std::numbers::ln2 + std::log1p(-std::ldexp(1.0, -k)) -
         std::numbers::ln2;
}

EpsilonEstimate dt_epsilon_at(std::span<const double> samples,
                              double log_threshold) {
  if (samples.empty()) throw DomainError("dt_epsilon: empty batch");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  return dt_epsilon_sorted(s, log_threshold);
}

EpsilonEstimate dt_epsilon(const SumSampleBatch& batch, std::uint64_t m) {
  if (m < 2) throw DomainError("dt_epsilon: need m >= 2");
  return dt_epsilon_at(batch.values,
                       std::log(static_cast<double>(m - 1)) - std::numbers::ln2);
}

EpsilonEstimate dt_epsilon_pow2(const SumSampleBatch& batch, int k) {
  return dt_epsilon_at(batch.values, dt_log_threshold_pow2(k));
}

BoundResult dt_max_rate(const SumSampleBatch& batch, const SystemConfig& cfg,
                        double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("dt_max_rate: epsilon must lie in (0,1)");
  if (batch.values.empty()) throw DomainError("dt_max_rate: empty batch");
  const std::vector<double> s = sorted_copy(batch);
  const double slots = cfg.total_slots();

  BoundResult r;
  r.kind = BoundKind::achievability;
  r.epsilon_target = epsilon;
  r.n_samples = s.size();
  r.seed = batch.seed;
  if (static_cast<double>(s.size()) < 100.0 / epsilon)
    r.warning = "dt_max_rate: fewer than 100/epsilon samples";

  // largest k with f(k) <= epsilon, f nondecreasing in k
  auto largest = [&](auto&& f) {
    const double smax = s.back();
    int hi = std::max(2, static_cast<int>(std::ceil(
                             (smax + 2.0 * std::numbers::ln2) / std::numbers::ln2)) + 1);
    if (f(1) > epsilon) return 0;
    int lo = 1;
    while (f(hi) <= epsilon) {
      lo = hi;
      hi *= 2;
    }
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      (f(mid) <= epsilon ? lo : hi) = mid;
    }
    return lo;
  };
  auto est = [&](int k) { return dt_epsilon_sorted(s, dt_log_threshold_pow2(k)); };

  const int k_cons = largest([&](int k) { return est(k).upper(); });
  const int k_point = largest([&](int k) { return est(k).value; });
  const int k_opt = largest([&](int k) {
    const auto e = est(k);
    return e.value - e.half_width;
  });
  r.log2_m = k_cons;
  r.rate_bits_per_slot = k_cons / slots;
  r.point_estimate = k_point / slots;
  r.ci_low = r.rate_bits_per_slot;
  r.ci_high = k_opt / slots;
  return r;
}

double dkw_band(std::size_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("dkw_band: alpha");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

double metaconverse_objective(std::span<const double> sorted, double epsilon,
                              double band, double* arg) {
  const double n = static_cast<double>(sorted.size());
  double best = kInf, best_gamma = kInf;
  // gamma -> 0+ : P(S <= 0)
  {
    const auto cnt = std::upper_bound(sorted.begin(), sorted.end(), 0.0) -
                     sorted.begin();
    const double p = cnt / n - band - epsilon;
    if (p > 0.0) {
      best = -std::log(p);
      best_gamma = 0.0;
    }
  }
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    const double g = sorted[i];
    if (g <= 0.0) continue;
    const double p = (i + 1) / n - band - epsilon;
    if (p <= 0.0) continue;
    const double obj = g - std::log(p);
    if (obj < best) {
      best = obj;
      best_gamma = g;
    }
  }
  if (arg) *arg = best_gamma;
  return best;
}

BoundResult mc_rate_upper(const SumSampleBatch& batch, const SystemConfig& cfg,
                          double epsilon, double alpha) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("mc_rate_upper: epsilon must lie in (0,1)");
  if (batch.values.empty()) throw DomainError("mc_rate_upper: empty batch");
  const std::vector<double> s = sorted_copy(batch);
  const double scale = 1.0 / (cfg.total_slots() * std::numbers::ln2);

  BoundResult r;
  r.kind = BoundKind::converse;
  r.epsilon_target = epsilon;
  r.n_samples = s.size();
  r.seed = batch.seed;
  if (static_cast<double>(s.size()) * epsilon < 100.0)
    r.warning = "mc_rate_upper: N*epsilon < 100, CDF poorly resolved";

  double gamma = 0.0;
  const double corrected =
      metaconverse_objective(s, epsilon, dkw_band(s.size(), alpha), &gamma);
  const double point = metaconverse_objective(s, epsilon, 0.0);
  r.gamma = gamma;
  r.rate_bits_per_slot = corrected * scale;
  r.point_estimate = point * scale;
  r.ci_low = r.point_estimate;
  r.ci_high = r.rate_bits_per_slot;
  return r;
}

SnrSearchResult snr_search(
    const std::function<EpsilonEstimate(double)>& eps_of_snr, double epsilon,
    double snr_lo_db, double snr_hi_db, double tol_db,
    bool trivially_feasible) {
  if (!(snr_lo_db < snr_hi_db)) throw BracketError("snr_search: lo >= hi");
  SnrSearchResult out;
  if (trivially_feasible) {
    out.snr_db = snr_lo_db;
    return out;
  }
  auto probe = [&](double snr) {
    const EpsilonEstimate e = eps_of_snr(snr);
    out.probes.push_back({snr, e});
    return e.value <= epsilon;
  };
  if (!probe(snr_hi_db))
    throw BracketError("snr_search: bound misses epsilon at the upper SNR");
  if (probe(snr_lo_db))
    throw BracketError("snr_search: bound already meets epsilon at the lower SNR");
  double lo = snr_lo_db, hi = snr_hi_db;
  while (hi - lo > tol_db) {
    const double mid = 0.5 * (lo + hi);
    (probe(mid) ? hi : lo) = mid;
  }
  std::vector<SnrProbe> ps = out.probes;
  std::sort(ps.begin(), ps.end(),
            [](const SnrProbe& a, const SnrProbe& b) { return a.snr_db < b.snr_db; });
  for (std::size_t i = 1; i < ps.size(); ++i) {
    const double slack = 3.0 * (ps[i].eps.half_width + ps[i - 1].eps.half_width);
    if (ps[i].eps.value > ps[i - 1].eps.value + slack)
      throw NumericalError("snr_search: bound is not monotone in SNR near " +
                           std::to_string(ps[i].snr_db) + " dB");
  }
  out.snr_db = hi;
  return out;
}

SnrSearchResult dt_snr_search(const SystemConfig& cfg_template, int k_bits,
                              double epsilon, double snr_lo_db,
                              double snr_hi_db, std::size_t n_samples,
                              std::uint64_t seed, int threads, double tol_db) {
  BatchOptions opts;
  opts.threads = threads;
  auto eps_of = [&](double snr) {
    SystemConfig c = cfg_template;
    c.snr_db = snr;
    const SumSampleBatch b = sample_sum_batch(c, n_samples, seed, opts);
    return dt_epsilon_pow2(b, k_bits);
  };
  return snr_search(eps_of, epsilon, snr_lo_db, snr_hi_db, tol_db, k_bits <= 0);
}

SnrSearchResult dt_snr_search_rate(const SystemConfig& cfg_template,
                                   double rate_bits_per_slot, double epsilon,
                                   double snr_lo_db, double snr_hi_db,
                                   std::size_t n_samples, std::uint64_t seed,
                                   int threads) {
  const int k = static_cast<int>(
      std::lround(rate_bits_per_slot * cfg_template.total_slots()));
  return dt_snr_search(cfg_template, k, epsilon, snr_lo_db, snr_hi_db,
                       n_samples, seed, threads);
}

}  // namespace fbl
