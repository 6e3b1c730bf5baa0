#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fbl/bounds.hpp"

using namespace fbl;

namespace {

SumSampleBatch batch_of(std::vector<double> v, std::uint64_t seed = 0) {
  SumSampleBatch b;
  b.n = v.size();
  b.values = std::move(v);
  b.seed = seed;
  return b;
}

SystemConfig one_slot() {
  SystemConfig c;
  c.n_subc = 1;
  c.n_ofdm = 1;
  c.n_res = 1;
  return c;
}

// O(N^2) enumeration of the converse objective: every sample is a
// candidate threshold, the CDF is recounted from scratch.
double converse_oracle(const std::vector<double>& v, double eps, double band) {
  double best = INFINITY;
  const double n = static_cast<double>(v.size());
  std::vector<double> cands = v;
  cands.push_back(0.0);
  for (double g : cands) {
    if (g < 0.0) continue;
    double cnt = 0;
    for (double x : v) cnt += x <= g;
    const double p = cnt / n - band - eps;
    if (p > 0) best = std::min(best, g - std::log(p));
  }
  return best;
}

}  // namespace

TEST_CASE("dt_epsilon direct formula") {
  const auto b = batch_of({5.0, 15.0});
  const auto e = dt_epsilon(b, 3);
  CHECK(e.value == doctest::Approx((std::exp(-5.0) + std::exp(-15.0)) / 2).epsilon(1e-12));
  CHECK(e.value == doctest::Approx(3.369e-3).epsilon(1e-3));
  CHECK(dt_epsilon(batch_of({0.1, -4.0, 0.5}), 5).value == 1.0);
  CHECK_THROWS_AS(dt_epsilon(b, 1), DomainError);
}

TEST_CASE("dt_epsilon is nondecreasing in M and matches the power-of-two form") {
  std::vector<double> v;
  RandomStream s(1, 0, 0);
  for (int i = 0; i < 5000; ++i) v.push_back(20.0 + 5.0 * s.normal());
  const auto b = batch_of(v);
  double prev = 0.0;
  for (int k = 1; k < 40; ++k) {
    const double e = dt_epsilon_pow2(b, k).value;
    CHECK(e >= prev);
    prev = e;
    if (k < 60)
      CHECK(e == doctest::Approx(dt_epsilon(b, std::uint64_t{1} << k).value).epsilon(1e-12));
  }
}

TEST_CASE("dt_max_rate basics") {
  const SystemConfig c = one_slot();
  std::vector<double> tiny(1000, -1e6);
  CHECK(dt_max_rate(batch_of(tiny), c, 1e-3).rate_bits_per_slot == 0.0);

  std::vector<double> v;
  RandomStream s(2, 0, 0);
  for (int i = 0; i < 100000; ++i) v.push_back(30.0 + 3.0 * s.normal());
  const auto b = batch_of(v, 9);
  const auto loose = dt_max_rate(b, c, 1e-2);
  const auto tight = dt_max_rate(b, c, 1e-4);
  CHECK(loose.rate_bits_per_slot >= tight.rate_bits_per_slot);
  CHECK(loose.rate_bits_per_slot == loose.log2_m / 1.0);
  CHECK(loose.ci_low <= loose.rate_bits_per_slot);
  CHECK(loose.rate_bits_per_slot <= loose.ci_high);
  CHECK(loose.seed == 9);
  // the reported k is feasible on the conservative edge, k+1 is not
  CHECK(dt_epsilon_pow2(b, loose.log2_m).upper() <= 1e-2);
  CHECK(dt_epsilon_pow2(b, loose.log2_m + 1).upper() > 1e-2);
  CHECK(!tight.warning.empty());
  CHECK(loose.warning.empty());

  std::vector<double> shuffled = v;
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 777, shuffled.end());
  const auto again = dt_max_rate(batch_of(shuffled), c, 1e-2);
  CHECK(again.rate_bits_per_slot == loose.rate_bits_per_slot);
  CHECK(again.ci_high == loose.ci_high);
}

TEST_CASE("converse objective matches exhaustive enumeration") {
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i);
  double g = 0;
  const double got = metaconverse_objective(v, 0.05, 0.0, &g);
  CHECK(got == converse_oracle(v, 0.05, 0.0));
  CHECK(got == doctest::Approx(2.0 - std::log(0.15)));
  CHECK(g == 2.0);

  const auto r = mc_rate_upper(batch_of(v), one_slot(), 0.05);
  CHECK(r.point_estimate == doctest::Approx(got / std::numbers::ln2));

  for (int trial = 0; trial < 20; ++trial) {
    RandomStream s(5, static_cast<std::uint64_t>(trial), 0);
    std::vector<double> w;
    for (int i = 0; i < 300; ++i)
      w.push_back(std::round(4.0 + 3.0 * s.normal()));  // ties on purpose
    std::vector<double> sorted = w;
    std::sort(sorted.begin(), sorted.end());
    for (double band : {0.0, 0.05}) {
      CHECK(metaconverse_objective(sorted, 0.1, band) ==
            converse_oracle(w, 0.1, band));
    }
  }
}

TEST_CASE("converse sentinel and ordering") {
  std::vector<double> v(50, 3.0);
  const auto r = mc_rate_upper(batch_of(v), one_slot(), 0.99);
  CHECK(std::isinf(r.rate_bits_per_slot));

  std::vector<double> w;
  RandomStream s(3, 0, 0);
  for (int i = 0; i < 20000; ++i) w.push_back(25.0 + 4.0 * s.normal());
  const auto b = batch_of(w);
  for (double eps : {1e-3, 1e-2, 1.0 - 1.0 / 20000}) {
    const auto dt = dt_max_rate(b, one_slot(), eps);
    const auto mc = mc_rate_upper(b, one_slot(), eps);
    CHECK(dt.rate_bits_per_slot <= mc.rate_bits_per_slot);
    CHECK(mc.point_estimate <= mc.rate_bits_per_slot);
  }
}

TEST_CASE("DKW band") {
  CHECK(dkw_band(1000000, 1e-3) ==
        doctest::Approx(std::sqrt(std::log(2000.0) / 2e6)));
}

TEST_CASE("SNR bisection contract") {
  auto eps = [](double snr) { return EpsilonEstimate{std::exp(-snr), 0.0}; };
  const auto r = snr_search(eps, 1e-3, 0.0, 20.0);
  CHECK(r.snr_db >= -std::log(1e-3));
  CHECK(r.snr_db - (-std::log(1e-3)) <= 0.05);
  CHECK(r.probes.size() >= 2);
  // bracket shrinks: every interior probe lies within the previous bracket
  double lo = 0.0, hi = 20.0;
  for (std::size_t i = 2; i < r.probes.size(); ++i) {
    const auto& p = r.probes[i];
    CHECK(p.snr_db > lo);
    CHECK(p.snr_db < hi);
    (p.eps.value <= 1e-3 ? hi : lo) = p.snr_db;
  }
  CHECK(hi - lo <= 0.05);

  CHECK_THROWS_AS(snr_search(eps, 1e-3, 0.0, 5.0), BracketError);
  CHECK_THROWS_AS(snr_search(eps, 1e-3, 8.0, 20.0), BracketError);
  CHECK(snr_search(eps, 1e-3, 3.0, 20.0, 0.05, true).snr_db == 3.0);

  auto bumpy = [](double snr) {
    return EpsilonEstimate{snr > 11.0 && snr < 14.0 ? 0.9 : std::exp(-snr), 1e-6};
  };
  CHECK_THROWS_AS(snr_search(bumpy, 1e-6, 0.0, 20.0), NumericalError);
}

TEST_CASE("DT SNR search on sampled batches") {
  SystemConfig c;
  c.n_tx = 1;
  c.n_rx = 2;
  c.n_res = 2;
  c.link = Link::uplink;
  const auto r = dt_snr_search(c, 20, 1e-2, -5.0, 30.0, 20000, 4);
  CHECK(r.snr_db > -5.0);
  CHECK(r.snr_db < 30.0);
  CHECK(dt_snr_search(c, 0, 1e-2, -5.0, 30.0, 100, 4).snr_db == -5.0);
}
