#include "doctest.h"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fbl/error_exponent.hpp"

using namespace fbl;

namespace {

SystemConfig dl(int t, int n_res, double snr_db) {
  SystemConfig c;
  c.n_tx = t;
  c.n_rx = 1;
  c.n_subc = 21;
  c.n_ofdm = 2;
  c.n_res = n_res;
  c.link = Link::downlink;
  c.snr_db = snr_db;
  return c;
}

// 1x1: Lambda = |z|^2 ~ Gamma(n, 1) and the kernel is
// 1F1(1; n; x) = Gamma(n) x^{1-n} e^x P(n-1, x), so E_Lambda[h_mu] is a
// one-dimensional integral.
double e_of_mu_quadrature(const SystemConfig& c, double mu) {
  const int n = c.n_coh();
  const double rho = rb_power(c);
  const double xi = rho / ((1.0 + rho) * (1.0 + mu));
  const double lg = std::lgamma(static_cast<double>(n));
  auto integrand = [&](double l) {
    if (l <= 0.0) return 0.0;
    const double log_pdf = (n - 1) * std::log(l) - l - lg;
    const double x = xi * l;
    const double log_f = lg + (1 - n) * std::log(x) + x +
                         std::log(boost::math::gamma_p(double(n - 1), x));
    const double log_h = log_f + (n - 1) * std::log(xi) - lg;
    return std::exp(log_pdf + (1.0 + mu) * log_h);
  };
  boost::math::quadrature::exp_sinh<double> q;
  const double integral = q.integrate(integrand);
  const double c_mu = std::log1p(rho) + (1.0 + mu) * ((n - 1) * std::log(xi) - lg);
  return c_mu - std::log(integral);
}

}  // namespace

TEST_CASE("xi reduces to rho/((1+rho)(1+mu)) for one antenna") {
  CHECK(exponent_xi(0.5, 10.0, 1) == doctest::Approx(10.0 / (11.0 * 1.5)));
  CHECK(exponent_xi(0.0, 100.0, 4) == doctest::Approx(100.0 / 104.0));
}

TEST_CASE("gallager_c term by term") {
  SystemConfig c = dl(4, 1, 0.0);
  const int n = c.n_coh();
  REQUIRE(n == 42);
  const double rho = 100.0, mu = 0.5;
  const double xi = 100.0 / (104.0 * 1.5);
  // K = Gamma(42) / (Gamma(1) Gamma(2) Gamma(3) Gamma(4)) = 41! / 12
  const double log_k = std::lgamma(42.0) - std::log(12.0);
  const double expect = 4.0 * std::log(26.0) + 1.5 * (4 * 38 * std::log(xi) - log_k);
  CHECK(gallager_c(mu, c, rho) == doctest::Approx(expect).epsilon(1e-12));
  // continuous in mu
  CHECK(gallager_c(mu + 1e-9, c, rho) == doctest::Approx(expect).epsilon(1e-6));
  CHECK_THROWS_AS(gallager_c(1.5, c, rho), DomainError);
  CHECK_THROWS_AS(gallager_c(0.5, c, -1.0), DomainError);
}

TEST_CASE("Wishart eigenvalue density integrates to one for a single eigenvalue") {
  // r = 1: Gamma(n, 1) density
  EigenSample e;
  e.lambdas = {3.7};
  const double want = 11 * std::log(3.7) - 3.7 - std::lgamma(12.0);
  CHECK(log_wishart_eig_density(e, 12) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("E(mu) for 1x1 matches the one-dimensional quadrature") {
  SystemConfig c;
  c.n_subc = 6;
  c.n_ofdm = 2;
  c.n_res = 1;
  c.snr_db = 5.0;
  const ExponentSampler s(c, 100000, 7);
  for (double mu : {0.0, 0.3, 0.7, 1.0}) {
    const ExponentEval ev = s.evaluate(mu);
    const double exact = e_of_mu_quadrature(c, mu);
    CAPTURE(mu);
    CHECK(std::abs(ev.e_of_mu - exact) <= 4.0 * ev.ci_halfwidth + 1e-9);
  }
  CHECK(std::abs(e_of_mu_quadrature(c, 0.0)) < 1e-8);
}

TEST_CASE("E(0) vanishes within Monte-Carlo error") {
  for (int t : {1, 4}) {
    const SystemConfig c = dl(t, 4, 10.0 * std::log10(10.0 / 42.0) + (t == 4 ? 15.0 : 0.0));
    const ExponentEval ev = gallager_E(0.0, c, 20000, 3);
    CAPTURE(t);
    CHECK(std::abs(ev.e_of_mu) <= 3.0 * ev.ci_halfwidth);
    CHECK(ev.ess > 0.05 * 20000);
  }
}

TEST_CASE("Wishart and importance estimators agree at low SNR") {
  const SystemConfig c = dl(2, 4, -20.0);
  ExponentOptions w;
  w.estimator = ExponentEstimator::wishart;
  const ExponentSampler a(c, 20000, 11), b(c, 20000, 11, w);
  CHECK(b.ladder().empty());
  for (double mu : {0.0, 0.5, 1.0}) {
    const auto ea = a.evaluate(mu), eb = b.evaluate(mu);
    CAPTURE(mu);
    CHECK(std::abs(ea.e_of_mu - eb.e_of_mu) <=
          3.0 * (ea.ci_halfwidth + eb.ci_halfwidth) + 1e-12);
  }
}

TEST_CASE("E(mu) is nondecreasing in mu on common draws") {
  const ExponentSampler s(dl(4, 12, 8.0), 20000, 5);
  double prev = -std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 20; ++j) {
    const double e = s.evaluate(j / 20.0).e_of_mu;
    CHECK(e >= prev - 1e-12);
    prev = e;
  }
}

TEST_CASE("exponent sampler is thread-count invariant") {
  ExponentOptions one, many;
  one.threads = 1;
  many.threads = 8;
  const SystemConfig c = dl(8, 4, 6.0);
  const ExponentSampler a(c, 3000, 21, one), b(c, 3000, 21, many);
  for (double mu : {0.0, 0.4, 1.0})
    CHECK(a.evaluate(mu).e_of_mu == b.evaluate(mu).e_of_mu);
}

TEST_CASE("error bounds: clipping, doubling, monotone in k") {
  const ExponentSampler s(dl(4, 4, 6.0), 5000, 9);
  const ExponentBound b = eexp_max_error(130, s);
  CHECK(b.eps_max >= b.eps_avg);
  CHECK(b.eps_avg <= 1.0);
  CHECK(b.rate_rb_nats == doctest::Approx(130 * std::numbers::ln2 / 4));
  CHECK(b.mu_star >= 0.0);
  CHECK(b.mu_star <= 1.0);
  const ExponentBound more = eexp_avg_error(140, s);
  CHECK(more.log_eps_avg >= b.log_eps_avg);
  // rate far above capacity: the minimum sits at mu = 0, where the bound is
  // exp(-n_res E(0)) = 1 up to Monte-Carlo error in E(0)
  const ExponentBound huge = eexp_max_error(5000, s);
  const ExponentEval e0 = s.evaluate(0.0);
  CHECK(huge.mu_star < 1e-3);
  CHECK(huge.eps_avg ==
        doctest::Approx(std::min(1.0, std::exp(-4.0 * e0.e_of_mu))).epsilon(1e-3));
  CHECK(std::abs(std::log(huge.eps_avg)) <= 4.0 * 3.0 * e0.ci_halfwidth);
  CHECK(huge.eps_max == 1.0);
  CHECK_THROWS_AS(eexp_avg_error(0, s), DomainError);
}

TEST_CASE("curve_snr_at interpolates log eps linearly in dB") {
  std::vector<ExponentCurvePoint> curve(3);
  const double eps[] = {1e-1, 1e-3, 1e-7};
  for (int i = 0; i < 3; ++i) {
    curve[i].snr_db = 2.0 * i;
    curve[i].bound.eps_max = eps[i];
  }
  CHECK(curve_snr_at(curve, 1e-2) == doctest::Approx(1.0));
  CHECK(curve_snr_at(curve, 1e-5) == doctest::Approx(3.0));
  CHECK(std::isnan(curve_snr_at(curve, 1e-9)));
}

TEST_CASE("eexp_curve decreases in SNR and rejects a bad mu") {
  const auto curve = eexp_curve(dl(4, 4, 0.0), 130, {4.0, 6.0, 8.0}, 3000, 2);
  REQUIRE(curve.size() == 3);
  CHECK(curve[2].bound.eps_max <= curve[0].bound.eps_max);
  const ExponentSampler s(dl(1, 4, 5.0), 100, 1);
  CHECK_THROWS_AS(s.evaluate(-0.1), DomainError);
}
