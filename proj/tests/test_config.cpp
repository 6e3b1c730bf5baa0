#include "doctest.h"

#include <cmath>

#include "fbl/config.hpp"
#include "fbl/rng.hpp"

using namespace fbl;

TEST_CASE("validate_config accepts the standard geometries") {
  SystemConfig ul{.n_tx = 1, .n_rx = 2, .n_res = 8, .n_subc = 12, .n_ofdm = 2};
  CHECK(validate_config(ul) == ul);
  CHECK(ul.n_coh() == 24);

  SystemConfig dl{.n_tx = 8, .n_rx = 1, .n_res = 4, .n_subc = 21, .n_ofdm = 2,
                  .link = Link::downlink};
  CHECK_NOTHROW(validate_config(dl));
  CHECK(dl.n_coh() == 42);
  CHECK(dl.p() == 8);
  CHECK(dl.q() == 1);
}

TEST_CASE("validate_config rejects short coherence and bad counts") {
  SystemConfig c{.n_tx = 2, .n_rx = 2, .n_res = 1, .n_subc = 2, .n_ofdm = 1};
  CHECK_THROWS_AS(validate_config(c), DimensionError);
  SystemConfig z{.n_tx = 0, .n_rx = 1};
  CHECK_THROWS_AS(validate_config(z), DomainError);
  SystemConfig nan{.snr_db = std::nan("")};
  CHECK_THROWS(validate_config(nan));
}

TEST_CASE("rb_power per link direction") {
  SystemConfig ul{.n_tx = 1, .n_rx = 2, .n_res = 8, .n_ofdm = 2, .snr_db = 20.0};
  CHECK(rb_power(ul) == doctest::Approx(25.0));
  ul.n_res = 1;
  CHECK(rb_power(ul) == doctest::Approx(200.0));

  SystemConfig dl{.n_tx = 2, .n_rx = 1, .n_res = 3, .n_subc = 12, .n_ofdm = 2,
                  .link = Link::downlink, .snr_db = 10.0};
  CHECK(rb_power(dl) == doctest::Approx(240.0));
}

TEST_CASE("rb_power is homogeneous and respects the codeword budget") {
  for (Link link : {Link::uplink, Link::downlink}) {
    SystemConfig c{.n_tx = 1, .n_rx = 1, .n_res = 5, .n_subc = 12, .n_ofdm = 4,
                   .link = link, .snr_db = 7.0};
    const double a = rb_power(c);
    c.snr_db += 10.0 * std::log10(2.0);
    CHECK(rb_power(c) == doctest::Approx(2.0 * a));

    const double lin = db_to_linear(c.snr_db);
    const double total = rb_power(c) * c.n_res;
    if (link == Link::uplink)
      CHECK(total == doctest::Approx(c.n_ofdm * lin));
    else
      CHECK(total == doctest::Approx(c.n_ofdm * c.n_subc * c.n_res * lin));
  }
}

TEST_CASE("derive_dimensions uses LTE numerology") {
  SystemConfig a{.n_tx = 1, .n_rx = 1, .n_res = 1, .n_subc = 12, .n_ofdm = 7};
  const auto d = derive_dimensions(a);
  CHECK(d.bandwidth == doctest::Approx(180e3));
  CHECK(d.latency == doctest::Approx(0.5e-3).epsilon(1e-3));
  CHECK(d.total_slots == 84);

  SystemConfig b{.n_tx = 1, .n_rx = 1, .n_res = 25, .n_subc = 12, .n_ofdm = 4};
  const auto e = derive_dimensions(b);
  CHECK(e.latency == doctest::Approx(285.6e-6));
  CHECK(e.bandwidth == doctest::Approx(4.5e6));
  CHECK(e.total_slots == e.n_coh * b.n_res);
}

TEST_CASE("key=value config parsing") {
  const auto cfg = parse_system_config(
      "# uplink 1x2\nn_tx = 1\nn_rx=2\nn_res=5\nn_ofdm=4\nlink=uplink\nsnr_db=20\n");
  CHECK(cfg.n_rx == 2);
  CHECK(cfg.n_res == 5);
  CHECK(cfg.link == Link::uplink);
  CHECK(cfg.snr_db == 20.0);
  CHECK_THROWS(parse_system_config("n_tx=1\nbogus=3\n"));
  CHECK_THROWS(parse_system_config("n_tx=1\nn_tx=2\n"));
  CHECK_THROWS(parse_system_config("n_tx=one\n"));
  CHECK(parse_link("DL") == Link::downlink);
}

TEST_CASE("config digest separates configurations") {
  SystemConfig a{.n_tx = 1, .n_rx = 2, .n_res = 5};
  SystemConfig b = a;
  CHECK(config_digest(a) == config_digest(b));
  b.snr_db = 0.5;
  CHECK(config_digest(a) != config_digest(b));
}

TEST_CASE("Philox4x32-10 known answer") {
  RandomStream s(0, 0, 0);
  CHECK(s.next_u32() == 0x6627e8d5u);
  CHECK(s.next_u32() == 0xe169c58du);
  CHECK(s.next_u32() == 0xbc57ac4cu);
  CHECK(s.next_u32() == 0x9b00dbd8u);
}

TEST_CASE("random streams are addressed, not sequential") {
  RandomStream a(7, 3, 1), b(7, 3, 1), c(7, 4, 1), d(7, 3, 2);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
}

TEST_CASE("gamma variates have the right first two moments") {
  RandomStream s(11, 0, 0);
  const int n = 200000;
  for (double shape : {1.0, 3.0, 23.0}) {
    double m = 0, m2 = 0;
    for (int i = 0; i < n; ++i) {
      const double g = s.gamma(shape);
      m += g;
      m2 += g * g;
    }
    m /= n;
    m2 /= n;
    CHECK(std::abs(m - shape) < 4.0 * std::sqrt(shape / n));
    CHECK(m2 - m * m == doctest::Approx(shape).epsilon(0.03));
  }
}
