#pragma once

// Counter-based random streams (Philox4x32-10, Salmon et al., SC'11).
//
// Every Monte-Carlo draw in the library is addressed by (seed, index, lane):
// `index` is the sample or packet number and `lane` separates independent
// uses within one sample (resource block k, pilot noise, ...). A stream is a
// pure function of its address, so a batch computed with any number of
// worker threads is bit-identical to the serial one.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace fbl {

class Philox4x32 {
public:
  using Block = std::array<std::uint32_t, 4>;

  static Block round10(Block ctr, std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
      if (r) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;
};

/// Sequential view over the Philox blocks of one (seed, index, lane) address.
class RandomStream {
public:
  RandomStream(std::uint64_t seed, std::uint64_t index, std::uint32_t lane)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        index_(index),
        lane_(lane) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on (0, 1), 53-bit resolution; never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double th = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  /// Circularly-symmetric CN(0,1): real and imaginary parts each N(0, 1/2).
  std::complex<double> complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape >= 1.
  double gamma(double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

private:
  void refill() {
    buf_ = Philox4x32::round10(
        {counter_++, static_cast<std::uint32_t>(index_),
         static_cast<std::uint32_t>(index_ >> 32), lane_},
        key_);
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t index_;
  std::uint32_t lane_;
  std::uint32_t counter_ = 0;
  Philox4x32::Block buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fbl
