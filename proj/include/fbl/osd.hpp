#pragma once

#include <cstdint>
#include <span>

#include "fbl/code.hpp"

namespace fbl {

struct OsdResult {
  Bits info;
  Bits codeword;
  double discrepancy = 0.0;      // sum of |llr| where codeword != hard decision
  std::uint64_t candidates = 0;  // re-encodings actually scored
  bool certified = false;        // stopped on the ML sufficient condition
};

/// Number of test patterns of weight <= order on k positions.
std::uint64_t osd_candidate_count(int k, int order);

/// Order-w ordered-statistics decoder for a binary linear code given by its
/// generator matrix. LLR convention: positive favours bit 0; LLR 0 is an
/// erasure.
///
/// The result equals plain order-w reprocessing (all patterns of weight
/// <= w on the most reliable basis, minimum soft discrepancy, first found
/// wins on ties). Two exact shortcuts are applied: a pattern whose basis
/// flips alone already cost at least the incumbent is skipped, and when a
/// lower bound on the code's minimum distance is supplied the search stops
/// once the incumbent satisfies the ML sufficient condition.
class OsdDecoder {
public:
  explicit OsdDecoder(Gf2Matrix generator, int order, int min_distance_lb = 0);

  OsdResult decode(std::span<const double> llr) const;

  int order() const { return order_; }
  int k() const { return g_.rows(); }
  int n() const { return g_.cols(); }
  const Gf2Matrix& generator() const { return g_; }

private:
  Gf2Matrix g_;
  int order_;
  int d_lb_;
};

/// Exhaustive ML decoding over all 2^k codewords (small codes only).
OsdResult ml_decode_exhaustive(const Gf2Matrix& g, std::span<const double> llr);

}  // namespace fbl
