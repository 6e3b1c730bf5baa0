#include "fbl/osd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "fbl/config.hpp"

namespace fbl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool test_bit(const std::uint64_t* w, int c) { return (w[c >> 6] >> (c & 63)) & 1u; }

inline void xor_into(std::uint64_t* dst, const std::uint64_t* src, int words) {
  for (int i = 0; i < words; ++i) dst[i] ^= src[i];
}

struct Search {
  int k, n, words;
  const std::vector<std::uint64_t>& rows;  // reduced generator, k x words
  const std::vector<double>& rel;          // |llr| by position
  std::vector<double> basis_cost;          // b_m, nondecreasing in m
  std::vector<int> order;                  // positions, most reliable first
  int d_lb;

  double best = kInf;
  std::vector<int> best_flips;
  std::vector<std::uint64_t> best_d;
  std::uint64_t scored = 0;
  bool certified = false;

  const std::uint64_t* row_of_m(int m) const {
    return rows.data() + static_cast<std::size_t>(k - 1 - m) * words;
  }

  // sum of |llr| over set bits of d, abandoned once it reaches `bound`
  double discrepancy(const std::uint64_t* d, double bound) const {
    double s = 0.0;
    for (int w = 0; w < words; ++w) {
      std::uint64_t x = d[w];
      while (x) {
        s += rel[(w << 6) + std::countr_zero(x)];
        if (s >= bound) return s;
        x &= x - 1;
      }
    }
    return s;
  }

  // Any other codeword differs from the incumbent in >= d_lb places, and
  // at least d_lb - |diff| of those are places where the incumbent agrees
  // with the hard decisions; it pays at least the cheapest such |llr|s.
  bool ml_certified() const {
    if (best == 0.0) return true;
    if (d_lb <= 0) return false;
    int diff = 0;
    for (int w = 0; w < words; ++w) diff += std::popcount(best_d[w]);
    int need = d_lb - diff;
    if (need <= 0) return false;
    double bound = 0.0;
    for (auto it = order.rbegin(); it != order.rend() && need > 0; ++it) {
      if (test_bit(best_d.data(), *it)) continue;
      bound += rel[*it];
      --need;
    }
    return need == 0 && best <= bound;
  }

  void consider(const std::uint64_t* d, const std::vector<int>& flips) {
    ++scored;
    const double v = discrepancy(d, best);
    if (v < best) {
      best = v;
      best_flips = flips;
      best_d.assign(d, d + words);
      certified = ml_certified();
    }
  }

  void enumerate(int weight, int depth, int start, double cost,
                 std::vector<std::uint64_t>& stack, std::vector<int>& flips) {
    const int remaining = weight - depth;
    const std::uint64_t* cur = stack.data() + static_cast<std::size_t>(depth) * words;
    std::uint64_t* nxt = stack.data() + static_cast<std::size_t>(depth + 1) * words;
    for (int m = start; m <= k - remaining; ++m) {
      if (certified) return;
      if (cost + remaining * basis_cost[m] >= best) break;
      std::copy(cur, cur + words, nxt);
      xor_into(nxt, row_of_m(m), words);
      flips.push_back(m);
      if (remaining == 1)
        consider(nxt, flips);
      else
        enumerate(weight, depth + 1, m + 1, cost + basis_cost[m], stack, flips);
      flips.pop_back();
    }
  }
};

}  // namespace

std::uint64_t osd_candidate_count(int k, int order) {
  std::uint64_t total = 0, c = 1;
  for (int i = 0; i <= std::min(order, k); ++i) {
    total += c;
    c = c * static_cast<std::uint64_t>(k - i) / static_cast<std::uint64_t>(i + 1);
  }
  return total;
}

OsdDecoder::OsdDecoder(Gf2Matrix generator, int order, int min_distance_lb)
    : g_(std::move(generator)), order_(order), d_lb_(min_distance_lb) {
  if (g_.rows() < 1 || g_.cols() < g_.rows())
    throw DomainError("OsdDecoder: generator must be k x n with 1 <= k <= n");
  if (order_ < 0) throw DomainError("OsdDecoder: order must be >= 0");
}

OsdResult OsdDecoder::decode(std::span<const double> llr) const {
  const int k = g_.rows(), n = g_.cols(), words = g_.words();
  if (static_cast<int>(llr.size()) != n)
    throw DomainError("OsdDecoder::decode: expected " + std::to_string(n) + " LLRs");
  const int awords = (k + 63) / 64;

  std::vector<double> rel(static_cast<std::size_t>(words) * 64, 0.0);
  for (int i = 0; i < n; ++i) rel[i] = std::abs(llr[i]);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rel[a] > rel[b]; });

  // Gauss-Jordan on columns in reliability order; `a` tracks the row
  // operations so that reduced = a * G.
  std::vector<std::uint64_t> rows(static_cast<std::size_t>(k) * words);
  for (int r = 0; r < k; ++r) std::copy(g_.row(r), g_.row(r) + words, rows.begin() + static_cast<std::ptrdiff_t>(r) * words);
  std::vector<std::uint64_t> a(static_cast<std::size_t>(k) * awords, 0);
  for (int r = 0; r < k; ++r) a[static_cast<std::size_t>(r) * awords + (r >> 6)] |= std::uint64_t{1} << (r & 63);
  auto row = [&](int r) { return rows.data() + static_cast<std::size_t>(r) * words; };
  auto arow = [&](int r) { return a.data() + static_cast<std::size_t>(r) * awords; };

  std::vector<int> pivots;
  pivots.reserve(k);
  for (int col : order) {
    const int r = static_cast<int>(pivots.size());
    if (r == k) break;
    int p = r;
    while (p < k && !test_bit(row(p), col)) ++p;
    if (p == k) continue;  // dependent on the columns already taken
    if (p != r) {
      std::swap_ranges(row(p), row(p) + words, row(r));
      std::swap_ranges(arow(p), arow(p) + awords, arow(r));
    }
    for (int q = 0; q < k; ++q) {
      if (q != r && test_bit(row(q), col)) {
        xor_into(row(q), row(r), words);
        xor_into(arow(q), arow(r), awords);
      }
    }
    pivots.push_back(col);
  }
  if (static_cast<int>(pivots.size()) < k)
    throw DomainError("OsdDecoder: generator matrix is rank deficient");

  std::vector<std::uint64_t> y(words, 0);
  for (int i = 0; i < n; ++i)
    if (llr[i] < 0.0) y[i >> 6] |= std::uint64_t{1} << (i & 63);

  // order-0 candidate: hard decisions on the basis
  std::vector<std::uint8_t> v(k);
  std::vector<std::uint64_t> stack(static_cast<std::size_t>(order_ + 1) * words, 0);
  std::copy(y.begin(), y.end(), stack.begin());
  for (int i = 0; i < k; ++i) {
    v[i] = test_bit(y.data(), pivots[i]);
    if (v[i]) xor_into(stack.data(), row(i), words);
  }

  Search s{k, n, words, rows, rel, std::vector<double>(k), order, d_lb_, kInf, {}, {}, 0, false};
  for (int m = 0; m < k; ++m) s.basis_cost[m] = rel[pivots[k - 1 - m]];
  std::vector<int> flips;
  s.consider(stack.data(), flips);
  for (int w = 1; w <= std::min(order_, k) && !s.certified; ++w)
    s.enumerate(w, 0, 0, 0.0, stack, flips);

  for (int m : s.best_flips) v[k - 1 - m] ^= 1u;
  std::vector<std::uint64_t> info(awords, 0);
  for (int i = 0; i < k; ++i)
    if (v[i]) xor_into(info.data(), arow(i), awords);

  OsdResult out;
  out.info.resize(k);
  for (int i = 0; i < k; ++i) out.info[i] = test_bit(info.data(), i);
  out.codeword.resize(n);
  for (int i = 0; i < n; ++i)
    out.codeword[i] = test_bit(s.best_d.data(), i) ^ test_bit(y.data(), i);
  out.discrepancy = s.best;
  out.candidates = s.scored;
  out.certified = s.certified;
  return out;
}

OsdResult ml_decode_exhaustive(const Gf2Matrix& g, std::span<const double> llr) {
  const int k = g.rows(), n = g.cols();
  if (k > 24) throw DomainError("ml_decode_exhaustive: k too large to enumerate");
  if (static_cast<int>(llr.size()) != n)
    throw DomainError("ml_decode_exhaustive: length mismatch");
  OsdResult out;
  out.discrepancy = kInf;
  Bits info(k);
  for (std::uint32_t msg = 0; msg < (1u << k); ++msg) {
    for (int i = 0; i < k; ++i) info[i] = (msg >> i) & 1u;
    const Bits c = g.encode(info);
    double d = 0.0;
    for (int i = 0; i < n; ++i)
      if (c[i] != (llr[i] < 0.0)) d += std::abs(llr[i]);
    ++out.candidates;
    if (d < out.discrepancy) {
      out.discrepancy = d;
      out.info = info;
      out.codeword = c;
    }
  }
  return out;
}

}  // namespace fbl
