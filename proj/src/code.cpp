#include "fbl/code.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <limits>
#include <queue>

#include "fbl/config.hpp"

namespace fbl {

namespace {

// Output weight of every (state, input) branch, indexed by the full register
// (input << memory) | state.
std::vector<int> branch_weights(const CodeSpec& spec) {
  const std::uint32_t regs = 1u << (spec.memory + 1);
  std::vector<int> w(regs);
  for (std::uint32_t reg = 0; reg < regs; ++reg) {
    int s = 0;
    for (auto g : spec.generators) s += std::popcount(g & reg) & 1;
    w[reg] = s;
  }
  return w;
}

}  // namespace

const CodeSpec& validate_code_spec(const CodeSpec& spec) {
  if (spec.memory < 1 || spec.memory > 15)
    throw DomainError("CodeSpec: memory must lie in 1..15");
  if (spec.generators.size() != 4)
    throw DomainError("CodeSpec: rate 1/4 needs exactly 4 generators");
  for (auto g : spec.generators) {
    if (g == 0 || (g >> (spec.memory + 1)) != 0)
      throw DomainError("CodeSpec: generator " + to_octal(g) +
                        " has degree above memory or is zero");
  }
  if (spec.k_info <= spec.memory)
    throw DomainError("CodeSpec: k_info must exceed the memory");
  if (spec.n_coded_mother != 4 * spec.k_info)
    throw DomainError("CodeSpec: n_coded_mother must equal 4 k_info");
  if (!spec.tail_biting)
    throw DomainError("CodeSpec: only tail-biting termination is supported");
  return spec;
}

std::string to_octal(std::uint32_t g) {
  if (g == 0) return "0";
  std::string s;
  for (; g; g >>= 3) s.push_back(static_cast<char>('0' + (g & 7u)));
  std::reverse(s.begin(), s.end());
  return s;
}

std::uint32_t parse_octal(const std::string& s) {
  if (s.empty()) throw DomainError("parse_octal: empty string");
  std::uint32_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '7') throw DomainError("parse_octal: bad digit in '" + s + "'");
    if (v >> 29) throw DomainError("parse_octal: '" + s + "' too large");
    v = (v << 3) | static_cast<std::uint32_t>(c - '0');
  }
  return v;
}

int free_distance(const CodeSpec& spec) {
  validate_code_spec(spec);
  const int m = spec.memory;
  const std::uint32_t n_states = 1u << m;
  const auto w = branch_weights(spec);
  std::vector<int> dist(n_states, std::numeric_limits<int>::max());
  using Item = std::pair<int, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  // leave the zero state with input 1
  const std::uint32_t first = (1u << m) >> 1;
  pq.push({w[1u << m], first});
  while (!pq.empty()) {
    const auto [d, s] = pq.top();
    pq.pop();
    if (s == 0) return d;
    if (d >= dist[s]) continue;
    dist[s] = d;
    for (std::uint32_t u = 0; u < 2; ++u) {
      const std::uint32_t reg = (u << m) | s;
      pq.push({d + w[reg], reg >> 1});
    }
  }
  return std::numeric_limits<int>::max();
}

int tailbiting_distance_lower_bound(const CodeSpec& spec) {
  const int dfree = free_distance(spec);
  const int m = spec.memory;
  const std::uint32_t n_states = 1u << m;
  const auto w = branch_weights(spec);
  constexpr int kInf = std::numeric_limits<int>::max() / 2;
  std::vector<int> cost(n_states, 0), next(n_states);
  cost[0] = kInf;
  for (int step = 0; step < spec.k_info; ++step) {
    std::fill(next.begin(), next.end(), kInf);
    for (std::uint32_t s = 1; s < n_states; ++s) {
      if (cost[s] >= kInf) continue;
      for (std::uint32_t u = 0; u < 2; ++u) {
        const std::uint32_t reg = (u << m) | s, ns = reg >> 1;
        if (ns == 0) continue;
        next[ns] = std::min(next[ns], cost[s] + w[reg]);
      }
    }
    cost.swap(next);
  }
  const int avoid = *std::min_element(cost.begin() + 1, cost.end());
  return std::min(dfree, avoid);
}

Bits conv_encode_tailbiting(const Bits& info, const CodeSpec& spec) {
  validate_code_spec(spec);
  const int k = spec.k_info, m = spec.memory;
  if (static_cast<int>(info.size()) != k)
    throw DomainError("conv_encode_tailbiting: expected " + std::to_string(k) +
                      " info bits, got " + std::to_string(info.size()));
  // state bit (m-1-j) holds u_{i-1-j}
  std::uint32_t state = 0;
  for (int j = 0; j < m; ++j) state |= static_cast<std::uint32_t>(info[k - 1 - j] & 1u) << (m - 1 - j);
  Bits out(static_cast<std::size_t>(4 * k));
  for (int i = 0; i < k; ++i) {
    const std::uint32_t reg = (static_cast<std::uint32_t>(info[i] & 1u) << m) | state;
    for (int l = 0; l < 4; ++l)
      out[4 * i + l] = static_cast<std::uint8_t>(std::popcount(spec.generators[l] & reg) & 1);
    state = reg >> 1;
  }
  return out;
}

Gf2Matrix::Gf2Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), words_((cols + 63) / 64),
      data_(static_cast<std::size_t>(rows) * words_, 0) {}

void Gf2Matrix::set(int r, int c, bool v) {
  auto& w = data_[static_cast<std::size_t>(r) * words_ + (c >> 6)];
  const std::uint64_t bit = std::uint64_t{1} << (c & 63);
  w = v ? (w | bit) : (w & ~bit);
}

Gf2Matrix Gf2Matrix::from_rows(const std::vector<Bits>& rows) {
  if (rows.empty()) throw DomainError("Gf2Matrix: no rows");
  const int n = static_cast<int>(rows.front().size());
  Gf2Matrix g(static_cast<int>(rows.size()), n);
  for (int r = 0; r < g.rows(); ++r) {
    if (static_cast<int>(rows[r].size()) != n)
      throw DomainError("Gf2Matrix: ragged rows");
    for (int c = 0; c < n; ++c) g.set(r, c, rows[r][c] & 1u);
  }
  return g;
}

Bits Gf2Matrix::encode(const Bits& info) const {
  if (static_cast<int>(info.size()) != rows_)
    throw DomainError("Gf2Matrix::encode: length mismatch");
  std::vector<std::uint64_t> acc(words_, 0);
  for (int r = 0; r < rows_; ++r)
    if (info[r] & 1u)
      for (int w = 0; w < words_; ++w) acc[w] ^= row(r)[w];
  Bits out(cols_);
  for (int c = 0; c < cols_; ++c) out[c] = (acc[c >> 6] >> (c & 63)) & 1u;
  return out;
}

Gf2Matrix generator_matrix(const CodeSpec& spec) {
  validate_code_spec(spec);
  Gf2Matrix g(spec.k_info, spec.n_coded_mother);
  Bits unit(spec.k_info, 0);
  for (int r = 0; r < spec.k_info; ++r) {
    unit[r] = 1;
    const Bits c = conv_encode_tailbiting(unit, spec);
    for (int j = 0; j < spec.n_coded_mother; ++j) g.set(r, j, c[j]);
    unit[r] = 0;
  }
  return g;
}

std::vector<int> puncture_positions(int n_mother, int count) {
  if (count < 0 || count >= n_mother)
    throw DomainError("puncture_positions: need 0 <= count < n_mother");
  std::vector<int> pos;
  pos.reserve(count);
  std::vector<bool> used(n_mother, false);
  for (int j = 0; j < count; ++j) {
    auto p = static_cast<int>(std::lround(static_cast<double>(j) * n_mother / count));
    while (p < n_mother && used[p]) ++p;
    if (p >= n_mother) throw DomainError("puncture_positions: ran past the end");
    used[p] = true;
    pos.push_back(p);
  }
  std::sort(pos.begin(), pos.end());
  return pos;
}

Bits puncture(const Bits& coded, int count) {
  const auto pos = puncture_positions(static_cast<int>(coded.size()), count);
  Bits out;
  out.reserve(coded.size() - pos.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < coded.size(); ++i) {
    if (next < pos.size() && pos[next] == static_cast<int>(i)) {
      ++next;
      continue;
    }
    out.push_back(coded[i]);
  }
  return out;
}

}  // namespace fbl
