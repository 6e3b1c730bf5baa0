#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fbl {

using Bits = std::vector<std::uint8_t>;

/// Rate-1/4 nonsystematic feedforward convolutional code, terminated by
/// tail-biting. Generator bit `memory` (the MSB) taps the current input,
/// bit 0 taps the input `memory` steps back.
struct CodeSpec {
  int k_info = 92;
  int n_coded_mother = 368;
  int memory = 13;
  // Maximum-free-distance set for constraint length 14 (d_free = 36), the
  // longest rate-1/4 entry in the standard published tables.
  std::vector<std::uint32_t> generators{021113, 023175, 035527, 035537};
  bool tail_biting = true;

  bool operator==(const CodeSpec&) const = default;
};

/// Throws DomainError unless 4 generators of degree <= memory <= 15 are
/// given, n_coded_mother = 4 k_info and k_info > memory.
const CodeSpec& validate_code_spec(const CodeSpec& spec);

std::string to_octal(std::uint32_t g);
std::uint32_t parse_octal(const std::string& s);

/// Free distance of the (zero-terminated) code, by shortest detour from
/// the zero state.
int free_distance(const CodeSpec& spec);

/// Lower bound on the minimum distance of the tail-biting code of length
/// k_info: every nonzero codeword either contains a detour from the zero
/// state (weight >= d_free) or never visits it, and the latter weight is
/// bounded by the lightest k_info-step path that avoids state zero.
int tailbiting_distance_lower_bound(const CodeSpec& spec);

/// Circular encoding: the register starts in the state left by the last
/// `memory` input bits. Output bit 4i+l is generator l at step i.
Bits conv_encode_tailbiting(const Bits& info, const CodeSpec& spec);

/// Dense GF(2) matrix, rows packed into 64-bit words.
class Gf2Matrix {
public:
  Gf2Matrix() = default;
  Gf2Matrix(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int words() const { return words_; }

  bool get(int r, int c) const {
    return (data_[static_cast<std::size_t>(r) * words_ + (c >> 6)] >> (c & 63)) & 1u;
  }
  void set(int r, int c, bool v);
  const std::uint64_t* row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * words_;
  }
  std::uint64_t* row(int r) {
    return data_.data() + static_cast<std::size_t>(r) * words_;
  }

  static Gf2Matrix from_rows(const std::vector<Bits>& rows);
  /// info (length rows()) times this matrix.
  Bits encode(const Bits& info) const;

private:
  int rows_ = 0, cols_ = 0, words_ = 0;
  std::vector<std::uint64_t> data_;
};

/// k_info x n_coded_mother generator of the tail-biting block code.
Gf2Matrix generator_matrix(const CodeSpec& spec);

/// Evenly spaced puncture set: index round(j n / count) for j < count,
/// advanced to the next unused index on collision. Strictly increasing.
std::vector<int> puncture_positions(int n_mother, int count);

/// Removes `count` evenly spaced bits.
Bits puncture(const Bits& coded, int count);

}  // namespace fbl
