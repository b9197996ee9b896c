#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsqaoa {

/// Raised for malformed inputs: size mismatches, out-of-range parameters,
/// invariant violations on construction.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One entry per variable, each 0 or 1.
using Bitstring = std::vector<std::uint8_t>;

/// Basis-state index. Bit i of the index is variable (qubit) i.
using BasisIndex = std::uint64_t;

inline Bitstring to_bits(BasisIndex index, int n) {
  Bitstring bits(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) bits[i] = static_cast<std::uint8_t>((index >> i) & 1U);
  return bits;
}

inline BasisIndex to_index(std::span<const std::uint8_t> bits) {
  BasisIndex index = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw InputError("bitstring entries must be 0 or 1");
    index |= static_cast<BasisIndex>(bits[i]) << i;
  }
  return index;
}

inline int popcount(BasisIndex index) { return __builtin_popcountll(index); }

/// Renders variable 0 first, e.g. "1100" selects assets 0 and 1.
inline std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace wsqaoa
