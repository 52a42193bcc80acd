#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sticky {

// Largest dimension for which the 2^n strata are ever enumerated.
inline constexpr std::size_t kMaxStrataDimension = 24;

// A subset B of the coordinate indices, identifying the face of the orthant
// on which exactly the coordinates in B are strictly positive (the "wet"
// coordinates). Coordinates are 0-based in code; to_string() prints them
// 1-based.
class StratumIndex {
 public:
  constexpr StratumIndex() = default;
  constexpr explicit StratumIndex(std::uint32_t mask) : mask_(mask) {}

  static StratumIndex full(std::size_t n);
  static StratumIndex of(std::initializer_list<std::size_t> coordinates);

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool contains(std::size_t i) const { return (mask_ >> i) & 1u; }
  constexpr bool empty() const { return mask_ == 0; }
  int size() const { return std::popcount(mask_); }

  // The dry set I_0: coordinates pinned at zero.
  StratumIndex complement(std::size_t n) const;
  std::vector<std::size_t> indices() const;

  // "{1,3}" (1-based), "{}" for the origin stratum.
  std::string to_string() const;
  // One character per coordinate, coordinate 1 first: '1' wet, '0' dry.
  std::string bit_string(std::size_t n) const;

  friend constexpr auto operator<=>(StratumIndex, StratumIndex) = default;

 private:
  std::uint32_t mask_ = 0;
};

// All 2^n strata ordered by popcount, then lexicographically by the sorted
// index list. Throws DomainError for n == 0 or n > kMaxStrataDimension.
std::vector<StratumIndex> enumerate_strata(std::size_t n);

// {i : x_i > 0}. Exact zeros encode the boundary; a negative coordinate is a
// DomainError.
StratumIndex stratum_of(std::span<const double> x);

// β^(n-#B).
double stratum_weight(StratumIndex b, std::size_t n, double beta);

}  // namespace sticky
