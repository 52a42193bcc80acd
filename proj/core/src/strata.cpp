#include "sticky/strata.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sticky/errors.hpp"

namespace sticky {

StratumIndex StratumIndex::full(std::size_t n) {
  if (n > kMaxStrataDimension) throw DomainError("StratumIndex::full: dimension too large");
  return StratumIndex(n == 32 ? ~0u : ((1u << n) - 1u));
}

StratumIndex StratumIndex::of(std::initializer_list<std::size_t> coordinates) {
  std::uint32_t mask = 0;
  for (auto i : coordinates) {
    if (i >= 32) throw DomainError("StratumIndex::of: coordinate out of range");
    mask |= 1u << i;
  }
  return StratumIndex(mask);
}

StratumIndex StratumIndex::complement(std::size_t n) const {
  return StratumIndex(full(n).mask() & ~mask_);
}

std::vector<std::size_t> StratumIndex::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < 32; ++i)
    if (contains(i)) out.push_back(i);
  return out;
}

std::string StratumIndex::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (auto i : indices()) {
    if (!first) os << ',';
    os << i + 1;
    first = false;
  }
  os << '}';
  return os.str();
}

std::string StratumIndex::bit_string(std::size_t n) const {
  std::string s(n, '0');
  for (std::size_t i = 0; i < n; ++i)
    if (contains(i)) s[i] = '1';
  return s;
}

std::vector<StratumIndex> enumerate_strata(std::size_t n) {
  if (n == 0 || n > kMaxStrataDimension)
    throw DomainError("enumerate_strata: n must be in [1, " +
                      std::to_string(kMaxStrataDimension) + "], got " + std::to_string(n));
  const std::uint32_t count = 1u << n;
  std::vector<StratumIndex> out;
  out.reserve(count);
  for (std::uint32_t m = 0; m < count; ++m) out.emplace_back(m);
  // Lexicographic order of sorted index lists equals descending order of the
  // bit-reversed mask within one popcount class.
  auto reversed = [n](std::uint32_t m) {
    std::uint32_t r = 0;
    for (std::size_t i = 0; i < n; ++i)
      if ((m >> i) & 1u) r |= 1u << (n - 1 - i);
    return r;
  };
  std::sort(out.begin(), out.end(), [&](StratumIndex a, StratumIndex b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return reversed(a.mask()) > reversed(b.mask());
  });
  return out;
}

StratumIndex stratum_of(std::span<const double> x) {
  if (x.size() > 32) throw DomainError("stratum_of: dimension exceeds 32");
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0))
      throw DomainError("stratum_of: coordinate " + std::to_string(i + 1) +
                        " is negative or NaN");
    if (x[i] > 0.0) mask |= 1u << i;
  }
  return StratumIndex(mask);
}

double stratum_weight(StratumIndex b, std::size_t n, double beta) {
  return std::pow(beta, static_cast<double>(static_cast<int>(n) - b.size()));
}

}  // namespace sticky
