#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sticky/density.hpp"

namespace sticky {

// Symmetric C¹ pair interaction V with derivative V'.
class PotentialModel {
 public:
  using Fn = std::function<double(double)>;

  PotentialModel(std::string label, Fn value, Fn derivative);

  const std::string& label() const { return label_; }
  double V(double r) const { return value_(r); }
  double dV(double r) const { return derivative_(r); }

 private:
  std::string label_;
  Fn value_;
  Fn derivative_;
};

// V(r) = k r²/2.
PotentialModel make_gaussian_potential(double stiffness = 1.0);
// V(r) = k r⁴/4.
PotentialModel make_quartic_potential(double stiffness = 1.0);
// V(r) = k (√(1+r²) - 1); not convex at infinity in the strict sense and
// only linearly growing.
PotentialModel make_smoothed_well_potential(double stiffness = 1.0);

// "gaussian" | "quartic" | "smoothed-well", optional params = {stiffness}.
PotentialModel make_potential(const std::string& name, const std::vector<double>& params = {});

struct PotentialCheck {
  double symmetry_error = 0.0;  // max |V(-r) - V(r)| over samples
  double derivative_at_zero = 0.0;
  double kappa = 0.0;           // ∫ exp(-V) on [-R,R]
  double kappa_tail = 0.0;      // ∫ exp(-V) on R <= |r| <= 2R
  bool ok = false;
};

PotentialCheck check_potential(const PotentialModel& v, std::uint64_t seed = 1,
                               double half_width = 50.0);

// 1-based lattice coordinates, each in {1..N} for interior sites; 0 or N+1
// on the boundary layer.
using Site = std::vector<int>;

struct Neighbor {
  Site position;
  bool clamped = false;   // position lies in the boundary layer (height 0)
  std::size_t index = 0;  // state index; meaningful only when !clamped
};

// Nearest-neighbour bond of the closed lattice with at least one interior
// end. `second` is unused when `boundary` is set.
struct Bond {
  std::size_t first = 0;
  std::size_t second = 0;
  bool boundary = false;
};

// The discretized domain {1..N}^d with its outer boundary layer. Interior
// sites map to state indices 0..N^d-1 with the first lattice coordinate
// varying fastest.
class LatticeSpec {
 public:
  LatticeSpec(int d, int side);

  int d() const { return d_; }
  int side() const { return side_; }
  std::size_t site_count() const { return sites_; }

  bool contains(const Site& x) const;
  std::size_t site_index(const Site& x) const;  // DomainError outside D
  Site site(std::size_t index) const;

  const std::vector<Neighbor>& neighbors(std::size_t index) const;
  const std::vector<Bond>& bonds() const { return bonds_; }
  // Bonds incident to one interior site (indices into bonds()).
  const std::vector<std::size_t>& incident_bonds(std::size_t index) const;

 private:
  int d_;
  int side_;
  std::size_t sites_;
  std::vector<std::vector<Neighbor>> neighbors_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::size_t>> incident_;
};

// The 2d neighbours of an interior site, boundary ones flagged clamped.
std::vector<Neighbor> neighbors(const LatticeSpec& lat, const Site& x);

// H(φ) = Σ over unordered bonds touching D of V(φ(x) - φ(y)), φ ≡ 0 on the
// boundary layer. Bonds joining two boundary sites only add the constant
// V(0) per bond and are left out. DomainError for a negative height.
double hamiltonian(const LatticeSpec& lat, const PotentialModel& v, std::span<const double> phi);

// Σ_{|x-y|=1} V'(φ(x) - φ(y)) over the closed-lattice neighbours of x.
double drift_V(const LatticeSpec& lat, const PotentialModel& v, std::size_t x,
               std::span<const double> phi);

// log ρ = -H, ∂_x ln ρ = -drift_V(x, ·). n = N^d.
DensityModel make_wetting_density(const LatticeSpec& lat, const PotentialModel& v);

}  // namespace sticky
