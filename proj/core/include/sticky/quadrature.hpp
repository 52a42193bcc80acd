#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sticky/density.hpp"
#include "sticky/strata.hpp"

namespace sticky {

// The reference measure m_{n,β} = Σ_B β^(n-#B) λ_B restricted to the box
// [0,L]^n, together with the quadrature resolution used to integrate
// against it.
struct StickyMeasureSpec {
  std::size_t n = 1;
  double beta = 1.0;
  double length = 1.0;               // truncation length L
  std::size_t nodes_per_axis = 16;   // Gauss-Legendre panels per free axis

  void validate() const;
  double weight(StratumIndex b) const { return stratum_weight(b, n, beta); }
};

// Points per composite Gauss-Legendre panel.
inline constexpr std::size_t kPointsPerPanel = 4;

struct QuadratureResult {
  double value = 0.0;
  // In enumerate_strata order; entries already carry the β^(n-#B) weight so
  // that value == Σ per_stratum.
  std::vector<std::pair<StratumIndex, double>> per_stratum;
  double est_truncation_error = 0.0;

  double of(StratumIndex b) const;
};

struct QuadratureOptions {
  // Per-axis upper integration limit; empty means spec.length on every axis.
  std::vector<double> upper;
  // Estimate the mass in the shell [0,2L]^B \ [0,L]^B of every stratum.
  bool estimate_tail = true;
};

using Integrand = std::function<double(std::span<const double>)>;

// Σ_B β^(n-#B) ∫_{E_+(B) ∩ box} f ρ dλ_B with composite Gauss-Legendre on the
// free axes and point evaluation at 0 on the Dirac axes. Throws NumericError
// naming the node if f or log ρ is non-finite at a quadrature node.
QuadratureResult stratified_integral(const Integrand& f, const DensityModel& rho,
                                     const StickyMeasureSpec& spec,
                                     const QuadratureOptions& options = {});

// ∫_{E_+(B) ∩ [0,L]^n} ρ dλ_B^{(n)} for every stratum B, without β weights.
// Any β-dependent stratum probability follows from these by reweighting.
struct StratumMasses {
  std::size_t n = 0;
  std::vector<std::pair<StratumIndex, double>> mass;  // enumerate_strata order

  double of(StratumIndex b) const;
  // β^(n-#B) c_B / Σ_B' β^(n-#B') c_B'.
  double probability(StratumIndex b, double beta) const;
};

StratumMasses stratum_masses(const DensityModel& rho, const StickyMeasureSpec& spec);

// μ({x_j = 0}) / μ(E) through the polynomial coefficients
//   a_i = Σ_{#B=n-i, j∈B} c_B,   b_i = Σ_{#B=n-i} c_B,
// ratio(β) = 1 - Σ β^i a_i / Σ β^i b_i. The coefficients are kept so the
// ratio can be re-evaluated for any β without integrating again.
struct BoundaryMassRatio {
  std::size_t coordinate = 0;  // 0-based
  double beta = 1.0;
  double ratio = 0.0;
  std::vector<double> a;  // size n+1, a[n] == 0
  std::vector<double> b;  // size n+1

  double at(double beta) const;
};

// Throws DomainError for j >= n and DegenerateModelError for zero mass.
BoundaryMassRatio boundary_mass_ratio(std::size_t j, const DensityModel& rho,
                                      const StickyMeasureSpec& spec);

// Composite Gauss-Legendre nodes and weights on [0, upper] with the given
// number of panels.
struct AxisRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
AxisRule composite_gauss_legendre(double upper, std::size_t panels);

}  // namespace sticky
