#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sticky/density.hpp"
#include "sticky/quadrature.hpp"
#include "sticky/strata.hpp"

namespace sticky {

// One-dimensional profiles on [0,1], each vanishing together with its first
// derivative at t = 1 and extended by 0 beyond:
//   Vanishing: t(1-t)²        value 0, slope 1 at t = 0
//   Flat:      (1-t)²(1+2t)   value 1, slope 0 at t = 0
//   Mixed:     (1-t)²(1+3t)   value 1, slope 1 at t = 0
enum class Profile { Vanishing, Flat, Mixed };

const char* to_string(Profile p);

// A compactly supported, piecewise-C² test function on the orthant with
// value, first partials and diagonal second partials. The constant surrogate
// has zero partials everywhere and is meant for invariance checks only.
class TestFunction {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using PartialFn = std::function<double(std::size_t, std::span<const double>)>;

  TestFunction(std::size_t dim, std::vector<double> support, ValueFn value, PartialFn partial,
               PartialFn partial2, std::string label);

  // Π_j profile_j(x_j / s_j).
  static TestFunction product(std::vector<Profile> profiles, std::vector<double> support);
  static TestFunction constant(std::size_t dim, double c = 1.0);

  std::size_t dim() const { return dim_; }
  const std::vector<double>& support() const { return support_; }
  const std::string& label() const { return label_; }
  bool is_constant() const { return constant_; }

  double value(std::span<const double> x) const { return value_(x); }
  double partial(std::size_t j, std::span<const double> x) const { return partial_(j, x); }
  double partial2(std::size_t j, std::span<const double> x) const { return partial2_(j, x); }

 private:
  std::size_t dim_;
  std::vector<double> support_;
  ValueFn value_;
  PartialFn partial_;
  PartialFn partial2_;
  std::string label_;
  bool constant_ = false;
};

// Every product of profiles over n axes with common support s (3^n members).
std::vector<TestFunction> builtin_test_functions(std::size_t n, double support);

struct TestFunctionCheck {
  double max_partial_error = 0.0;
  double max_partial2_error = 0.0;
  bool ok = false;
};

// Central-difference check of partial (tol 1e-6) and partial2 (tol 1e-5) at
// random points of the support box.
TestFunctionCheck check_test_function(const TestFunction& f, std::size_t points = 1000,
                                      std::uint64_t seed = 1);

struct FormValue {
  double value = 0.0;
  std::vector<std::pair<StratumIndex, double>> per_stratum;
};

// E(f,g) = Σ_{B≠∅} ∫_{E_+(B)} (∇^B f, ∇^B g) dμ_B, integrated over the
// intersection of the supports.
FormValue dirichlet_form(const TestFunction& f, const TestFunction& g, const DensityModel& rho,
                         const StickyMeasureSpec& spec);

// Lf(x) = L^B f(x) with B = stratum_of(x):
//   Σ_{i∈B} (∂²_i f + ∂_i f ∂_i ln ρ) + (1/β) Σ_{i∉B} ∂_i f.
double apply_generator(const TestFunction& f, std::span<const double> x, const DensityModel& rho,
                       double beta);

// Density of the energy measure against μ: 2 Σ_{i∈B} (∂_i g(x))².
double energy_density(const TestFunction& g, std::span<const double> x);

struct IbpStratum {
  StratumIndex stratum;
  double form = 0.0;
  double ibp = 0.0;
};

struct IbpReport {
  double form_value = 0.0;  // E(f,g)
  double ibp_value = 0.0;   // ∫ -Lf g dμ
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  std::vector<IbpStratum> per_stratum;
};

IbpReport check_ibp(const TestFunction& f, const TestFunction& g, const DensityModel& rho,
                    const StickyMeasureSpec& spec);

// |∫ Lf dμ| / μ(E): vanishes because 1 lies in the form domain with zero
// energy.
double check_invariance(const TestFunction& f, const DensityModel& rho,
                        const StickyMeasureSpec& spec);

struct IbpConvergence {
  std::vector<std::size_t> nodes;
  std::vector<double> residuals;  // relative
  // Smallest log2 ratio between consecutive levels that are both above the
  // round-off floor; +inf if the first level is already at the floor.
  double observed_order = 0.0;
};

// Residual of check_ibp for nodes_per_axis = start, 2 start, 4 start, ...
IbpConvergence ibp_convergence(const TestFunction& f, const TestFunction& g,
                               const DensityModel& rho, const StickyMeasureSpec& spec,
                               std::size_t start = 2, std::size_t levels = 3,
                               double floor = 1e-13);

}  // namespace sticky
