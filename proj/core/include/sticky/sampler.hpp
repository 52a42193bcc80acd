#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sticky/density.hpp"
#include "sticky/quadrature.hpp"
#include "sticky/rng.hpp"
#include "sticky/strata.hpp"

namespace sticky {

struct SamplerConfig {
  std::size_t n_samples = 10000;
  std::size_t burn_in = 100;     // sweeps
  std::size_t thin = 1;          // sweeps between kept samples
  std::size_t grid_nodes = 512;  // panels of the tabulated conditional
  std::uint64_t seed = 1;

  void validate() const;
};

// The one-dimensional conditional law of x_j given the other coordinates:
// an atom at 0 with weight β ρ(x|x_j=0) and the continuous density
// t ↦ ρ(x|x_j=t) on (0, L], tabulated on a uniform grid. Within a panel the
// CDF is linear (trapezoidal panel mass, uniform position).
class ConditionalTable {
 public:
  ConditionalTable(std::span<const double> state, std::size_t j, const DensityModel& rho,
                   const StickyMeasureSpec& spec, std::size_t grid_nodes);

  double atom_probability() const { return atom_; }
  // Probability of panel k, i.e. of (k·L/G, (k+1)·L/G].
  const std::vector<double>& panel_probabilities() const { return panel_; }
  double panel_width() const { return width_; }

  // CDF of the tabulated law at t ∈ [0, L].
  double cdf(double t) const;
  double sample(Rng& rng) const;

 private:
  double atom_ = 0.0;
  double width_ = 0.0;
  std::vector<double> panel_;
  std::vector<double> cumulative_;  // cumulative_[k] = atom + Σ_{i<k} panel_i
};

// Draw a new value for coordinate j from its exact tabulated conditional.
// Throws NumericError when the conditional has no representable mass.
double conditional_coordinate_sample(std::span<const double> state, std::size_t j,
                                     const DensityModel& rho, const StickyMeasureSpec& spec,
                                     std::size_t grid_nodes, Rng& rng);

struct SampleSet {
  std::size_t n = 0;
  std::vector<double> samples;              // row-major, n_samples × n
  std::vector<std::size_t> stratum_counts;  // indexed by StratumIndex::mask()
  std::vector<std::size_t> atom_counts;     // per coordinate, x_j == 0

  std::size_t size() const { return n == 0 ? 0 : samples.size() / n; }
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(samples).subspan(i * n, n);
  }
  double stratum_frequency(StratumIndex b) const;
  double atom_frequency(std::size_t j) const;
};

// Systematic-scan Gibbs sweeps started from the origin. Sweep s draws from
// the sub-stream derive_seed(seed, s), so the output only depends on
// (seed, config).
SampleSet sample_invariant(const DensityModel& rho, const StickyMeasureSpec& spec,
                           const SamplerConfig& cfg);

}  // namespace sticky
