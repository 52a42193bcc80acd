#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sticky/density.hpp"
#include "sticky/strata.hpp"

namespace sticky {

// Space-time discretization for the grid chain: states live in
// {0, h, ..., L}^n with a reflecting wall at L.
struct GridSchemeSpec {
  double h = 0.02;
  double L = 25.0;
  double T = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t max_events = 20'000'000'000ULL;

  void validate() const;
  // L / h, validated to be an integer >= 4.
  int levels() const;
};

struct CoordinateRates {
  double up = 0.0;
  double down = 0.0;
};

// Jump rates out of grid state x. For a wet coordinate (x_j > 0):
//   x → x ± h e_j  at rate h⁻² exp(½[log ρ(x ± h e_j) - log ρ(x)]),
// with the up move suppressed at the wall x_j = L. For a dry coordinate
// (x_j = 0) only the up move exists, at rate (βh)⁻¹ exp(½[...]).
//
// The boundary rate is pinned from two sides. Detailed balance against the
// discretized measure, whose atom at 0 carries weight β while a grid cell
// carries h, forces rate(0→h)/rate(h→0) = h ρ(h) / (β ρ(0)); with
// rate(h→0) = h⁻² √(ρ(0)/ρ(h)) this gives (βh)⁻¹ √(ρ(h)/ρ(0)). And
// Σ rate·(f(y)-f(x)) at x_j = 0 is (1/β)(f(h)-f(0))/h + O(h) = (1/β)∂_j f + O(h),
// the Wentzell escape term of the generator.
//
// Throws DomainError if x is not a grid point of the scheme.
std::vector<CoordinateRates> build_rates(std::span<const double> x, const DensityModel& rho,
                                         double beta, const GridSchemeSpec& scheme);

// Σ_moves rate · (f(y) - f(x)).
double discrete_generator(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> x, const DensityModel& rho, double beta,
                          const GridSchemeSpec& scheme);

// Receives every holding interval of a simulated path, in time order.
class PathObserver {
 public:
  virtual ~PathObserver() = default;
  virtual void on_hold(std::span<const double> x, double start, double duration) = 0;
};

struct SimulationOptions {
  std::uint64_t stream = 0;      // RNG sub-stream (path index in ensembles)
  bool record_events = false;    // keep the event log
  std::size_t decimate = 1;      // keep every k-th event row
  std::size_t n_batches = 32;    // equal-time batches for per-batch occupations
  std::vector<PathObserver*> observers;
};

// Piecewise-constant path of the grid chain plus exact occupation
// bookkeeping. All time integrals are finite sums over holding intervals.
struct Trajectory {
  std::size_t n = 0;
  double h = 0.0;
  double horizon = 0.0;     // requested T
  double total_time = 0.0;  // == horizon unless truncated
  std::uint64_t events = 0;
  bool truncated = false;

  std::vector<double> x0;
  std::vector<double> final_state;

  // Occupation time of each stratum, indexed by mask (empty for n > 20).
  std::vector<double> stratum_time;
  // level_time[j][k]: time with x_j == k h.
  std::vector<std::vector<double>> level_time;

  // Equal-time batches over [0, horizon]; batch_stratum_time[b * 2^n + mask].
  std::size_t n_batches = 0;
  double batch_length = 0.0;
  std::vector<double> batch_stratum_time;

  // Event log: row i holds the state entered at event_times[i] (row 0 is
  // (0, x0)). Only a full log (decimate == 1) can be replayed.
  bool full_log = false;
  std::vector<double> event_times;
  std::vector<double> event_states;

  double zero_time(std::size_t j) const { return level_time.at(j).at(0); }
  std::size_t logged_rows() const { return event_times.size(); }
  std::span<const double> logged_state(std::size_t i) const {
    return std::span<const double>(event_states).subspan(i * n, n);
  }
};

// Exact-event (Gillespie) simulation from grid state x0 until T or
// max_events; a truncated run is flagged, not an error. The last holding
// interval is clipped so total_time == T.
Trajectory simulate(std::span<const double> x0, const DensityModel& rho, double beta,
                    const GridSchemeSpec& scheme, const SimulationOptions& options = {});

// ℓ^{0,j} = (1/β) · time with x_j = 0.
double local_time(const Trajectory& traj, std::size_t j, double beta);

// Zero-occupation of coordinate j recomputed from the event log.
double zero_time_from_log(const Trajectory& traj, std::size_t j);

struct OccupationPredicate {
  enum class Kind { Always, ZeroCoordinate, InStratum, OnBoundary, AtOrigin };
  Kind kind = Kind::Always;
  std::size_t coordinate = 0;
  StratumIndex stratum;

  static OccupationPredicate always() { return {}; }
  static OccupationPredicate zero(std::size_t j) { return {Kind::ZeroCoordinate, j, {}}; }
  static OccupationPredicate in_stratum(StratumIndex b) { return {Kind::InStratum, 0, b}; }
  static OccupationPredicate boundary() { return {Kind::OnBoundary, 0, {}}; }
  static OccupationPredicate origin() { return {Kind::AtOrigin, 0, {}}; }

  bool matches(StratumIndex b, std::size_t n) const;
  std::string label(std::size_t n) const;
};

// Time-weighted fraction of [0, total_time] spent where the predicate holds.
double occupation_fraction(const Trajectory& traj, const OccupationPredicate& predicate);

// Exact invariant law of the finite chain by a direct linear solve, next to
// the discretized measure π(x) ∝ ρ(x) Π_j w(x_j), w(0) = β, w(kh) = h.
struct ExactStationary {
  std::size_t n = 0;
  int levels = 0;
  std::vector<double> chain;        // solved stationary vector, states in
  std::vector<double> discretized;  // odometer order (coordinate 1 fastest)
  double max_abs_difference = 0.0;
};

// Limited to 4096 states.
ExactStationary exact_stationary(const DensityModel& rho, double beta,
                                 const GridSchemeSpec& scheme);

// Largest |π(x)q(x,y) - π(y)q(y,x)| / max(π(x)q(x,y), π(y)q(y,x)) over all
// edges of the grid (limited to 4096 states).
double max_detailed_balance_error(const DensityModel& rho, double beta,
                                  const GridSchemeSpec& scheme);

}  // namespace sticky
