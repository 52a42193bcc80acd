#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sticky/chain.hpp"
#include "sticky/density.hpp"
#include "sticky/form.hpp"
#include "sticky/quadrature.hpp"

namespace sticky {

using Observable = std::function<double(std::span<const double>)>;

// Absolute slack added to every 3σ comparison so that exactly reproduced
// targets (SE = 0, e.g. f ≡ 1) are not failed by round-off.
inline constexpr double kPassFloor = 1e-12;
inline constexpr std::size_t kMinBatches = 16;

// Equal-time batch means over [0, horizon] for a piecewise-constant
// observable.
class BatchMeans {
 public:
  explicit BatchMeans(double horizon, std::size_t n_batches = 32);

  // Adds value · duration, split across batch boundaries.
  void add(double start, double duration, double value);

  std::size_t n_batches() const { return integrals_.size(); }
  double batch_length() const { return length_; }
  double mean() const;
  // Standard error of mean(); NaN with fewer than two batches.
  double standard_error() const;
  const std::vector<double>& batch_integrals() const { return integrals_; }

 private:
  double horizon_;
  double length_;
  std::vector<double> integrals_;
};

// SE of the mean of equal-length batch means.
double batch_standard_error(std::span<const double> batch_means);

struct ErgodicReport {
  std::string label;
  double average = 0.0;
  double target = 0.0;
  double se = 0.0;
  std::size_t n_batches = 0;
  bool se_available = false;
  bool pass = false;
};

ErgodicReport make_ergodic_report(std::string label, const BatchMeans& batches, double target);

// Time average of f accumulated online during simulate().
class ErgodicObserver : public PathObserver {
 public:
  ErgodicObserver(Observable f, double horizon, std::size_t n_batches = 32);
  void on_hold(std::span<const double> x, double start, double duration) override;
  const BatchMeans& batches() const { return batches_; }

 private:
  Observable f_;
  BatchMeans batches_;
};

// ∫ f dμ / μ(E) by stratified quadrature.
double ergodic_target(const Observable& f, const DensityModel& rho, const StickyMeasureSpec& spec);

// Time average of f over a trajectory with a full event log, with batch-means
// SE, compared against `target`.
ErgodicReport ergodic_average(const Trajectory& traj, const Observable& f, double target,
                              std::string label = "f", std::size_t n_batches = 32);

struct OccupancyRow {
  std::string observable;
  double estimate = 0.0;
  double target = 0.0;
  double se = 0.0;
  bool pass = false;
};

// Per-coordinate zero fractions against boundary_mass_ratio and per-stratum
// fractions against the quadrature oracle, each with a 3σ batch-means test.
std::vector<OccupancyRow> occupancy_report(const Trajectory& traj, const DensityModel& rho,
                                           const StickyMeasureSpec& spec);

// One path's martingale increment M_t = f(X_t) - f(X_0) - ∫₀ᵗ Lf(X_s) ds and
// its compensator ∫₀ᵗ energy_density(f, X_s) ds.
struct MartingaleSample {
  double m = 0.0;
  double compensator = 0.0;
};

class MartingaleObserver : public PathObserver {
 public:
  MartingaleObserver(const TestFunction& f, const DensityModel& rho, double beta);
  void on_hold(std::span<const double> x, double start, double duration) override;
  double generator_integral() const { return generator_integral_; }
  double compensator() const { return compensator_; }

 private:
  const TestFunction& f_;
  const DensityModel& rho_;
  double beta_;
  double generator_integral_ = 0.0;
  double compensator_ = 0.0;
};

// From a full event log. Throws DomainError if the path is shorter than t.
MartingaleSample martingale_increment(const Trajectory& traj, const TestFunction& f,
                                      const DensityModel& rho, double beta, double t);

// n_paths independent paths from x0 to time scheme.T; path i uses RNG
// sub-stream i of scheme.seed. Results are in path order.
std::vector<MartingaleSample> martingale_ensemble(std::span<const double> x0,
                                                  const TestFunction& f, const DensityModel& rho,
                                                  double beta, const GridSchemeSpec& scheme,
                                                  std::size_t n_paths,
                                                  std::size_t workers = 1);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe martingale_residual(std::span<const MartingaleSample> paths);

struct QvRatio {
  double ratio = 0.0;
  bool degenerate = false;  // zero compensator: f constant on the visited strata
};

// E[M_t²] / E[⟨M⟩_t].
QvRatio qv_ratio(std::span<const MartingaleSample> paths);

// Right local time at 0 from the occupation near the boundary:
// (1/ε) ∫ 1_{[0,ε)}(X^j) d⟨X^j⟩ with d⟨X^j⟩ = 2·1_{X^j>0} dt, i.e.
// (2/ε)·time with 0 < x_j ≤ ε on the grid. Tends to 2·local_time.
double epsilon_local_time(const Trajectory& traj, std::size_t j, double eps);

// Central local time (1/2ε) ∫ 1_{(-ε,ε)}(X^j) d⟨X^j⟩; half of the above and
// an estimator of local_time itself.
double central_local_time_estimate(const Trajectory& traj, std::size_t j, double eps);

}  // namespace sticky
