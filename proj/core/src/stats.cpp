#include "sticky/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sticky/errors.hpp"
#include "sticky/parallel.hpp"

namespace sticky {

BatchMeans::BatchMeans(double horizon, std::size_t n_batches)
    : horizon_(horizon),
      length_(horizon / static_cast<double>(std::max<std::size_t>(n_batches, 1))),
      integrals_(std::max<std::size_t>(n_batches, 1), 0.0) {
  if (!(horizon > 0.0)) throw DomainError("BatchMeans: horizon must be > 0");
}

void BatchMeans::add(double start, double duration, double value) {
  double t = start;
  const double end = start + duration;
  const std::size_t nb = integrals_.size();
  while (t < end) {
    auto b = static_cast<std::size_t>(t / length_);
    if (b >= nb) b = nb - 1;
    double stop = b + 1 == nb ? end : std::min(end, static_cast<double>(b + 1) * length_);
    if (stop <= t) {
      // Rounding placed t on the previous side of a boundary.
      b = std::min(b + 1, nb - 1);
      stop = b + 1 == nb ? end : std::min(end, static_cast<double>(b + 1) * length_);
      if (stop <= t) stop = end;
    }
    integrals_[b] += value * (stop - t);
    t = stop;
  }
}

double BatchMeans::mean() const {
  double s = 0.0;
  for (double v : integrals_) s += v;
  return s / horizon_;
}

double batch_standard_error(std::span<const double> means) {
  const std::size_t k = means.size();
  if (k < 2) return std::numeric_limits<double>::quiet_NaN();
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(k);
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
}

double BatchMeans::standard_error() const {
  std::vector<double> means(integrals_.size());
  for (std::size_t b = 0; b < means.size(); ++b) means[b] = integrals_[b] / length_;
  return batch_standard_error(means);
}

namespace {

bool within_three_sigma(double estimate, double target, double se) {
  return std::abs(estimate - target) <= 3.0 * se + kPassFloor * std::max(1.0, std::abs(target));
}

}  // namespace

ErgodicReport make_ergodic_report(std::string label, const BatchMeans& batches, double target) {
  ErgodicReport r;
  r.label = std::move(label);
  r.average = batches.mean();
  r.target = target;
  r.n_batches = batches.n_batches();
  r.se_available = r.n_batches >= kMinBatches;
  r.se = r.se_available ? batches.standard_error() : std::numeric_limits<double>::quiet_NaN();
  r.pass = r.se_available && within_three_sigma(r.average, r.target, r.se);
  return r;
}

ErgodicObserver::ErgodicObserver(Observable f, double horizon, std::size_t n_batches)
    : f_(std::move(f)), batches_(horizon, n_batches) {}

void ErgodicObserver::on_hold(std::span<const double> x, double start, double duration) {
  batches_.add(start, duration, f_(x));
}

double ergodic_target(const Observable& f, const DensityModel& rho,
                      const StickyMeasureSpec& spec) {
  const QuadratureOptions opt{{}, false};
  const auto num = stratified_integral(f, rho, spec, opt);
  const auto den =
      stratified_integral([](std::span<const double>) { return 1.0; }, rho, spec, opt);
  if (!(den.value > 0.0)) throw DegenerateModelError("ergodic_target: zero total mass");
  return num.value / den.value;
}

ErgodicReport ergodic_average(const Trajectory& traj, const Observable& f, double target,
                              std::string label, std::size_t n_batches) {
  if (!traj.full_log) throw DomainError("ergodic_average: trajectory has no full event log");
  if (!(traj.total_time > 0.0)) throw DomainError("ergodic_average: empty trajectory");
  BatchMeans batches(traj.total_time, n_batches);
  const std::size_t rows = traj.logged_rows();
  for (std::size_t i = 0; i < rows; ++i) {
    const double start = traj.event_times[i];
    const double end = i + 1 < rows ? traj.event_times[i + 1] : traj.total_time;
    batches.add(start, end - start, f(traj.logged_state(i)));
  }
  return make_ergodic_report(std::move(label), batches, target);
}

std::vector<OccupancyRow> occupancy_report(const Trajectory& traj, const DensityModel& rho,
                                           const StickyMeasureSpec& spec) {
  if (!(traj.total_time > 0.0)) throw DomainError("occupancy_report: empty trajectory");
  if (traj.stratum_time.empty() || traj.n_batches == 0)
    throw DomainError("occupancy_report: stratum bookkeeping unavailable");
  if (traj.n != spec.n) throw DomainError("occupancy_report: dimension mismatch");
  const std::size_t n = traj.n;
  const std::size_t masks = std::size_t{1} << n;
  const double blen = traj.batch_length;
  // A truncated run fills fewer batches; use the completed prefix.
  const std::size_t nb =
      traj.truncated ? std::min(traj.n_batches,
                                static_cast<std::size_t>(traj.total_time / blen))
                     : traj.n_batches;

  auto row_for = [&](std::string name, double target, auto&& selects) {
    OccupancyRow r;
    r.observable = std::move(name);
    r.target = target;
    double total = 0.0;
    for (std::size_t m = 0; m < masks; ++m)
      if (selects(StratumIndex(static_cast<std::uint32_t>(m)))) total += traj.stratum_time[m];
    r.estimate = total / traj.total_time;
    std::vector<double> means(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      double s = 0.0;
      for (std::size_t m = 0; m < masks; ++m)
        if (selects(StratumIndex(static_cast<std::uint32_t>(m))))
          s += traj.batch_stratum_time[b * masks + m];
      means[b] = s / blen;
    }
    r.se = batch_standard_error(means);
    r.pass = nb >= kMinBatches && within_three_sigma(r.estimate, r.target, r.se);
    return r;
  };

  std::vector<OccupancyRow> rows;
  for (std::size_t j = 0; j < n; ++j) {
    const auto ratio = boundary_mass_ratio(j, rho, spec);
    rows.push_back(row_for("zero[" + std::to_string(j + 1) + "]", ratio.ratio,
                           [j](StratumIndex b) { return !b.contains(j); }));
  }
  const auto masses = stratum_masses(rho, spec);
  for (auto b : enumerate_strata(n)) {
    rows.push_back(row_for("stratum[" + b.bit_string(n) + "]", masses.probability(b, spec.beta),
                           [b](StratumIndex s) { return s == b; }));
  }
  return rows;
}

MartingaleObserver::MartingaleObserver(const TestFunction& f, const DensityModel& rho,
                                       double beta)
    : f_(f), rho_(rho), beta_(beta) {}

void MartingaleObserver::on_hold(std::span<const double> x, double, double duration) {
  generator_integral_ += apply_generator(f_, x, rho_, beta_) * duration;
  compensator_ += energy_density(f_, x) * duration;
}

MartingaleSample martingale_increment(const Trajectory& traj, const TestFunction& f,
                                      const DensityModel& rho, double beta, double t) {
  if (!traj.full_log) throw DomainError("martingale_increment: trajectory has no full event log");
  if (traj.total_time < t) throw DomainError("martingale_increment: path shorter than t");
  MartingaleObserver obs(f, rho, beta);
  const std::size_t rows = traj.logged_rows();
  std::size_t last = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double start = traj.event_times[i];
    if (start > t) break;
    last = i;
    const double end = std::min(i + 1 < rows ? traj.event_times[i + 1] : traj.total_time, t);
    obs.on_hold(traj.logged_state(i), start, end - start);
  }
  MartingaleSample s;
  s.m = f.value(traj.logged_state(last)) - f.value(traj.logged_state(0)) -
        obs.generator_integral();
  s.compensator = obs.compensator();
  return s;
}

std::vector<MartingaleSample> martingale_ensemble(std::span<const double> x0,
                                                  const TestFunction& f, const DensityModel& rho,
                                                  double beta, const GridSchemeSpec& scheme,
                                                  std::size_t n_paths, std::size_t workers) {
  scheme.validate();
  std::vector<MartingaleSample> out(n_paths);
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        MartingaleObserver obs(f, rho, beta);
        SimulationOptions opt;
        opt.stream = i;
        opt.n_batches = 1;
        opt.observers = {&obs};
        const auto traj = simulate(x0, rho, beta, scheme, opt);
        if (traj.truncated) throw NumericError("martingale_ensemble: path hit max_events");
        out[i].m = f.value(traj.final_state) - f.value(traj.x0) - obs.generator_integral();
        out[i].compensator = obs.compensator();
      },
      workers);
  return out;
}

MeanSe martingale_residual(std::span<const MartingaleSample> paths) {
  MeanSe r;
  const std::size_t k = paths.size();
  if (k == 0) return r;
  for (const auto& p : paths) r.mean += p.m;
  r.mean /= static_cast<double>(k);
  if (k < 2) {
    r.se = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double ss = 0.0;
  for (const auto& p : paths) ss += (p.m - r.mean) * (p.m - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k));
  return r;
}

QvRatio qv_ratio(std::span<const MartingaleSample> paths) {
  double m2 = 0.0, comp = 0.0;
  for (const auto& p : paths) {
    m2 += p.m * p.m;
    comp += p.compensator;
  }
  QvRatio r;
  if (!(comp > 0.0)) {
    r.degenerate = true;
    r.ratio = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.ratio = m2 / comp;
  return r;
}

double epsilon_local_time(const Trajectory& traj, std::size_t j, double eps) {
  if (!(eps > 0.0)) throw DomainError("epsilon_local_time: eps must be > 0");
  const auto& levels = traj.level_time.at(j);
  const auto top = static_cast<std::size_t>(std::floor(eps / traj.h + 1e-9));
  double near = 0.0;
  for (std::size_t k = 1; k <= top && k < levels.size(); ++k) near += levels[k];
  return 2.0 * near / eps;
}

double central_local_time_estimate(const Trajectory& traj, std::size_t j, double eps) {
  return 0.5 * epsilon_local_time(traj, j, eps);
}

}  // namespace sticky
