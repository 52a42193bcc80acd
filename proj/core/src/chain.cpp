#include "sticky/chain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "sticky/errors.hpp"
#include "sticky/rng.hpp"

namespace sticky {

void GridSchemeSpec::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("GridSchemeSpec: h must be > 0");
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("GridSchemeSpec: L must be > 0");
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("GridSchemeSpec: T must be >= 0");
  const double ratio = L / h;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw DomainError("GridSchemeSpec: L must be an integer multiple of h");
  if (std::round(ratio) < 4) throw DomainError("GridSchemeSpec: L/h must be >= 4");
  if (std::round(ratio) > 1e8) throw DomainError("GridSchemeSpec: L/h too large");
}

int GridSchemeSpec::levels() const {
  validate();
  return static_cast<int>(std::lround(L / h));
}

namespace {

// Grid state with cached coordinates and per-coordinate jump rates.
class ChainState {
 public:
  ChainState(std::span<const double> x0, const DensityModel& rho, double beta,
             const GridSchemeSpec& scheme)
      : rho_(rho),
        h_(scheme.h),
        levels_(scheme.levels()),
        inv_h2_(1.0 / (scheme.h * scheme.h)),
        inv_beta_h_(1.0 / (beta * scheme.h)),
        k_(x0.size()),
        x_(x0.size()),
        rates_(x0.size()) {
    if (!(beta > 0.0)) throw DomainError("grid chain: beta must be > 0");
    if (x0.size() != rho.dim()) throw DomainError("grid chain: state dimension != density dimension");
    for (std::size_t j = 0; j < x0.size(); ++j) {
      const double q = x0[j] / h_;
      const double r = std::round(q);
      if (!(x0[j] >= 0.0) || std::abs(q - r) > 1e-9 * std::max(1.0, q) || r > levels_) {
        std::ostringstream os;
        os << "grid chain: coordinate " << j + 1 << " = " << x0[j]
           << " is not a grid point of {0, h, ..., L}";
        throw DomainError(os.str());
      }
      k_[j] = static_cast<int>(r);
      x_[j] = static_cast<double>(k_[j]) * h_;
    }
    refresh_all();
  }

  std::size_t dim() const { return k_.size(); }
  std::span<const double> x() const { return x_; }
  int level(std::size_t j) const { return k_[j]; }
  const std::vector<CoordinateRates>& rates() const { return rates_; }
  double total_rate() const { return total_; }

  void refresh_all() {
    total_ = 0.0;
    for (std::size_t j = 0; j < k_.size(); ++j) {
      rates_[j] = coordinate_rates(j);
      total_ += rates_[j].up + rates_[j].down;
    }
  }

  // Moves coordinate j by ±1 level and refreshes rates. Rates of other
  // coordinates may depend on x_j through ρ, so all are recomputed.
  void move(std::size_t j, int step) {
    k_[j] += step;
    x_[j] = static_cast<double>(k_[j]) * h_;
    refresh_all();
  }

  // Index of the move selected by u ∈ [0, total): 2j is up, 2j+1 is down.
  std::size_t select(double u) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < rates_.size(); ++j) {
      acc += rates_[j].up;
      if (u < acc) return 2 * j;
      acc += rates_[j].down;
      if (u < acc) return 2 * j + 1;
    }
    // Round-off at the top end: last move with positive rate.
    for (std::size_t j = rates_.size(); j-- > 0;) {
      if (rates_[j].down > 0.0) return 2 * j + 1;
      if (rates_[j].up > 0.0) return 2 * j;
    }
    throw NumericError("grid chain: state has zero exit rate");
  }

 private:
  CoordinateRates coordinate_rates(std::size_t j) {
    CoordinateRates r;
    const double base = rho_.local_log_rho(x_, j);
    const double xj = x_[j];
    if (k_[j] < levels_) {
      x_[j] = xj + h_;
      const double up = rho_.local_log_rho(x_, j);
      r.up = (k_[j] == 0 ? inv_beta_h_ : inv_h2_) * std::exp(0.5 * (up - base));
    }
    if (k_[j] > 0) {
      x_[j] = xj - h_;
      // Land exactly on 0 so the dry stratum is hit.
      if (k_[j] == 1) x_[j] = 0.0;
      const double down = rho_.local_log_rho(x_, j);
      r.down = inv_h2_ * std::exp(0.5 * (down - base));
    }
    x_[j] = xj;
    if (!std::isfinite(r.up) || !std::isfinite(r.down))
      throw NumericError("grid chain: non-finite jump rate for coordinate " +
                         std::to_string(j + 1));
    return r;
  }

  const DensityModel& rho_;
  double h_;
  int levels_;
  double inv_h2_;
  double inv_beta_h_;
  std::vector<int> k_;
  std::vector<double> x_;
  std::vector<CoordinateRates> rates_;
  double total_ = 0.0;
};

constexpr std::size_t kMaxTrackedStrataDim = 20;

}  // namespace

std::vector<CoordinateRates> build_rates(std::span<const double> x, const DensityModel& rho,
                                         double beta, const GridSchemeSpec& scheme) {
  scheme.validate();
  ChainState s(x, rho, beta, scheme);
  return s.rates();
}

double discrete_generator(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> x, const DensityModel& rho, double beta,
                          const GridSchemeSpec& scheme) {
  const auto rates = build_rates(x, rho, beta, scheme);
  std::vector<double> y(x.begin(), x.end());
  const double fx = f(y);
  double s = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double xj = y[j];
    if (rates[j].up > 0.0) {
      y[j] = xj + scheme.h;
      s += rates[j].up * (f(y) - fx);
    }
    if (rates[j].down > 0.0) {
      y[j] = std::max(0.0, xj - scheme.h);
      if (y[j] < 0.5 * scheme.h) y[j] = 0.0;
      s += rates[j].down * (f(y) - fx);
    }
    y[j] = xj;
  }
  return s;
}

Trajectory simulate(std::span<const double> x0, const DensityModel& rho, double beta,
                    const GridSchemeSpec& scheme, const SimulationOptions& options) {
  scheme.validate();
  ChainState state(x0, rho, beta, scheme);
  const std::size_t n = state.dim();
  const int levels = scheme.levels();

  Trajectory traj;
  traj.n = n;
  traj.h = scheme.h;
  traj.horizon = scheme.T;
  traj.x0.assign(state.x().begin(), state.x().end());
  traj.level_time.assign(n, std::vector<double>(static_cast<std::size_t>(levels) + 1, 0.0));
  const bool track_strata = n <= kMaxTrackedStrataDim;
  const std::size_t n_masks = track_strata ? (std::size_t{1} << n) : 0;
  traj.stratum_time.assign(n_masks, 0.0);
  traj.n_batches = track_strata ? std::max<std::size_t>(options.n_batches, 1) : 0;
  traj.batch_length = traj.n_batches ? scheme.T / static_cast<double>(traj.n_batches) : 0.0;
  traj.batch_stratum_time.assign(traj.n_batches * n_masks, 0.0);
  const std::size_t decimate = std::max<std::size_t>(options.decimate, 1);
  traj.full_log = options.record_events && decimate == 1;

  auto log_row = [&](double t) {
    traj.event_times.push_back(t);
    traj.event_states.insert(traj.event_states.end(), state.x().begin(), state.x().end());
  };
  if (options.record_events) log_row(0.0);

  std::uint32_t mask = 0;
  for (std::size_t j = 0; j < n && track_strata; ++j)
    if (state.level(j) > 0) mask |= 1u << j;

  auto hold = [&](double start, double dt) {
    if (dt <= 0.0) return;
    for (std::size_t j = 0; j < n; ++j) traj.level_time[j][state.level(j)] += dt;
    if (track_strata) {
      traj.stratum_time[mask] += dt;
      // Split across equal-time batch boundaries.
      double t = start;
      const double end = start + dt;
      while (t < end) {
        auto b = static_cast<std::size_t>(t / traj.batch_length);
        if (b >= traj.n_batches) b = traj.n_batches - 1;
        const double batch_end =
            b + 1 == traj.n_batches ? end : std::min(end, static_cast<double>(b + 1) * traj.batch_length);
        const double piece = batch_end - t;
        if (piece <= 0.0) {
          // t sits on a boundary that rounding put in the previous batch.
          traj.batch_stratum_time[std::min(b + 1, traj.n_batches - 1) * n_masks + mask] += end - t;
          break;
        }
        traj.batch_stratum_time[b * n_masks + mask] += piece;
        t = batch_end;
      }
    }
    for (auto* obs : options.observers) obs->on_hold(state.x(), start, dt);
  };

  Rng rng(scheme.seed, options.stream);
  double t = 0.0;
  while (t < scheme.T) {
    const double rate = state.total_rate();
    if (!(rate > 0.0)) throw NumericError("grid chain: zero exit rate (absorbing state)");
    const double dt = rng.exponential(rate);
    if (t + dt >= scheme.T) {
      hold(t, scheme.T - t);
      t = scheme.T;
      break;
    }
    hold(t, dt);
    t += dt;
    const std::size_t move = state.select(rng.uniform() * rate);
    const std::size_t j = move / 2;
    const int step = (move % 2 == 0) ? +1 : -1;
    state.move(j, step);
    if (track_strata) {
      if (state.level(j) > 0) {
        mask |= 1u << j;
      } else {
        mask &= ~(1u << j);
      }
    }
    ++traj.events;
    if (options.record_events && traj.events % decimate == 0) log_row(t);
    if (traj.events >= scheme.max_events) {
      traj.truncated = true;
      break;
    }
  }
  traj.total_time = t;
  traj.final_state.assign(state.x().begin(), state.x().end());
  return traj;
}

double local_time(const Trajectory& traj, std::size_t j, double beta) {
  if (!(beta > 0.0)) throw DomainError("local_time: beta must be > 0");
  return traj.zero_time(j) / beta;
}

double zero_time_from_log(const Trajectory& traj, std::size_t j) {
  if (!traj.full_log) throw DomainError("zero_time_from_log: trajectory has no full event log");
  if (j >= traj.n) throw DomainError("zero_time_from_log: coordinate out of range");
  double s = 0.0;
  const std::size_t rows = traj.logged_rows();
  for (std::size_t i = 0; i < rows; ++i) {
    const double end = i + 1 < rows ? traj.event_times[i + 1] : traj.total_time;
    if (traj.logged_state(i)[j] == 0.0) s += end - traj.event_times[i];
  }
  return s;
}

bool OccupationPredicate::matches(StratumIndex b, std::size_t n) const {
  switch (kind) {
    case Kind::Always: return true;
    case Kind::ZeroCoordinate: return !b.contains(coordinate);
    case Kind::InStratum: return b == stratum;
    case Kind::OnBoundary: return b != StratumIndex::full(n);
    case Kind::AtOrigin: return b.empty();
  }
  return false;
}

std::string OccupationPredicate::label(std::size_t n) const {
  switch (kind) {
    case Kind::Always: return "always";
    case Kind::ZeroCoordinate: return "zero[" + std::to_string(coordinate + 1) + "]";
    case Kind::InStratum: return "stratum[" + stratum.bit_string(n) + "]";
    case Kind::OnBoundary: return "boundary";
    case Kind::AtOrigin: return "origin";
  }
  return "?";
}

double occupation_fraction(const Trajectory& traj, const OccupationPredicate& predicate) {
  if (!(traj.total_time > 0.0)) throw DomainError("occupation_fraction: empty trajectory");
  if (predicate.kind == OccupationPredicate::Kind::Always) return 1.0;
  if (predicate.kind == OccupationPredicate::Kind::ZeroCoordinate)
    return traj.zero_time(predicate.coordinate) / traj.total_time;
  if (traj.stratum_time.empty())
    throw DomainError("occupation_fraction: stratum bookkeeping unavailable for n > 20");
  double s = 0.0;
  for (std::size_t m = 0; m < traj.stratum_time.size(); ++m)
    if (predicate.matches(StratumIndex(static_cast<std::uint32_t>(m)), traj.n))
      s += traj.stratum_time[m];
  return s / traj.total_time;
}

namespace {

struct SmallGrid {
  std::size_t n;
  int levels;
  std::size_t states;

  SmallGrid(std::size_t dim, int lv) : n(dim), levels(lv), states(1) {
    for (std::size_t j = 0; j < n; ++j) {
      states *= static_cast<std::size_t>(levels + 1);
      if (states > 4096) throw DomainError("exact chain analysis limited to 4096 states");
    }
  }
  std::vector<int> decode(std::size_t s) const {
    std::vector<int> k(n);
    for (std::size_t j = 0; j < n; ++j) {
      k[j] = static_cast<int>(s % static_cast<std::size_t>(levels + 1));
      s /= static_cast<std::size_t>(levels + 1);
    }
    return k;
  }
  std::size_t encode(const std::vector<int>& k) const {
    std::size_t s = 0, stride = 1;
    for (std::size_t j = 0; j < n; ++j) {
      s += static_cast<std::size_t>(k[j]) * stride;
      stride *= static_cast<std::size_t>(levels + 1);
    }
    return s;
  }
};

// log of the discretized measure, shifted so its maximum is 0.
std::vector<double> discretized_log_weights(const SmallGrid& g, const DensityModel& rho,
                                            double beta, double h) {
  std::vector<double> lw(g.states);
  std::vector<double> x(g.n);
  for (std::size_t s = 0; s < g.states; ++s) {
    const auto k = g.decode(s);
    double l = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      x[j] = static_cast<double>(k[j]) * h;
      l += std::log(k[j] == 0 ? beta : h);
    }
    lw[s] = l + rho.log_rho(x);
  }
  const double top = *std::max_element(lw.begin(), lw.end());
  for (auto& v : lw) v -= top;
  return lw;
}

std::vector<double> state_point(const SmallGrid& g, std::size_t s, double h) {
  const auto k = g.decode(s);
  std::vector<double> x(g.n);
  for (std::size_t j = 0; j < g.n; ++j) x[j] = static_cast<double>(k[j]) * h;
  return x;
}

}  // namespace

ExactStationary exact_stationary(const DensityModel& rho, double beta,
                                 const GridSchemeSpec& scheme) {
  const SmallGrid g(rho.dim(), scheme.levels());
  Eigen::MatrixXd qt = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.states),
                                             static_cast<Eigen::Index>(g.states));
  for (std::size_t s = 0; s < g.states; ++s) {
    const auto x = state_point(g, s, scheme.h);
    const auto rates = build_rates(x, rho, beta, scheme);
    auto k = g.decode(s);
    double out = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      for (int step : {+1, -1}) {
        const double r = step > 0 ? rates[j].up : rates[j].down;
        if (r <= 0.0) continue;
        k[j] += step;
        const std::size_t t = g.encode(k);
        k[j] -= step;
        // (Q^T)_{t,s} = q(s → t)
        qt(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) += r;
        out += r;
      }
    }
    qt(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) -= out;
  }
  // Replace one balance equation by the normalization Σ π = 1.
  const auto last = static_cast<Eigen::Index>(g.states - 1);
  qt.row(last).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.states));
  rhs(last) = 1.0;
  const Eigen::VectorXd pi = qt.fullPivLu().solve(rhs);

  ExactStationary out;
  out.n = g.n;
  out.levels = g.levels;
  out.chain.assign(pi.data(), pi.data() + pi.size());
  const auto lw = discretized_log_weights(g, rho, beta, scheme.h);
  double z = 0.0;
  for (double l : lw) z += std::exp(l);
  out.discretized.resize(g.states);
  for (std::size_t s = 0; s < g.states; ++s) {
    out.discretized[s] = std::exp(lw[s]) / z;
    out.max_abs_difference =
        std::max(out.max_abs_difference, std::abs(out.discretized[s] - out.chain[s]));
  }
  return out;
}

double max_detailed_balance_error(const DensityModel& rho, double beta,
                                  const GridSchemeSpec& scheme) {
  const SmallGrid g(rho.dim(), scheme.levels());
  const auto lw = discretized_log_weights(g, rho, beta, scheme.h);
  double worst = 0.0;
  for (std::size_t s = 0; s < g.states; ++s) {
    const auto x = state_point(g, s, scheme.h);
    const auto rates = build_rates(x, rho, beta, scheme);
    auto k = g.decode(s);
    for (std::size_t j = 0; j < g.n; ++j) {
      if (rates[j].up <= 0.0) continue;
      ++k[j];
      const std::size_t t = g.encode(k);
      --k[j];
      const auto back = build_rates(state_point(g, t, scheme.h), rho, beta, scheme);
      const double forward_flow = std::exp(lw[s]) * rates[j].up;
      const double backward_flow = std::exp(lw[t]) * back[j].down;
      const double scale = std::max(forward_flow, backward_flow);
      if (scale > 0.0) worst = std::max(worst, std::abs(forward_flow - backward_flow) / scale);
    }
  }
  return worst;
}

}  // namespace sticky
