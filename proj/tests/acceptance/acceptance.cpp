// Acceptance gate. Every check prints one PASS/FAIL line followed by indented
// detail lines for its sub-cases. Exit status is the number of failed checks.

#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sticky/chain.hpp"
#include "sticky/form.hpp"
#include "sticky/parallel.hpp"
#include "sticky/quadrature.hpp"
#include "sticky/sampler.hpp"
#include "sticky/stats.hpp"
#include "sticky/wetting.hpp"

using namespace sticky;
using V = std::vector<double>;

namespace {

// Pinned tolerances.
constexpr double kSigmas = 3.0;
constexpr double kOccupationMaxSe = 0.01;
constexpr double kOccupationMaxSeconds = 120.0;
constexpr double kIbpExponentialTol = 1e-6;
constexpr double kIbpWettingTol = 1e-5;
constexpr double kIbpMinOrder = 2.0;
constexpr double kDetailedBalanceTol = 1e-12;
constexpr double kStationaryTol = 1e-10;
constexpr double kQvBand1 = 0.05;
constexpr double kQvBand2 = 0.07;
constexpr double kMartingaleMaxSeconds = 300.0;
constexpr double kChiSquareLevel = 1e-3;
constexpr double kLocalTimeLow = 0.8;
constexpr double kLocalTimeHigh = 1.2;
constexpr double kGeneratorMinOrder = 1.0;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void note(bool ok, const std::string& line) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "  ok   " : "  FAIL ") + line);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridSchemeSpec scheme(double h, double L, double T, std::uint64_t seed) {
  GridSchemeSpec s;
  s.h = h;
  s.L = L;
  s.T = T;
  s.seed = seed;
  return s;
}

bool within(double estimate, double target, double se) {
  return std::abs(estimate - target) <= kSigmas * se + kPassFloor;
}

// Zero-occupation fraction of coordinate j with its batch-means SE.
MeanSe zero_fraction(const Trajectory& traj, std::size_t j) {
  const std::size_t masks = std::size_t{1} << traj.n;
  std::vector<double> means(traj.n_batches, 0.0);
  for (std::size_t b = 0; b < traj.n_batches; ++b) {
    for (std::size_t m = 0; m < masks; ++m)
      if (!((m >> j) & 1u)) means[b] += traj.batch_stratum_time[b * masks + m];
    means[b] /= traj.batch_length;
  }
  return {occupation_fraction(traj, OccupationPredicate::zero(j)), batch_standard_error(means)};
}

// ---------------------------------------------------------------------------

Trajectory g_one_dim_run;  // shared by the occupation and local-time checks

Outcome occupation_1d() {
  Outcome out;
  auto rho = make_exponential_density({1.0});
  const auto t0 = std::chrono::steady_clock::now();
  g_one_dim_run = simulate(V{0.0}, rho, 1.0, scheme(0.02, 25.0, 2e5, 1));
  const double elapsed = seconds_since(t0);
  const auto z = zero_fraction(g_one_dim_run, 0);
  const double target = oracle::exponential_atom_probability(1.0);
  out.note(within(z.mean, target, z.se),
           fmt("fraction at 0 = %.5f, target %.5f, SE %.5f, z = %+.2f", z.mean, target, z.se,
               (z.mean - target) / z.se));
  out.note(z.se <= kOccupationMaxSe, fmt("SE %.5f <= %.2f", z.se, kOccupationMaxSe));
  out.note(elapsed <= kOccupationMaxSeconds,
           fmt("simulation %.1f s (%.3g events, %.1f ns/event)", elapsed,
               static_cast<double>(g_one_dim_run.events),
               1e9 * elapsed / static_cast<double>(g_one_dim_run.events)));
  out.note(!g_one_dim_run.truncated, "run reached the horizon");
  return out;
}

Outcome beta_sweep() {
  Outcome out;
  auto rho = make_exponential_density({1.0});
  const double betas[] = {0.1, 0.5, 1.0, 2.0, 10.0};
  double prev = -1.0;
  std::uint64_t seed = 2;
  for (double beta : betas) {
    auto traj = simulate(V{0.0}, rho, beta, scheme(0.02, 25.0, 4e4, seed++));
    const auto z = zero_fraction(traj, 0);
    const double target = oracle::exponential_atom_probability(beta);
    out.note(within(z.mean, target, z.se),
             fmt("beta %-4g fraction %.5f, target %.5f, SE %.5f, z = %+.2f", beta, z.mean,
                 target, z.se, (z.mean - target) / z.se));
    out.note(z.mean > prev, fmt("beta %-4g increases on the previous fraction", beta));
    prev = z.mean;
  }
  return out;
}

Outcome wetting_occupancy() {
  Outcome out;
  LatticeSpec lat(1, 2);
  auto rho = make_wetting_density(lat, make_gaussian_potential());
  StickyMeasureSpec spec{2, 1.0, 10.0, 32};

  // The quadrature oracle itself against the closed-form masses.
  const auto masses = stratum_masses(rho, spec);
  oracle::WettingTwoSiteMasses ref;
  const double closed[] = {ref.origin, ref.one, ref.two, ref.both};
  std::size_t k = 0;
  for (const auto& [b, c] : masses.mass) {
    out.note(std::abs(c - closed[k]) <= 1e-8 * closed[k],
             fmt("oracle mass %s = %.10f (closed form %.10f)", b.to_string().c_str(), c,
                 closed[k]));
    ++k;
  }

  auto traj = simulate(V{0.0, 0.0}, rho, 1.0, scheme(0.01, 10.0, 2e4, 3));
  for (const auto& row : occupancy_report(traj, rho, spec))
    out.note(row.pass, fmt("%-12s %.5f, target %.5f, SE %.5f, z = %+.2f", row.observable.c_str(),
                           row.estimate, row.target, row.se,
                           (row.estimate - row.target) / row.se));
  return out;
}

Outcome ibp_identity() {
  Outcome out;
  const std::vector<std::vector<double>> rates{{1.0}, {1.0, 0.5}, {1.0, 0.5, 2.0}};
  const double support = 2.0;
  for (const auto& c : rates) {
    const std::size_t n = c.size();
    auto rho = make_exponential_density(c);
    StickyMeasureSpec spec{n, 0.7, 40.0, 16};
    auto fam = builtin_test_functions(n, support);
    double worst = 0.0;
    for (const auto& f : fam)
      for (const auto& g : fam) worst = std::max(worst, check_ibp(f, g, rho, spec).rel_residual);
    out.note(worst < kIbpExponentialTol,
             fmt("exponential n=%zu: %zu pairs, max relative residual %.2e", n,
                 fam.size() * fam.size(), worst));
    double order = std::numeric_limits<double>::infinity();
    for (std::size_t i : {std::size_t{0}, fam.size() / 2, fam.size() - 1}) {
      auto conv = ibp_convergence(fam[i], fam[fam.size() - 1 - i], rho, spec, 2, 3);
      order = std::min(order, conv.observed_order);
    }
    out.note(order >= kIbpMinOrder, fmt("exponential n=%zu: observed order %.2f", n, order));
  }

  auto wet = make_wetting_density(LatticeSpec(1, 2), make_gaussian_potential());
  StickyMeasureSpec wspec{2, 1.0, 10.0, 16};
  auto fam = builtin_test_functions(2, support);
  double worst = 0.0;
  for (const auto& f : fam)
    for (const auto& g : fam) worst = std::max(worst, check_ibp(f, g, wet, wspec).rel_residual);
  out.note(worst < kIbpWettingTol,
           fmt("wetting d=1 N=2: %zu pairs, max relative residual %.2e", fam.size() * fam.size(),
               worst));
  double order = std::numeric_limits<double>::infinity();
  for (std::size_t i : {std::size_t{0}, std::size_t{4}, std::size_t{8}})
    order = std::min(order, ibp_convergence(fam[i], fam[8 - i], wet, wspec, 2, 3).observed_order);
  out.note(order >= kIbpMinOrder, fmt("wetting d=1 N=2: observed order %.2f", order));
  return out;
}

Outcome reversibility() {
  Outcome out;
  struct Case {
    std::string label;
    DensityModel rho;
    double beta;
  };
  std::vector<Case> cases{
      {"exponential n=1", make_exponential_density({1.0}), 1.0},
      {"gaussian n=1", make_gaussian_density({0.8}), 0.3},
      {"exponential n=2", make_exponential_density({1.0, 0.5}), 2.0},
      {"gaussian n=2", make_gaussian_density({1.0, 0.6}), 1.0},
      {"wetting d=1 N=2 quartic", make_wetting_density(LatticeSpec(1, 2), make_quartic_potential()),
       0.7}};
  for (const auto& c : cases) {
    for (int levels : {4, 8}) {
      const double h = 0.25;
      auto s = scheme(h, levels * h, 1.0, 1);
      const double db = max_detailed_balance_error(c.rho, c.beta, s);
      const auto st = exact_stationary(c.rho, c.beta, s);
      out.note(db <= kDetailedBalanceTol && st.max_abs_difference <= kStationaryTol,
               fmt("%-24s L/h=%d: detailed balance %.1e, stationary %.1e", c.label.c_str(),
                   levels, db, st.max_abs_difference));
    }
  }
  return out;
}

Outcome martingale_qv() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t paths = 10000;
  const double support = 5.0;
  for (std::size_t n : {1u, 2u}) {
    auto rho = make_exponential_density(std::vector<double>(n, 1.0));
    auto f = TestFunction::product(std::vector<Profile>(n, Profile::Vanishing),
                                   std::vector<double>(n, support));
    auto ens = martingale_ensemble(V(n, 0.0), f, rho, 1.0, scheme(0.01, 10.0, 1.0, 1), paths,
                                   worker_count());
    const auto res = martingale_residual(ens);
    const auto qv = qv_ratio(ens);
    const double band = n == 1 ? kQvBand1 : kQvBand2;
    out.note(std::abs(res.mean) <= kSigmas * res.se,
             fmt("n=%zu: mean M = %+.3e, SE %.3e, z = %+.2f", n, res.mean, res.se,
                 res.mean / res.se));
    out.note(!qv.degenerate && std::abs(qv.ratio - 1.0) <= band,
             fmt("n=%zu: E[M^2]/E[<M>] = %.4f (band 1 +- %.2f)", n, qv.ratio, band));
  }
  const double elapsed = seconds_since(t0);
  out.note(elapsed <= kMartingaleMaxSeconds, fmt("ensembles %.1f s", elapsed));
  return out;
}

// Batch-means SE of the frequency of `ind` over 32 consecutive blocks.
double sample_batch_se(const SampleSet& s, const std::function<bool(std::span<const double>)>& ind) {
  const std::size_t batches = 32, per = s.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) means[b] += ind(s.sample(i));
    means[b] /= static_cast<double>(per);
  }
  return batch_standard_error(means);
}

double frozen_chi_square_pvalue(const ConditionalTable& table, std::size_t draws,
                                std::uint64_t seed) {
  std::vector<double> expected{table.atom_probability() * draws};
  std::vector<double> edges{0.0};
  double acc = 0.0;
  const auto& panels = table.panel_probabilities();
  for (std::size_t k = 0; k < panels.size(); ++k) {
    acc += panels[k] * draws;
    if (acc >= 5.0) {
      expected.push_back(acc);
      edges.push_back((k + 1) * table.panel_width());
      acc = 0.0;
    }
  }
  expected.back() += acc;
  edges.back() = std::numeric_limits<double>::infinity();
  std::vector<double> observed(expected.size(), 0.0);
  Rng rng(seed, 0);
  for (std::size_t i = 0; i < draws; ++i) {
    const double x = table.sample(rng);
    if (x == 0.0) {
      observed[0] += 1;
      continue;
    }
    auto it = std::lower_bound(edges.begin() + 1, edges.end(), x);
    observed[static_cast<std::size_t>(it - edges.begin())] += 1;
  }
  double chi2 = 0.0;
  for (std::size_t c = 0; c < expected.size(); ++c)
    chi2 += (observed[c] - expected[c]) * (observed[c] - expected[c]) / expected[c];
  boost::math::chi_squared dist(static_cast<double>(expected.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, chi2));
}

Outcome sampler_agreement() {
  Outcome out;
  struct Model {
    std::string label;
    DensityModel rho;
    double length;
  };
  std::vector<Model> models;
  const double rates[] = {1.0, 0.5, 2.0, 1.5};
  const double scales[] = {1.0, 0.7, 1.5, 1.2};
  for (std::size_t n = 1; n <= 4; ++n) {
    models.push_back({"exponential n=" + std::to_string(n),
                      make_exponential_density(V(rates, rates + n)), 40.0});
    models.push_back({"gaussian n=" + std::to_string(n),
                      make_gaussian_density(V(scales, scales + n)), 12.0});
  }
  for (const char* pot : {"gaussian", "quartic", "smoothed-well"}) {
    const double length = std::string(pot) == "smoothed-well" ? 30.0 : 10.0;
    for (auto [d, side] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{1, 3}, std::pair{1, 4},
                           std::pair{2, 2}}) {
      LatticeSpec lat(d, side);
      models.push_back({fmt("wetting %s d=%d N=%d", pot, d, side),
                        make_wetting_density(lat, make_potential(pot)), length});
    }
  }

  std::uint64_t seed = 100;
  std::size_t comparisons = 0, misses = 0;
  for (const auto& m : models) {
    const std::size_t n = m.rho.dim();
    // Panels per free axis for the oracle; the full stratum costs (4·panels)^n.
    StickyMeasureSpec spec{n, 1.0, m.length, n <= 3 ? std::size_t{32} : std::size_t{24}};
    SamplerConfig cfg;
    cfg.n_samples = 100000;
    cfg.seed = seed++;
    const auto s = sample_invariant(m.rho, spec, cfg);
    const auto masses = stratum_masses(m.rho, spec);
    double worst = 0.0;
    std::string worst_label;
    auto compare = [&](const std::string& what, double freq, double target, double se) {
      ++comparisons;
      const double z = std::abs(freq - target) / se;
      if (!within(freq, target, se)) ++misses;
      if (z > worst) {
        worst = z;
        worst_label = what;
      }
    };
    for (std::size_t j = 0; j < n; ++j) {
      double target = 0.0;
      for (auto b : enumerate_strata(n))
        if (!b.contains(j)) target += masses.probability(b, spec.beta);
      compare(fmt("atom[%zu]", j + 1), s.atom_frequency(j), target,
              sample_batch_se(s, [j](auto x) { return x[j] == 0.0; }));
    }
    for (auto b : enumerate_strata(n))
      compare("stratum[" + b.bit_string(n) + "]", s.stratum_frequency(b),
              masses.probability(b, spec.beta),
              sample_batch_se(s, [b](auto x) { return stratum_of(x) == b; }));
    out.note(worst <= kSigmas, fmt("%-28s largest |z| = %.2f at %s", m.label.c_str(), worst,
                                   worst_label.c_str()));
  }
  out.details.push_back(fmt("  %zu comparisons, %zu beyond 3 sigma", comparisons, misses));

  // Frozen one-dimensional conditionals.
  struct Frozen {
    std::string label;
    DensityModel rho;
    V state;
    std::size_t j;
    double length;
  };
  std::vector<Frozen> frozen{
      {"exponential n=1", make_exponential_density({1.0}), V{0.0}, 0, 40.0},
      {"gaussian n=2", make_gaussian_density({1.0, 0.7}), V{0.3, 0.0}, 1, 12.0},
      {"wetting gaussian d=1 N=3", make_wetting_density(LatticeSpec(1, 3), make_gaussian_potential()),
       V{0.5, 0.0, 1.2}, 1, 10.0},
      {"wetting quartic d=2 N=2", make_wetting_density(LatticeSpec(2, 2), make_quartic_potential()),
       V{0.0, 0.8, 0.0, 0.4}, 3, 10.0},
      {"wetting smoothed-well d=1 N=2",
       make_wetting_density(LatticeSpec(1, 2), make_smoothed_well_potential()), V{2.0, 0.0}, 1,
       30.0}};
  std::uint64_t chi_seed = 500;
  for (const auto& fz : frozen) {
    StickyMeasureSpec spec{fz.rho.dim(), 1.0, fz.length, 32};
    ConditionalTable table(fz.state, fz.j, fz.rho, spec, 512);
    const double p = frozen_chi_square_pvalue(table, 100000, chi_seed++);
    out.note(p > kChiSquareLevel, fmt("chi-square %-28s p = %.4f", fz.label.c_str(), p));
  }
  return out;
}

Outcome local_time_relation() {
  Outcome out;
  const auto& traj = g_one_dim_run;
  if (traj.events == 0) {
    out.note(false, "one-dimensional run unavailable");
    return out;
  }
  const double eps = 10 * traj.h;
  const double right = epsilon_local_time(traj, 0, eps);
  const double ell = local_time(traj, 0, 1.0);
  const double ratio = right / (2 * ell);
  out.note(ratio >= kLocalTimeLow && ratio <= kLocalTimeHigh,
           fmt("eps = 10h: epsilon local time %.1f, local time %.1f, ratio %.4f", right, ell,
               ratio));
  return out;
}

Outcome generator_consistency() {
  Outcome out;
  struct Case {
    std::string label;
    DensityModel rho;
    double beta;
    std::vector<V> points;
  };
  std::vector<Case> cases{
      {"exponential n=1", make_exponential_density({1.0}), 1.0, {V{0.0}, V{0.4}}},
      {"gaussian n=2", make_gaussian_density({1.0, 0.7}), 0.5,
       {V{0.0, 0.0}, V{0.4, 0.0}, V{0.0, 0.6}, V{0.4, 0.6}}},
      {"wetting d=1 N=2", make_wetting_density(LatticeSpec(1, 2), make_gaussian_potential()), 2.0,
       {V{0.0, 0.0}, V{0.8, 0.0}, V{0.4, 0.6}}}};
  const double steps[] = {0.1, 0.05, 0.025};
  for (const auto& c : cases) {
    const std::size_t n = c.rho.dim();
    auto f = TestFunction::product(std::vector<Profile>(n, Profile::Mixed), V(n, 2.0));
    auto F = [&](std::span<const double> x) { return f.value(x); };
    for (const auto& x : c.points) {
      const double exact = apply_generator(f, x, c.rho, c.beta);
      double err[3];
      for (int k = 0; k < 3; ++k)
        err[k] = std::abs(discrete_generator(F, x, c.rho, c.beta, scheme(steps[k], 4.0, 1.0, 1)) -
                          exact);
      const double order = std::min(std::log2(err[0] / err[1]), std::log2(err[1] / err[2]));
      std::ostringstream pt;
      for (std::size_t i = 0; i < n; ++i) pt << (i ? "," : "") << x[i];
      out.note(order >= kGeneratorMinOrder,
               fmt("%-16s x=(%s): errors %.2e %.2e %.2e, order %.2f", c.label.c_str(),
                   pt.str().c_str(), err[0], err[1], err[2], order));
    }
  }
  return out;
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    Outcome (*run)();
  };
  const Check checks[] = {
      {"occupation-1d", occupation_1d},
      {"beta-sweep", beta_sweep},
      {"wetting-occupancy", wetting_occupancy},
      {"ibp-identity", ibp_identity},
      {"reversibility", reversibility},
      {"martingale-qv", martingale_qv},
      {"sampler-agreement", sampler_agreement},
      {"local-time", local_time_relation},
      {"generator-consistency", generator_consistency},
  };
  int failed = 0;
  for (const auto& c : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.note(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %-22s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name, seconds_since(t0));
    for (const auto& d : o.details) std::printf("%s\n", d.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu checks failed\n", failed, std::size(checks));
  return failed > 125 ? 125 : failed;
}
