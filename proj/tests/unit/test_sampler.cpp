#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sticky/errors.hpp"
#include "sticky/sampler.hpp"
#include "sticky/stats.hpp"
#include "sticky/wetting.hpp"

using namespace sticky;
using V = std::vector<double>;

namespace {

// Fraction of draws equal to 0 among `draws` calls of the conditional
// sampler at a frozen state.
double atom_fraction(const DensityModel& rho, const StickyMeasureSpec& spec, V state,
                     std::size_t j, std::size_t draws, std::uint64_t seed) {
  Rng rng(seed, 0);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < draws; ++i)
    zeros += conditional_coordinate_sample(state, j, rho, spec, 512, rng) == 0.0;
  return static_cast<double>(zeros) / static_cast<double>(draws);
}

double binomial_se(double p, std::size_t n) { return std::sqrt(p * (1 - p) / n); }

// Batch-means SE of an indicator over consecutive sample blocks.
double indicator_batch_se(const SampleSet& s, const std::function<bool(std::span<const double>)>& ind) {
  const std::size_t batches = 32, per = s.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) means[b] += ind(s.sample(i));
    means[b] /= static_cast<double>(per);
  }
  return batch_standard_error(means);
}

}  // namespace

TEST_CASE("conditional atom probabilities") {
  const std::size_t draws = 100000;
  auto rho = make_exponential_density({1.0});
  StickyMeasureSpec spec{1, 1.0, 40.0, 16};
  double p = atom_fraction(rho, spec, V{0.0}, 0, draws, 1);
  CHECK(std::abs(p - 0.5) <= 3 * binomial_se(0.5, draws));

  spec.beta = 3.0;
  p = atom_fraction(rho, spec, V{0.0}, 0, draws, 2);
  CHECK(std::abs(p - 0.75) <= 3 * binomial_se(0.75, draws));
  ConditionalTable table(V{0.0}, 0, rho, spec, 512);
  CHECK(table.atom_probability() == doctest::Approx(0.75).epsilon(1e-4));

  auto wet = make_wetting_density(LatticeSpec(1, 1), make_gaussian_potential());
  StickyMeasureSpec wspec{1, 1.0, 10.0, 16};
  const double target = 1.0 / (1.0 + oracle::half_gaussian_mass());
  p = atom_fraction(wet, wspec, V{0.0}, 0, draws, 3);
  CHECK(std::abs(p - target) <= 3 * binomial_se(target, draws));
}

TEST_CASE("frozen conditional passes a chi-square test at 0.1%") {
  auto wet = make_wetting_density(LatticeSpec(1, 3), make_quartic_potential());
  StickyMeasureSpec spec{3, 0.8, 8.0, 16};
  V state{0.7, 0.0, 1.4};
  const std::size_t j = 1, draws = 100000;
  ConditionalTable table(state, j, wet, spec, 512);

  // Cells: the atom, then panels merged until each expects at least 5 draws.
  std::vector<double> expected{table.atom_probability() * draws};
  std::vector<double> edges{0.0};
  double acc = 0.0;
  const auto& panels = table.panel_probabilities();
  for (std::size_t k = 0; k < panels.size(); ++k) {
    acc += panels[k] * draws;
    if (acc >= 5.0 || k + 1 == panels.size()) {
      expected.push_back(acc);
      edges.push_back((k + 1) * table.panel_width());
      acc = 0.0;
    }
  }
  if (expected.back() < 5.0 && expected.size() > 2) {
    expected[expected.size() - 2] += expected.back();
    expected.pop_back();
    edges.erase(edges.end() - 2);
  }
  std::vector<double> observed(expected.size(), 0.0);
  Rng rng(17, 0);
  for (std::size_t i = 0; i < draws; ++i) {
    double x = table.sample(rng);
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
  const double pvalue = boost::math::cdf(boost::math::complement(dist, chi2));
  CAPTURE(chi2);
  CHECK(pvalue > 1e-3);
}

TEST_CASE("table cdf is monotone and reaches one") {
  auto rho = make_gaussian_density({1.0});
  ConditionalTable t(V{0.0}, 0, rho, {1, 1.0, 8.0, 16}, 64);
  CHECK(t.cdf(0.0) == doctest::Approx(t.atom_probability()));
  CHECK(t.cdf(8.0) == doctest::Approx(1.0));
  double prev = 0.0;
  for (double x = 0.0; x <= 8.0; x += 0.01) {
    CHECK(t.cdf(x) >= prev);
    prev = t.cdf(x);
  }
}

TEST_CASE("one-dimensional invariant sampling") {
  auto rho = make_exponential_density({1.0});
  SamplerConfig cfg;
  cfg.n_samples = 100000;
  auto s = sample_invariant(rho, {1, 1.0, 40.0, 16}, cfg);
  CHECK(s.size() == 100000);
  CHECK(std::abs(s.atom_frequency(0) - 0.5) <= 3 * binomial_se(0.5, 100000));
}

TEST_CASE("two-dimensional product exponential strata") {
  auto rho = make_exponential_density({1.0, 1.0});
  SamplerConfig cfg;
  cfg.n_samples = 100000;
  cfg.seed = 5;
  auto s = sample_invariant(rho, {2, 1.0, 40.0, 16}, cfg);
  for (auto b : enumerate_strata(2)) {
    double se = indicator_batch_se(s, [b](auto x) { return stratum_of(x) == b; });
    CHECK(std::abs(s.stratum_frequency(b) - 0.25) <= 3 * se + kPassFloor);
  }
}

TEST_CASE("two-site wetting strata match the closed form") {
  auto rho = make_wetting_density(LatticeSpec(1, 2), make_gaussian_potential());
  SamplerConfig cfg;
  cfg.n_samples = 100000;
  cfg.seed = 6;
  auto s = sample_invariant(rho, {2, 1.0, 10.0, 16}, cfg);
  oracle::WettingTwoSiteMasses m;
  const double z = m.origin + m.one + m.two + m.both;
  const std::pair<StratumIndex, double> targets[] = {
      {StratumIndex{}, m.origin / z},
      {StratumIndex::of({0}), m.one / z},
      {StratumIndex::of({1}), m.two / z},
      {StratumIndex::of({0, 1}), m.both / z}};
  for (auto [b, p] : targets) {
    double se = indicator_batch_se(s, [b](auto x) { return stratum_of(x) == b; });
    CAPTURE(b.to_string());
    CHECK(std::abs(s.stratum_frequency(b) - p) <= 3 * se + kPassFloor);
  }
}

TEST_CASE("determinism") {
  auto rho = make_gaussian_density({1.0, 2.0});
  SamplerConfig cfg;
  cfg.n_samples = 2000;
  cfg.seed = 42;
  auto a = sample_invariant(rho, {2, 0.5, 10.0, 16}, cfg);
  auto b = sample_invariant(rho, {2, 0.5, 10.0, 16}, cfg);
  CHECK(a.samples == b.samples);
  cfg.seed = 43;
  auto c = sample_invariant(rho, {2, 0.5, 10.0, 16}, cfg);
  CHECK(a.samples != c.samples);
}

TEST_CASE("config validation") {
  SamplerConfig cfg;
  cfg.n_samples = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.grid_nodes = 8;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}
