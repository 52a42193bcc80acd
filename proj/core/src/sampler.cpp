#include "sticky/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sticky/errors.hpp"

namespace sticky {

void SamplerConfig::validate() const {
  if (n_samples < 1) throw DomainError("SamplerConfig: n_samples must be >= 1");
  if (grid_nodes < 16) throw DomainError("SamplerConfig: grid_nodes must be >= 16");
  if (thin < 1) throw DomainError("SamplerConfig: thin must be >= 1");
}

ConditionalTable::ConditionalTable(std::span<const double> state, std::size_t j,
                                   const DensityModel& rho, const StickyMeasureSpec& spec,
                                   std::size_t grid_nodes) {
  if (j >= state.size()) throw DomainError("ConditionalTable: coordinate out of range");
  if (grid_nodes < 1) throw DomainError("ConditionalTable: grid_nodes must be positive");
  std::vector<double> x(state.begin(), state.end());
  width_ = spec.length / static_cast<double>(grid_nodes);

  // log ρ along the axis, up to a constant independent of x_j.
  std::vector<double> logs(grid_nodes + 1);
  for (std::size_t k = 0; k <= grid_nodes; ++k) {
    x[j] = k == grid_nodes ? spec.length : static_cast<double>(k) * width_;
    logs[k] = rho.local_log_rho(x, j);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logs)
    if (std::isfinite(l)) top = std::max(top, l);
  if (!std::isfinite(top))
    throw NumericError("conditional of coordinate " + std::to_string(j + 1) +
                       " has no finite log-density on the grid");

  // Weights relative to the largest tabulated density (log-sum-exp).
  std::vector<double> w(grid_nodes + 1);
  for (std::size_t k = 0; k <= grid_nodes; ++k)
    w[k] = std::isfinite(logs[k]) ? std::exp(logs[k] - top) : 0.0;

  const double atom_mass = spec.beta * w[0];
  panel_.resize(grid_nodes);
  double total = atom_mass;
  for (std::size_t k = 0; k < grid_nodes; ++k) {
    panel_[k] = 0.5 * width_ * (w[k] + w[k + 1]);
    total += panel_[k];
  }
  if (!(total > std::numeric_limits<double>::min()) || !std::isfinite(total))
    throw NumericError("degenerate conditional for coordinate " + std::to_string(j + 1));

  atom_ = atom_mass / total;
  cumulative_.resize(grid_nodes + 1);
  cumulative_[0] = atom_;
  for (std::size_t k = 0; k < grid_nodes; ++k) {
    panel_[k] /= total;
    cumulative_[k + 1] = cumulative_[k] + panel_[k];
  }
}

double ConditionalTable::cdf(double t) const {
  if (t < 0.0) return 0.0;
  const double pos = t / width_;
  const auto k = static_cast<std::size_t>(pos);
  if (k >= panel_.size()) return 1.0;
  return cumulative_[k] + panel_[k] * (pos - static_cast<double>(k));
}

double ConditionalTable::sample(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  if (u < atom_) return 0.0;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());
  k = std::clamp<std::size_t>(k, 1, panel_.size()) - 1;
  while (panel_[k] <= 0.0 && k + 1 < panel_.size()) ++k;
  const double frac = panel_[k] > 0.0 ? (u - cumulative_[k]) / panel_[k] : 0.5;
  // Open at the left end so a continuous draw never lands on the atom.
  const double t = (static_cast<double>(k) + std::clamp(frac, 0.0, 1.0)) * width_;
  return t > 0.0 ? t : 0.5 * width_;
}

double conditional_coordinate_sample(std::span<const double> state, std::size_t j,
                                     const DensityModel& rho, const StickyMeasureSpec& spec,
                                     std::size_t grid_nodes, Rng& rng) {
  return ConditionalTable(state, j, rho, spec, grid_nodes).sample(rng);
}

double SampleSet::stratum_frequency(StratumIndex b) const {
  if (size() == 0 || b.mask() >= stratum_counts.size()) return 0.0;
  return static_cast<double>(stratum_counts[b.mask()]) / static_cast<double>(size());
}

double SampleSet::atom_frequency(std::size_t j) const {
  if (size() == 0 || j >= atom_counts.size()) return 0.0;
  return static_cast<double>(atom_counts[j]) / static_cast<double>(size());
}

SampleSet sample_invariant(const DensityModel& rho, const StickyMeasureSpec& spec,
                           const SamplerConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (rho.dim() != spec.n) throw DomainError("sample_invariant: density dimension != spec.n");
  const std::size_t n = spec.n;
  if (n > 20) throw DomainError("sample_invariant: stratum bookkeeping limited to n <= 20");

  SampleSet out;
  out.n = n;
  out.samples.reserve(cfg.n_samples * n);
  out.stratum_counts.assign(std::size_t{1} << n, 0);
  out.atom_counts.assign(n, 0);

  std::vector<double> x(n, 0.0);
  std::size_t sweep = 0;
  auto run_sweep = [&] {
    Rng rng(cfg.seed, sweep++);
    for (std::size_t j = 0; j < n; ++j)
      x[j] = conditional_coordinate_sample(x, j, rho, spec, cfg.grid_nodes, rng);
  };

  for (std::size_t s = 0; s < cfg.burn_in; ++s) run_sweep();
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    for (std::size_t s = 0; s < cfg.thin; ++s) run_sweep();
    out.samples.insert(out.samples.end(), x.begin(), x.end());
    const auto b = stratum_of(x);
    ++out.stratum_counts[b.mask()];
    for (std::size_t j = 0; j < n; ++j)
      if (x[j] == 0.0) ++out.atom_counts[j];
  }
  return out;
}

}  // namespace sticky
