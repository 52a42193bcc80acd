#include "sticky/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "sticky/errors.hpp"

namespace sticky {

void StickyMeasureSpec::validate() const {
  if (n == 0 || n > kMaxStrataDimension) throw DomainError("StickyMeasureSpec: bad dimension n");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("StickyMeasureSpec: beta must be > 0");
  if (!(length > 0.0) || !std::isfinite(length))
    throw DomainError("StickyMeasureSpec: truncation length L must be > 0");
  if (nodes_per_axis < 2) throw DomainError("StickyMeasureSpec: nodes_per_axis must be >= 2");
}

double QuadratureResult::of(StratumIndex b) const {
  for (const auto& [s, v] : per_stratum)
    if (s == b) return v;
  return 0.0;
}

AxisRule composite_gauss_legendre(double upper, std::size_t panels) {
  static constexpr std::array<double, kPointsPerPanel> kNode = {
      -0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static constexpr std::array<double, kPointsPerPanel> kWeight = {
      0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  AxisRule rule;
  rule.nodes.reserve(panels * kPointsPerPanel);
  rule.weights.reserve(panels * kPointsPerPanel);
  const double width = upper / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * width;
    for (std::size_t k = 0; k < kPointsPerPanel; ++k) {
      rule.nodes.push_back(mid + 0.5 * width * kNode[k]);
      rule.weights.push_back(0.5 * width * kWeight[k]);
    }
  }
  return rule;
}

namespace {

std::string describe_node(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ')';
  return os.str();
}

// Tensor-product sweep over the free axes of one stratum. `visit` receives
// the node and its product weight.
template <typename Visit>
void for_each_node(std::size_t n, StratumIndex b, const std::vector<AxisRule>& rules,
                   Visit&& visit) {
  std::vector<double> x(n, 0.0);
  const auto free = b.indices();
  if (free.empty()) {
    visit(std::span<const double>(x), 1.0);
    return;
  }
  std::vector<std::size_t> idx(free.size(), 0);
  const std::size_t last = free.size() - 1;
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const auto& r = rules[free[k]];
      x[free[k]] = r.nodes[idx[k]];
      w *= r.weights[idx[k]];
    }
    visit(std::span<const double>(x), w);
    std::size_t k = last;
    while (true) {
      if (++idx[k] < rules[free[k]].nodes.size()) break;
      idx[k] = 0;
      if (k == 0) return;
      --k;
    }
  }
}

struct StratumIntegral {
  double body = 0.0;  // relative to exp(reference)
  double tail = 0.0;
};

StratumIntegral integrate_stratum(const Integrand& f, const DensityModel& rho, std::size_t n,
                                  StratumIndex b, const std::vector<double>& upper,
                                  std::size_t panels, double reference, bool estimate_tail) {
  std::vector<AxisRule> rules(n);
  for (std::size_t i = 0; i < n; ++i)
    if (b.contains(i)) rules[i] = composite_gauss_legendre(upper[i], panels);

  StratumIntegral out;
  for_each_node(n, b, rules, [&](std::span<const double> x, double w) {
    const double lr = rho.log_rho(x);
    const double fx = f(x);
    if (!std::isfinite(lr) || !std::isfinite(fx))
      throw NumericError("stratified_integral: non-finite integrand at node " + describe_node(x) +
                         " in stratum " + b.to_string());
    out.body += w * fx * std::exp(lr - reference);
  });

  if (estimate_tail && !b.empty()) {
    const std::size_t coarse = std::max<std::size_t>(1, panels / 2);
    std::vector<AxisRule> shell(n);
    for (std::size_t i = 0; i < n; ++i)
      if (b.contains(i)) shell[i] = composite_gauss_legendre(2.0 * upper[i], 2 * coarse);
    for_each_node(n, b, shell, [&](std::span<const double> x, double w) {
      bool outside = false;
      for (std::size_t i = 0; i < n && !outside; ++i)
        outside = b.contains(i) && x[i] > upper[i];
      if (!outside) return;
      const double v = w * std::abs(f(x)) * std::exp(rho.log_rho(x) - reference);
      out.tail += std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    });
  }
  return out;
}

std::vector<double> resolve_upper(const StickyMeasureSpec& spec, const QuadratureOptions& opt) {
  if (opt.upper.empty()) return std::vector<double>(spec.n, spec.length);
  if (opt.upper.size() != spec.n) throw DomainError("stratified_integral: box has wrong dimension");
  for (double u : opt.upper)
    if (!(u > 0.0)) throw DomainError("stratified_integral: box limits must be positive");
  return opt.upper;
}

double reference_log(const DensityModel& rho, std::size_t n) {
  std::vector<double> origin(n, 0.0);
  const double r = rho.log_rho(origin);
  if (!std::isfinite(r)) throw NumericError("stratified_integral: log rho not finite at origin");
  return r;
}

}  // namespace

QuadratureResult stratified_integral(const Integrand& f, const DensityModel& rho,
                                     const StickyMeasureSpec& spec,
                                     const QuadratureOptions& options) {
  spec.validate();
  if (rho.dim() != spec.n) throw DomainError("stratified_integral: density dimension != spec.n");
  const auto upper = resolve_upper(spec, options);
  const double reference = reference_log(rho, spec.n);
  const double scale = std::exp(reference);

  QuadratureResult out;
  double tail = 0.0;
  for (auto b : enumerate_strata(spec.n)) {
    const auto s = integrate_stratum(f, rho, spec.n, b, upper, spec.nodes_per_axis, reference,
                                     options.estimate_tail);
    const double w = spec.weight(b) * scale;
    out.per_stratum.emplace_back(b, w * s.body);
    tail += w * s.tail;
  }
  for (const auto& [b, v] : out.per_stratum) out.value += v;
  out.est_truncation_error = tail;
  return out;
}

double StratumMasses::of(StratumIndex b) const {
  for (const auto& [s, v] : mass)
    if (s == b) return v;
  return 0.0;
}

double StratumMasses::probability(StratumIndex b, double beta) const {
  double total = 0.0;
  for (const auto& [s, v] : mass) total += stratum_weight(s, n, beta) * v;
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegenerateModelError("StratumMasses: total mass is zero or non-finite");
  return stratum_weight(b, n, beta) * of(b) / total;
}

StratumMasses stratum_masses(const DensityModel& rho, const StickyMeasureSpec& spec) {
  StickyMeasureSpec unit = spec;
  unit.beta = 1.0;
  const auto q = stratified_integral([](std::span<const double>) { return 1.0; }, rho, unit,
                                     QuadratureOptions{{}, false});
  return StratumMasses{spec.n, q.per_stratum};
}

double BoundaryMassRatio::at(double beta_value) const {
  double num = 0.0, den = 0.0, p = 1.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    num += p * a[i];
    den += p * b[i];
    p *= beta_value;
  }
  if (!(den > 0.0) || !std::isfinite(den))
    throw DegenerateModelError("boundary_mass_ratio: total mass is zero or non-finite");
  return 1.0 - num / den;
}

BoundaryMassRatio boundary_mass_ratio(std::size_t j, const DensityModel& rho,
                                      const StickyMeasureSpec& spec) {
  spec.validate();
  if (j >= spec.n)
    throw DomainError("boundary_mass_ratio: coordinate " + std::to_string(j + 1) +
                      " outside 1.." + std::to_string(spec.n));
  const auto masses = stratum_masses(rho, spec);
  BoundaryMassRatio out;
  out.coordinate = j;
  out.beta = spec.beta;
  out.a.assign(spec.n + 1, 0.0);
  out.b.assign(spec.n + 1, 0.0);
  for (const auto& [s, c] : masses.mass) {
    const std::size_t i = spec.n - static_cast<std::size_t>(s.size());
    out.b[i] += c;
    if (s.contains(j)) out.a[i] += c;
  }
  out.ratio = out.at(spec.beta);
  return out;
}

}  // namespace sticky
