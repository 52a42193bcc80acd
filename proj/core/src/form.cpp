#include "sticky/form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sticky/errors.hpp"
#include "sticky/rng.hpp"

namespace sticky {

const char* to_string(Profile p) {
  switch (p) {
    case Profile::Vanishing: return "vanishing";
    case Profile::Flat: return "flat";
    case Profile::Mixed: return "mixed";
  }
  return "?";
}

namespace {

struct ProfileValues {
  double v, d1, d2;
};

ProfileValues eval_profile(Profile p, double t) {
  if (t >= 1.0) return {0.0, 0.0, 0.0};
  switch (p) {
    case Profile::Vanishing:  // t - 2t² + t³
      return {t * (1.0 - t) * (1.0 - t), 1.0 - 4.0 * t + 3.0 * t * t, -4.0 + 6.0 * t};
    case Profile::Flat:  // 1 - 3t² + 2t³
      return {(1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t), -6.0 * t + 6.0 * t * t, -6.0 + 12.0 * t};
    case Profile::Mixed:  // 1 + t - 5t² + 3t³
      return {(1.0 - t) * (1.0 - t) * (1.0 + 3.0 * t), 1.0 - 10.0 * t + 9.0 * t * t,
              -10.0 + 18.0 * t};
  }
  return {0.0, 0.0, 0.0};
}

}  // namespace

TestFunction::TestFunction(std::size_t dim, std::vector<double> support, ValueFn value,
                           PartialFn partial, PartialFn partial2, std::string label)
    : dim_(dim),
      support_(std::move(support)),
      value_(std::move(value)),
      partial_(std::move(partial)),
      partial2_(std::move(partial2)),
      label_(std::move(label)) {
  if (dim_ == 0) throw DomainError("TestFunction: dimension must be positive");
  if (support_.size() != dim_) throw DomainError("TestFunction: support box has wrong dimension");
  for (double s : support_)
    if (!(s > 0.0)) throw DomainError("TestFunction: support lengths must be positive");
}

TestFunction TestFunction::product(std::vector<Profile> profiles, std::vector<double> support) {
  const std::size_t n = profiles.size();
  if (support.size() != n) throw DomainError("TestFunction::product: profile/support mismatch");
  std::ostringstream label;
  for (std::size_t j = 0; j < n; ++j) label << (j ? "*" : "") << to_string(profiles[j]);

  auto evaluate = [profiles, support](std::span<const double> x, std::size_t j, int order) {
    double prod = 1.0;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
      const auto pv = eval_profile(profiles[k], x[k] / support[k]);
      if (k != j || order == 0) {
        prod *= pv.v;
      } else if (order == 1) {
        prod *= pv.d1 / support[k];
      } else {
        prod *= pv.d2 / (support[k] * support[k]);
      }
      if (prod == 0.0) return 0.0;
    }
    return prod;
  };
  return TestFunction(
      n, support,
      [evaluate](std::span<const double> x) { return evaluate(x, 0, 0); },
      [evaluate](std::size_t j, std::span<const double> x) { return evaluate(x, j, 1); },
      [evaluate](std::size_t j, std::span<const double> x) { return evaluate(x, j, 2); },
      label.str());
}

TestFunction TestFunction::constant(std::size_t dim, double c) {
  TestFunction f(
      dim, std::vector<double>(dim, std::numeric_limits<double>::infinity()),
      [c](std::span<const double>) { return c; },
      [](std::size_t, std::span<const double>) { return 0.0; },
      [](std::size_t, std::span<const double>) { return 0.0; }, "constant");
  f.constant_ = true;
  return f;
}

std::vector<TestFunction> builtin_test_functions(std::size_t n, double support) {
  if (n == 0 || n > 8) throw DomainError("builtin_test_functions: n must be in [1, 8]");
  constexpr Profile kAll[] = {Profile::Vanishing, Profile::Flat, Profile::Mixed};
  std::size_t count = 1;
  for (std::size_t j = 0; j < n; ++j) count *= 3;
  std::vector<TestFunction> out;
  out.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    std::vector<Profile> profiles(n);
    std::size_t c = code;
    for (std::size_t j = 0; j < n; ++j, c /= 3) profiles[j] = kAll[c % 3];
    out.push_back(TestFunction::product(profiles, std::vector<double>(n, support)));
  }
  return out;
}

TestFunctionCheck check_test_function(const TestFunction& f, std::size_t points,
                                      std::uint64_t seed) {
  TestFunctionCheck out;
  const std::size_t n = f.dim();
  Rng rng(seed, 7);
  const double h = 1e-5;
  std::vector<double> x(n);
  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t j = 0; j < n; ++j) {
      const double s = std::isfinite(f.support()[j]) ? f.support()[j] : 1.0;
      x[j] = h + (s - 2.0 * h) * rng.uniform();
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double xj = x[j];
      x[j] = xj + h;
      const double vp = f.value(x), dp = f.partial(j, x);
      x[j] = xj - h;
      const double vm = f.value(x), dm = f.partial(j, x);
      x[j] = xj;
      out.max_partial_error =
          std::max(out.max_partial_error, std::abs((vp - vm) / (2 * h) - f.partial(j, x)));
      out.max_partial2_error =
          std::max(out.max_partial2_error, std::abs((dp - dm) / (2 * h) - f.partial2(j, x)));
    }
  }
  out.ok = out.max_partial_error <= 1e-6 && out.max_partial2_error <= 1e-5;
  return out;
}

namespace {

// Componentwise intersection of the supports; constant surrogates impose no
// restriction.
std::vector<double> common_box(const StickyMeasureSpec& spec,
                               std::initializer_list<const TestFunction*> fs) {
  std::vector<double> box(spec.n, spec.length);
  for (const auto* f : fs) {
    if (f->dim() != spec.n) throw DomainError("test function dimension != spec.n");
    if (f->is_constant()) continue;
    for (std::size_t j = 0; j < spec.n; ++j) {
      if (f->support()[j] > spec.length * (1.0 + 1e-12))
        throw DomainError("test function '" + f->label() + "' support exceeds the quadrature box");
      box[j] = std::min(box[j], f->support()[j]);
    }
  }
  return box;
}

}  // namespace

FormValue dirichlet_form(const TestFunction& f, const TestFunction& g, const DensityModel& rho,
                         const StickyMeasureSpec& spec) {
  const auto box = common_box(spec, {&f, &g});
  FormValue out;
  if (f.is_constant() || g.is_constant()) {
    for (auto b : enumerate_strata(spec.n))
      if (!b.empty()) out.per_stratum.emplace_back(b, 0.0);
    return out;
  }
  const auto q = stratified_integral(
      [&](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
          if (x[i] > 0.0) s += f.partial(i, x) * g.partial(i, x);
        return s;
      },
      rho, spec, QuadratureOptions{box, false});
  for (const auto& [b, v] : q.per_stratum)
    if (!b.empty()) out.per_stratum.emplace_back(b, v);
  out.value = q.value;
  return out;
}

double apply_generator(const TestFunction& f, std::span<const double> x, const DensityModel& rho,
                       double beta) {
  if (f.is_constant()) return 0.0;
  const std::size_t n = x.size();
  double wet = 0.0, dry = 0.0;
  bool need_grad = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] < 0.0) throw DomainError("apply_generator: point outside the orthant");
    need_grad = need_grad || x[i] > 0.0;
  }
  std::vector<double> grad;
  if (need_grad) grad = rho.grad_log_rho(x);
  for (std::size_t i = 0; i < n; ++i) {
    const double d1 = f.partial(i, x);
    if (x[i] > 0.0) {
      wet += f.partial2(i, x) + d1 * grad[i];
    } else {
      dry += d1;
    }
  }
  return wet + dry / beta;
}

double energy_density(const TestFunction& g, std::span<const double> x) {
  if (g.is_constant()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw DomainError("energy_density: point outside the orthant");
    if (x[i] > 0.0) {
      const double d = g.partial(i, x);
      s += d * d;
    }
  }
  return 2.0 * s;
}

IbpReport check_ibp(const TestFunction& f, const TestFunction& g, const DensityModel& rho,
                    const StickyMeasureSpec& spec) {
  const auto box = common_box(spec, {&f, &g});
  const auto form = dirichlet_form(f, g, rho, spec);
  const auto ibp = stratified_integral(
      [&](std::span<const double> x) {
        return -apply_generator(f, x, rho, spec.beta) * g.value(x);
      },
      rho, spec, QuadratureOptions{box, false});

  IbpReport r;
  r.form_value = form.value;
  r.ibp_value = ibp.value;
  r.abs_residual = std::abs(r.form_value - r.ibp_value);
  const double scale = std::max(std::abs(r.form_value), std::abs(r.ibp_value));
  r.rel_residual = scale > 0.0 ? r.abs_residual / scale : r.abs_residual;
  for (const auto& [b, v] : ibp.per_stratum) {
    IbpStratum s{b, 0.0, v};
    for (const auto& [fb, fv] : form.per_stratum)
      if (fb == b) s.form = fv;
    r.per_stratum.push_back(s);
  }
  return r;
}

double check_invariance(const TestFunction& f, const DensityModel& rho,
                        const StickyMeasureSpec& spec) {
  if (f.is_constant()) return 0.0;
  const auto box = common_box(spec, {&f});
  const auto integral = stratified_integral(
      [&](std::span<const double> x) { return apply_generator(f, x, rho, spec.beta); }, rho,
      spec, QuadratureOptions{box, false});
  const auto mass =
      stratified_integral([](std::span<const double>) { return 1.0; }, rho, spec,
                          QuadratureOptions{{}, false});
  if (!(mass.value > 0.0)) throw DegenerateModelError("check_invariance: zero total mass");
  return std::abs(integral.value) / mass.value;
}

IbpConvergence ibp_convergence(const TestFunction& f, const TestFunction& g,
                               const DensityModel& rho, const StickyMeasureSpec& spec,
                               std::size_t start, std::size_t levels, double floor) {
  IbpConvergence out;
  StickyMeasureSpec s = spec;
  std::size_t nodes = std::max<std::size_t>(start, 2);
  for (std::size_t k = 0; k < levels; ++k, nodes *= 2) {
    s.nodes_per_axis = nodes;
    out.nodes.push_back(nodes);
    out.residuals.push_back(check_ibp(f, g, rho, s).rel_residual);
  }
  out.observed_order = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < out.residuals.size(); ++k) {
    if (out.residuals[k] <= floor) break;
    const double next = std::max(out.residuals[k + 1], floor);
    out.observed_order = std::min(out.observed_order, std::log2(out.residuals[k] / next));
    if (out.residuals[k + 1] <= floor) break;
  }
  return out;
}

}  // namespace sticky
