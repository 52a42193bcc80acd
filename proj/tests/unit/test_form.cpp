#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sticky/errors.hpp"
#include "sticky/form.hpp"
#include "sticky/wetting.hpp"

using namespace sticky;
using V = std::vector<double>;

namespace {

// f with f' = 1 and f'' = 0 near the evaluation points.
TestFunction linear_1d() {
  return TestFunction(
      1, {10.0}, [](std::span<const double> x) { return x[0]; },
      [](std::size_t, std::span<const double>) { return 1.0; },
      [](std::size_t, std::span<const double>) { return 0.0; }, "linear");
}

// Fixed gradient (p,q) and ∂²₁ = r.
TestFunction quadratic_2d(double p, double q, double r) {
  return TestFunction(
      2, {10.0, 10.0},
      [=](std::span<const double> x) { return p * x[0] + q * x[1] + 0.5 * r * x[0] * x[0]; },
      [=](std::size_t j, std::span<const double> x) { return j == 0 ? p + r * x[0] : q; },
      [=](std::size_t j, std::span<const double>) { return j == 0 ? r : 0.0; }, "quadratic");
}

}  // namespace

TEST_CASE("builtin family has closed-form partials") {
  for (std::size_t n : {1u, 2u, 3u}) {
    auto fam = builtin_test_functions(n, 2.5);
    CHECK(fam.size() == static_cast<std::size_t>(std::pow(3, n)));
    for (auto& f : fam) {
      CAPTURE(f.label());
      auto c = check_test_function(f, 1000, 3);
      CHECK(c.ok);
    }
  }
}

TEST_CASE("builtin functions vanish with their gradient on the outer face") {
  for (auto& f : builtin_test_functions(2, 3.0)) {
    for (double t : {0.0, 0.5, 2.9}) {
      V a{3.0, t}, b{t, 3.0};
      CHECK(std::abs(f.value(a)) < 1e-14);
      CHECK(std::abs(f.value(b)) < 1e-14);
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::abs(f.partial(j, a)) < 1e-13);
        CHECK(std::abs(f.partial(j, b)) < 1e-13);
      }
    }
    CHECK(f.value(V{3.5, 1.0}) == 0.0);
  }
}

TEST_CASE("dirichlet form against an independent one-dimensional oracle") {
  auto rho = make_exponential_density({1.0});
  StickyMeasureSpec spec{1, 1.0, 40.0, 16};
  auto f = TestFunction::product({Profile::Vanishing}, {1.0});
  // ∫₀¹((1−x)²−2x(1−x))² e^{−x} dx
  const double frozen = 0.107685413253072807724964032208;
  const double simpson = oracle::simpson([](double x) {
    double d = (1 - x) * (1 - x) - 2 * x * (1 - x);
    return d * d * std::exp(-x);
  }, 0.0, 1.0);
  CHECK(simpson == doctest::Approx(frozen).epsilon(1e-12));
  auto e = dirichlet_form(f, f, rho, spec);
  CHECK(e.value == doctest::Approx(frozen).epsilon(1e-12));
  CHECK(dirichlet_form(f, TestFunction::constant(1), rho, spec).value == 0.0);
}

TEST_CASE("dirichlet form is symmetric, bilinear and nonnegative") {
  auto rho = make_gaussian_density({1.0, 0.8});
  StickyMeasureSpec spec{2, 0.7, 6.0, 8};
  auto fam = builtin_test_functions(2, 2.0);
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<std::size_t> pick(0, fam.size() - 1);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto& f = fam[pick(gen)];
    const auto& g = fam[pick(gen)];
    const auto& k = fam[pick(gen)];
    double fg = dirichlet_form(f, g, rho, spec).value;
    double gf = dirichlet_form(g, f, rho, spec).value;
    CHECK(std::abs(fg - gf) <= 1e-12 * (1.0 + std::abs(fg)));
    CHECK(dirichlet_form(f, f, rho, spec).value >= 0.0);

    const double a = coef(gen), b = coef(gen);
    TestFunction combo(
        2, f.support(),
        [&](std::span<const double> x) { return a * g.value(x) + b * k.value(x); },
        [&](std::size_t j, std::span<const double> x) {
          return a * g.partial(j, x) + b * k.partial(j, x);
        },
        [&](std::size_t j, std::span<const double> x) {
          return a * g.partial2(j, x) + b * k.partial2(j, x);
        },
        "combo");
    double lhs = dirichlet_form(f, combo, rho, spec).value;
    double rhs = a * fg + b * dirichlet_form(f, k, rho, spec).value;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("dirichlet form rejects supports larger than the box") {
  auto rho = make_exponential_density({1.0});
  auto f = TestFunction::product({Profile::Flat}, {5.0});
  CHECK_THROWS_AS(dirichlet_form(f, f, rho, {1, 1.0, 4.0, 8}), DomainError);
}

TEST_CASE("apply_generator examples") {
  auto rho = make_exponential_density({1.0});
  auto f = linear_1d();
  CHECK(apply_generator(f, V{0.5}, rho, 1.0) == doctest::Approx(-1.0));
  CHECK(apply_generator(f, V{0.0}, rho, 2.0) == doctest::Approx(0.5));
  auto rho2 = make_exponential_density({1.0, 1.0});
  const double p = 0.3, q = -1.2, r = 2.5;
  // At x = (1,0), ∂₁f = p + r.
  CHECK(apply_generator(quadratic_2d(p, q, r), V{1.0, 0.0}, rho2, 1.0) ==
        doctest::Approx(r - (p + r) + q));
  CHECK(apply_generator(TestFunction::constant(2), V{0.0, 1.0}, rho2, 1.0) == 0.0);
}

TEST_CASE("apply_generator at the origin and in the interior") {
  auto rho = make_gaussian_density({1.0, 1.5, 0.5});
  const double beta = 0.6;
  for (auto& f : builtin_test_functions(3, 2.0)) {
    V origin(3, 0.0);
    double expected = 0.0;
    for (std::size_t j = 0; j < 3; ++j) expected += f.partial(j, origin) / beta;
    CHECK(apply_generator(f, origin, rho, beta) == doctest::Approx(expected));

    V x{0.3, 1.1, 0.7};
    auto g = rho.grad_log_rho(x);
    double interior = 0.0;
    for (std::size_t j = 0; j < 3; ++j) interior += f.partial2(j, x) + f.partial(j, x) * g[j];
    CHECK(apply_generator(f, x, rho, beta) == doctest::Approx(interior));
  }
}

TEST_CASE("energy density examples") {
  TestFunction g(
      2, {10.0, 10.0}, [](std::span<const double> x) { return x[0] + x[1]; },
      [](std::size_t, std::span<const double>) { return 1.0; },
      [](std::size_t, std::span<const double>) { return 0.0; }, "sum");
  CHECK(energy_density(g, V{0.5, 0.5}) == 4.0);
  CHECK(energy_density(g, V{0.5, 0.0}) == 2.0);
  CHECK(energy_density(g, V{0.0, 0.0}) == 0.0);
}

TEST_CASE("integration by parts on builtin pairs") {
  auto rho = make_exponential_density({1.0});
  StickyMeasureSpec spec{1, 1.0, 40.0, 16};
  auto fam = builtin_test_functions(1, 2.0);
  for (auto& f : fam)
    for (auto& g : fam) {
      auto r = check_ibp(f, g, rho, spec);
      CAPTURE(f.label());
      CAPTURE(g.label());
      CHECK(r.rel_residual < 1e-6);
    }
  auto r = check_ibp(fam[2], fam[2], rho, spec);
  CHECK(r.form_value >= 0.0);
  CHECK(r.rel_residual < 1e-6);
}

TEST_CASE("integration by parts on the two-site wetting model") {
  auto rho = make_wetting_density(LatticeSpec(1, 2), make_gaussian_potential());
  StickyMeasureSpec spec{2, 1.0, 10.0, 16};
  for (auto& f : builtin_test_functions(2, 2.0)) {
    auto r = check_ibp(f, builtin_test_functions(2, 2.0)[5], rho, spec);
    CHECK(r.rel_residual < 1e-5);
  }
}

TEST_CASE("residual decays under node doubling") {
  auto rho = make_gaussian_density({1.0, 0.7});
  auto fam = builtin_test_functions(2, 1.5);
  auto conv = ibp_convergence(fam[4], fam[7], rho, {2, 1.3, 10.0, 2});
  CHECK(conv.nodes.size() == 3);
  CHECK(conv.observed_order >= 2.0);
}

TEST_CASE("invariance of the reference measure") {
  auto rho = make_exponential_density({1.0});
  for (auto& f : builtin_test_functions(1, 2.0))
    CHECK(check_invariance(f, rho, {1, 1.0, 40.0, 16}) < 1e-6);
  CHECK(check_invariance(TestFunction::constant(1), rho, {1, 1.0, 40.0, 16}) == 0.0);
  auto wet = make_wetting_density(LatticeSpec(1, 1), make_gaussian_potential());
  for (auto& f : builtin_test_functions(1, 2.0))
    CHECK(check_invariance(f, wet, {1, 1.0, 10.0, 16}) < 1e-6);
}
