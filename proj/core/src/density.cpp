#include "sticky/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sticky/errors.hpp"
#include "sticky/rng.hpp"

namespace sticky {

DensityModel::DensityModel(std::size_t dim, std::string label, LogFn log_rho,
                           GradFn grad_log_rho, LocalFn local_log_rho)
    : dim_(dim),
      label_(std::move(label)),
      log_rho_(std::move(log_rho)),
      grad_(std::move(grad_log_rho)),
      local_(std::move(local_log_rho)) {
  if (dim_ == 0) throw DomainError("DensityModel: dimension must be positive");
  if (!log_rho_ || !grad_) throw DomainError("DensityModel: log_rho and gradient are required");
}

std::vector<double> DensityModel::grad_log_rho(std::span<const double> x) const {
  std::vector<double> g(dim_);
  grad_(x, g);
  return g;
}

DensityModel DensityModel::shifted(double c) const {
  auto base = log_rho_;
  LocalFn local;
  if (local_) {
    auto base_local = local_;
    local = [base_local, c](std::span<const double> x, std::size_t j) {
      return base_local(x, j) + c;
    };
  }
  return DensityModel(
      dim_, label_, [base, c](std::span<const double> x) { return base(x) + c; }, grad_,
      std::move(local));
}

namespace {

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

DensityModel make_exponential_density(std::vector<double> rates) {
  if (rates.empty()) throw DomainError("make_exponential_density: no rates given");
  for (double c : rates)
    if (!(c > 0.0) || !std::isfinite(c))
      throw DomainError("make_exponential_density: rates must be positive and finite");
  const std::size_t n = rates.size();
  auto label = "exponential(" + join(rates) + ")";
  auto log_rho = [rates](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t j = 0; j < rates.size(); ++j) s -= rates[j] * x[j];
    return s;
  };
  auto grad = [rates](std::span<const double>, std::span<double> out) {
    for (std::size_t j = 0; j < rates.size(); ++j) out[j] = -rates[j];
  };
  auto local = [rates](std::span<const double> x, std::size_t j) { return -rates[j] * x[j]; };
  return DensityModel(n, std::move(label), log_rho, grad, local);
}

DensityModel make_gaussian_density(std::vector<double> scales) {
  if (scales.empty()) throw DomainError("make_gaussian_density: no scales given");
  for (double s : scales)
    if (!(s > 0.0) || !std::isfinite(s))
      throw DomainError("make_gaussian_density: scales must be positive and finite");
  const std::size_t n = scales.size();
  std::vector<double> precision(n);
  for (std::size_t j = 0; j < n; ++j) precision[j] = 1.0 / (scales[j] * scales[j]);
  auto label = "gaussian(" + join(scales) + ")";
  auto log_rho = [precision](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t j = 0; j < precision.size(); ++j) s -= 0.5 * precision[j] * x[j] * x[j];
    return s;
  };
  auto grad = [precision](std::span<const double> x, std::span<double> out) {
    for (std::size_t j = 0; j < precision.size(); ++j) out[j] = -precision[j] * x[j];
  };
  auto local = [precision](std::span<const double> x, std::size_t j) {
    return -0.5 * precision[j] * x[j] * x[j];
  };
  return DensityModel(n, std::move(label), log_rho, grad, local);
}

GradientCheck check_gradient(const DensityModel& rho, double box_length, std::size_t points,
                             std::uint64_t seed, double step, double tolerance) {
  const std::size_t n = rho.dim();
  Rng rng(seed, 0);
  std::vector<double> x(n), g(n);
  GradientCheck out;
  out.points = points;
  // Stay one step away from the faces so the stencil never leaves E.
  const double lo = step, hi = box_length - step;
  for (std::size_t p = 0; p < points; ++p) {
    for (auto& xi : x) xi = lo + (hi - lo) * rng.uniform();
    rho.grad_log_rho(x, g);
    for (std::size_t j = 0; j < n; ++j) {
      const double xj = x[j];
      x[j] = xj + step;
      const double up = rho.log_rho(x);
      x[j] = xj - step;
      const double down = rho.log_rho(x);
      x[j] = xj;
      const double fd = (up - down) / (2.0 * step);
      const double err = std::abs(fd - g[j]);
      if (!std::isfinite(err)) {
        out.max_abs_error = std::numeric_limits<double>::infinity();
      } else {
        out.max_abs_error = std::max(out.max_abs_error, err);
      }
    }
  }
  out.ok = out.max_abs_error <= tolerance;
  return out;
}

}  // namespace sticky
