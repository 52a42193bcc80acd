#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sticky {

// A strictly positive density ρ on the orthant, represented only through
// log ρ (up to an additive constant) and its logarithmic gradient ∂_j ln ρ.
// ρ itself is never materialized.
//
// An optional local form may be supplied: local_log_rho(x, j) must differ
// from log_rho(x) by a quantity that does not depend on x_j. It lets
// coordinate-wise algorithms (conditional sampling, jump rates) evaluate
// differences along one axis without touching the whole state.
class DensityModel {
 public:
  using LogFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<void(std::span<const double>, std::span<double>)>;
  using LocalFn = std::function<double(std::span<const double>, std::size_t)>;

  DensityModel(std::size_t dim, std::string label, LogFn log_rho, GradFn grad_log_rho,
               LocalFn local_log_rho = {});

  std::size_t dim() const { return dim_; }
  const std::string& label() const { return label_; }

  double log_rho(std::span<const double> x) const { return log_rho_(x); }
  void grad_log_rho(std::span<const double> x, std::span<double> out) const {
    grad_(x, out);
  }
  std::vector<double> grad_log_rho(std::span<const double> x) const;

  double local_log_rho(std::span<const double> x, std::size_t j) const {
    return local_ ? local_(x, j) : log_rho_(x);
  }

  // log ρ + c. Every ratio-based quantity is invariant under this.
  DensityModel shifted(double c) const;

 private:
  std::size_t dim_;
  std::string label_;
  LogFn log_rho_;
  GradFn grad_;
  LocalFn local_;
};

// log ρ = -Σ c_j x_j. Throws DomainError for a nonpositive rate.
DensityModel make_exponential_density(std::vector<double> rates);

// log ρ = -Σ x_j² / (2 s_j²). Throws DomainError for a nonpositive scale.
DensityModel make_gaussian_density(std::vector<double> scales);

struct GradientCheck {
  double max_abs_error = 0.0;
  std::size_t points = 0;
  bool ok = false;
};

// Compares grad_log_rho against central differences of log_rho at random
// interior points of (0, box_length)^n.
GradientCheck check_gradient(const DensityModel& rho, double box_length,
                             std::size_t points = 1000, std::uint64_t seed = 1,
                             double step = 1e-5, double tolerance = 1e-6);

}  // namespace sticky
