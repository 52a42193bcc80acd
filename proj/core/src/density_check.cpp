#include "sticky/density_check.hpp"

#include <cmath>

#include "sticky/errors.hpp"

namespace sticky {

DensityReport density_check(const DensityModel& rho, const StickyMeasureSpec& spec) {
  DensityReport r;
  r.gradient = check_gradient(rho, spec.length);
  try {
    const auto mass =
        stratified_integral([](std::span<const double>) { return 1.0; }, rho, spec);
    std::vector<double> g(rho.dim());
    const auto drift = stratified_integral(
        [&](std::span<const double> x) {
          rho.grad_log_rho(x, g);
          double s = 0.0;
          for (double v : g) s += v * v;
          return s;
        },
        rho, spec);
    r.mass = mass.value;
    r.mass_truncation = mass.est_truncation_error;
    r.drift_l2 = drift.value;
    r.drift_truncation = drift.est_truncation_error;
    r.finite = std::isfinite(r.mass) && std::isfinite(r.mass_truncation) &&
               std::isfinite(r.drift_l2) && std::isfinite(r.drift_truncation);
  } catch (const NumericError&) {
    r.finite = false;
  }
  const bool mass_ok = r.finite && r.mass > 0.0 &&
                       r.mass_truncation <= kMaxRelativeTruncation * r.mass;
  const bool drift_ok = r.finite && r.drift_truncation <= kMaxRelativeTruncation *
                                                             std::max(r.drift_l2, 1e-300);
  r.ok = mass_ok && drift_ok && r.gradient.ok;
  return r;
}

}  // namespace sticky
