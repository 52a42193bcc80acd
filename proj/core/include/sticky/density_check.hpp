#pragma once

#include "sticky/density.hpp"
#include "sticky/quadrature.hpp"

namespace sticky {

// Numerical evidence that ρ ∈ L¹(m_{n,β}) and ∇ln ρ ∈ L²(μ) on the truncated
// box, plus the finite-difference gradient check.
struct DensityReport {
  double mass = 0.0;              // μ([0,L]^n)
  double mass_truncation = 0.0;   // estimated μ-mass of the tail shell
  double drift_l2 = 0.0;          // ∫ |∇ln ρ|² dμ on [0,L]^n
  double drift_truncation = 0.0;
  GradientCheck gradient;
  bool finite = false;
  bool ok = false;
};

// Relative tail mass above which a model is reported as not integrable on the
// configured box.
inline constexpr double kMaxRelativeTruncation = 1e-6;

// Never throws on numeric trouble: non-finite results are reported with
// finite == false.
DensityReport density_check(const DensityModel& rho, const StickyMeasureSpec& spec);

}  // namespace sticky
