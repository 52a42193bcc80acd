#include "sticky/wetting.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "sticky/errors.hpp"
#include "sticky/rng.hpp"

namespace sticky {

PotentialModel::PotentialModel(std::string label, Fn value, Fn derivative)
    : label_(std::move(label)), value_(std::move(value)), derivative_(std::move(derivative)) {
  if (!value_ || !derivative_) throw DomainError("PotentialModel: V and V' are required");
}

namespace {

void require_stiffness(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("potential stiffness must be > 0");
}

std::string with_stiffness(const std::string& name, double k) {
  if (k == 1.0) return name;
  std::ostringstream os;
  os << name << '(' << k << ')';
  return os.str();
}

}  // namespace

PotentialModel make_gaussian_potential(double k) {
  require_stiffness(k);
  return PotentialModel(
      with_stiffness("gaussian", k), [k](double r) { return 0.5 * k * r * r; },
      [k](double r) { return k * r; });
}

PotentialModel make_quartic_potential(double k) {
  require_stiffness(k);
  return PotentialModel(
      with_stiffness("quartic", k), [k](double r) { return 0.25 * k * r * r * r * r; },
      [k](double r) { return k * r * r * r; });
}

PotentialModel make_smoothed_well_potential(double k) {
  require_stiffness(k);
  // √(1+r²) - 1 = r² / (√(1+r²) + 1) avoids cancellation near 0.
  return PotentialModel(
      with_stiffness("smoothed-well", k),
      [k](double r) { return k * r * r / (std::sqrt(1.0 + r * r) + 1.0); },
      [k](double r) { return k * r / std::sqrt(1.0 + r * r); });
}

PotentialModel make_potential(const std::string& name, const std::vector<double>& params) {
  if (params.size() > 1)
    throw DomainError("potential '" + name + "' takes at most one parameter (stiffness)");
  const double k = params.empty() ? 1.0 : params[0];
  if (name == "gaussian") return make_gaussian_potential(k);
  if (name == "quartic") return make_quartic_potential(k);
  if (name == "smoothed-well") return make_smoothed_well_potential(k);
  throw DomainError("unknown potential '" + name + "' (gaussian, quartic, smoothed-well)");
}

PotentialCheck check_potential(const PotentialModel& v, std::uint64_t seed, double half_width) {
  PotentialCheck out;
  Rng rng(seed, 0);
  for (int i = 0; i < 1000; ++i) {
    const double r = half_width * (2.0 * rng.uniform() - 1.0);
    out.symmetry_error = std::max(out.symmetry_error, std::abs(v.V(-r) - v.V(r)));
  }
  out.derivative_at_zero = v.dV(0.0);

  // Trapezoid on [0,R] and [R,2R]; the integrand is even.
  auto integrate = [&](double a, double b) {
    const int m = 20000;
    const double dx = (b - a) / m;
    double s = 0.5 * (std::exp(-v.V(a)) + std::exp(-v.V(b)));
    for (int i = 1; i < m; ++i) s += std::exp(-v.V(a + i * dx));
    return 2.0 * s * dx;
  };
  out.kappa = integrate(0.0, half_width);
  out.kappa_tail = integrate(half_width, 2.0 * half_width);
  out.ok = out.symmetry_error <= 1e-12 && std::abs(out.derivative_at_zero) <= 1e-12 &&
           std::isfinite(out.kappa) && out.kappa > 0.0 && out.kappa_tail <= 1e-6 * out.kappa;
  return out;
}

LatticeSpec::LatticeSpec(int d, int side) : d_(d), side_(side), sites_(1) {
  if (d < 1) throw DomainError("LatticeSpec: d must be >= 1");
  if (side < 1) throw DomainError("LatticeSpec: N must be >= 1");
  for (int k = 0; k < d; ++k) {
    sites_ *= static_cast<std::size_t>(side);
    if (sites_ > (1u << 20)) throw DomainError("LatticeSpec: lattice too large");
  }
  neighbors_.resize(sites_);
  incident_.resize(sites_);
  for (std::size_t i = 0; i < sites_; ++i) {
    const Site x = site(i);
    for (int k = 0; k < d_; ++k) {
      for (int step : {-1, +1}) {
        Neighbor nb;
        nb.position = x;
        nb.position[k] += step;
        nb.clamped = !contains(nb.position);
        if (!nb.clamped) nb.index = site_index(nb.position);
        neighbors_[i].push_back(nb);
        // Each unordered bond once: boundary bonds always, interior bonds
        // from their lower end.
        if (nb.clamped || nb.index > i) {
          incident_[i].push_back(bonds_.size());
          if (!nb.clamped) incident_[nb.index].push_back(bonds_.size());
          bonds_.push_back(Bond{i, nb.clamped ? i : nb.index, nb.clamped});
        }
      }
    }
  }
}

bool LatticeSpec::contains(const Site& x) const {
  if (static_cast<int>(x.size()) != d_) return false;
  for (int c : x)
    if (c < 1 || c > side_) return false;
  return true;
}

std::size_t LatticeSpec::site_index(const Site& x) const {
  if (!contains(x)) throw DomainError("LatticeSpec: site outside D_{d,N}");
  std::size_t idx = 0, stride = 1;
  for (int k = 0; k < d_; ++k) {
    idx += static_cast<std::size_t>(x[k] - 1) * stride;
    stride *= static_cast<std::size_t>(side_);
  }
  return idx;
}

Site LatticeSpec::site(std::size_t index) const {
  if (index >= sites_) throw DomainError("LatticeSpec: site index out of range");
  Site x(d_);
  for (int k = 0; k < d_; ++k) {
    x[k] = static_cast<int>(index % side_) + 1;
    index /= side_;
  }
  return x;
}

const std::vector<Neighbor>& LatticeSpec::neighbors(std::size_t index) const {
  if (index >= sites_) throw DomainError("LatticeSpec: site index out of range");
  return neighbors_[index];
}

const std::vector<std::size_t>& LatticeSpec::incident_bonds(std::size_t index) const {
  if (index >= sites_) throw DomainError("LatticeSpec: site index out of range");
  return incident_[index];
}

std::vector<Neighbor> neighbors(const LatticeSpec& lat, const Site& x) {
  return lat.neighbors(lat.site_index(x));
}

namespace {

void check_interface(const LatticeSpec& lat, std::span<const double> phi) {
  if (phi.size() != lat.site_count())
    throw DomainError("interface has " + std::to_string(phi.size()) + " heights, lattice has " +
                      std::to_string(lat.site_count()) + " sites");
  for (std::size_t i = 0; i < phi.size(); ++i)
    if (!(phi[i] >= 0.0))
      throw DomainError("interface height at site " + std::to_string(i + 1) + " is negative");
}

double bond_energy(const PotentialModel& v, const Bond& b, std::span<const double> phi) {
  return v.V(phi[b.first] - (b.boundary ? 0.0 : phi[b.second]));
}

}  // namespace

double hamiltonian(const LatticeSpec& lat, const PotentialModel& v, std::span<const double> phi) {
  check_interface(lat, phi);
  double h = 0.0;
  for (const auto& b : lat.bonds()) h += bond_energy(v, b, phi);
  return h;
}

double drift_V(const LatticeSpec& lat, const PotentialModel& v, std::size_t x,
               std::span<const double> phi) {
  check_interface(lat, phi);
  double s = 0.0;
  for (const auto& nb : lat.neighbors(x)) s += v.dV(phi[x] - (nb.clamped ? 0.0 : phi[nb.index]));
  return s;
}

DensityModel make_wetting_density(const LatticeSpec& lat, const PotentialModel& v) {
  auto shared_lat = std::make_shared<const LatticeSpec>(lat);
  auto shared_v = std::make_shared<const PotentialModel>(v);
  std::ostringstream label;
  label << "wetting(d=" << lat.d() << ",N=" << lat.side() << "," << v.label() << ")";

  // The hot paths skip the height validation; the chain and sampler only
  // ever produce heights in [0, L].
  auto log_rho = [shared_lat, shared_v](std::span<const double> phi) {
    double h = 0.0;
    for (const auto& b : shared_lat->bonds()) h += bond_energy(*shared_v, b, phi);
    return -h;
  };
  auto grad = [shared_lat, shared_v](std::span<const double> phi, std::span<double> out) {
    for (std::size_t x = 0; x < shared_lat->site_count(); ++x) {
      double s = 0.0;
      for (const auto& nb : shared_lat->neighbors(x))
        s += shared_v->dV(phi[x] - (nb.clamped ? 0.0 : phi[nb.index]));
      out[x] = -s;
    }
  };
  auto local = [shared_lat, shared_v](std::span<const double> phi, std::size_t x) {
    double h = 0.0;
    const auto& bonds = shared_lat->bonds();
    for (auto bi : shared_lat->incident_bonds(x)) h += bond_energy(*shared_v, bonds[bi], phi);
    return -h;
  };
  return DensityModel(lat.site_count(), label.str(), log_rho, grad, local);
}

}  // namespace sticky
