#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "sticky/chain.hpp"
#include "sticky/density_check.hpp"
#include "sticky/errors.hpp"
#include "sticky/form.hpp"
#include "sticky/parallel.hpp"
#include "sticky/quadrature.hpp"
#include "sticky/report_json.hpp"
#include "sticky/sampler.hpp"
#include "sticky/stats.hpp"
#include "sticky/wetting.hpp"

#ifndef STICKY_WALK_VERSION
#define STICKY_WALK_VERSION "0.0.0"
#endif

namespace sticky::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- config

const json* child(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("config key '" + key + "' must be finite");
  return x;
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError("config key '" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown config key '" + where + it.key() + "'");
}

json require_object(const json& v, const std::string& key) {
  if (!v.is_object()) throw ConfigError("config key '" + key + "' must be an object");
  return v;
}

ModelConfig model_from_json(const json& m) {
  if (m.is_string()) return parse_model_spec(m.get<std::string>());
  require_object(m, "model");
  reject_unknown(m, {"family", "params", "d", "N", "potential"}, "model.");
  ModelConfig out;
  const json* fam = child(m, "family");
  if (!fam || !fam->is_string()) throw ConfigError("config key 'model.family' is required");
  out.family = fam->get<std::string>();
  if (const json* p = child(m, "params")) out.params = numbers(*p, "model.params");
  if (const json* d = child(m, "d")) out.d = static_cast<int>(count(*d, "model.d"));
  if (const json* n = child(m, "N")) out.N = static_cast<int>(count(*n, "model.N"));
  if (const json* pot = child(m, "potential")) {
    if (!pot->is_string()) throw ConfigError("config key 'model.potential' must be a string");
    out.potential = pot->get<std::string>();
  }
  return out;
}

ordered_json model_to_json(const ModelConfig& m) {
  ordered_json j;
  j["family"] = m.family;
  j["params"] = m.params;
  if (m.family == "wetting") {
    j["d"] = m.d;
    j["N"] = m.N;
    j["potential"] = m.potential;
  }
  return j;
}

void validate_model(const ModelConfig& m) {
  if (m.family == "exponential" || m.family == "gaussian") {
    if (m.params.empty())
      throw ConfigError("config key 'model.params' must list one " +
                        std::string(m.family == "exponential" ? "rate" : "scale") +
                        " per coordinate");
    for (double p : m.params)
      if (!(p > 0.0)) throw ConfigError("config key 'model.params' must be positive");
    if (m.params.size() > 20) throw ConfigError("config key 'model.params': at most 20 coordinates");
  } else if (m.family == "wetting") {
    if (m.d < 1) throw ConfigError("config key 'model.d' must be >= 1");
    if (m.N < 1) throw ConfigError("config key 'model.N' must be >= 1");
    if (std::pow(m.N, m.d) > 20) throw ConfigError("config key 'model.N': N^d must be <= 20");
    if (m.potential != "gaussian" && m.potential != "quartic" && m.potential != "smoothed-well")
      throw ConfigError("config key 'model.potential' must be gaussian, quartic or smoothed-well");
    if (m.params.size() > 1) throw ConfigError("config key 'model.params': at most one stiffness");
    for (double p : m.params)
      if (!(p > 0.0)) throw ConfigError("config key 'model.params' must be positive");
  } else {
    throw ConfigError("config key 'model.family' must be exponential, gaussian or wetting (got '" +
                      m.family + "')");
  }
}

// ---------------------------------------------------------------- output

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Context {
  RunConfig cfg;
  std::string command;
  std::filesystem::path dir;
  std::ostream& out;
};

ordered_json sidecar(const Context& c) {
  ordered_json j;
  j["tool"] = "sticky-walk";
  j["version"] = STICKY_WALK_VERSION;
  j["command"] = c.command;
  j["seed"] = c.cfg.seed;
  j["config_hash"] = hex64(fnv1a(c.cfg.echo.dump()));
  j["config"] = c.cfg.echo;
  return j;
}

std::ofstream open_output(const Context& c, const std::string& name) {
  std::ofstream f(c.dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (c.dir / name).string());
  return f;
}

void write_json(const Context& c, const std::string& name, const ordered_json& j) {
  auto f = open_output(c, name);
  f << j.dump(2) << '\n';
}

struct Row {
  std::string observable;
  double estimate = 0.0;
  double target = 0.0;
  double se = 0.0;
  bool pass = false;
};

void write_table(const Context& c, const std::string& name, const std::vector<Row>& rows) {
  auto f = open_output(c, name);
  f << "observable,estimate,target,SE,pass\n";
  for (const auto& r : rows)
    f << r.observable << ',' << num(r.estimate) << ',' << num(r.target) << ',' << num(r.se) << ','
      << (r.pass ? "true" : "false") << '\n';
}

ordered_json rows_json(const std::vector<Row>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"observable", r.observable},
                   {"estimate", r.estimate},
                   {"target", r.target},
                   {"SE", r.se},
                   {"pass", r.pass}});
  return arr;
}

// ---------------------------------------------------------------- helpers

StickyMeasureSpec measure_spec(const RunConfig& cfg, std::size_t n, double beta) {
  StickyMeasureSpec s{n, beta, cfg.quad_length > 0.0 ? cfg.quad_length : cfg.grid_L,
                      cfg.quad_nodes};
  s.validate();
  return s;
}

GridSchemeSpec grid_scheme(const RunConfig& cfg) {
  GridSchemeSpec s;
  s.h = cfg.grid_h;
  s.L = cfg.grid_L;
  s.T = cfg.horizon;
  s.seed = cfg.seed;
  s.validate();
  return s;
}

std::vector<double> start_state(const RunConfig& cfg, std::size_t n) {
  if (cfg.x0.empty()) return std::vector<double>(n, 0.0);
  if (cfg.x0.size() != n)
    throw ConfigError("config key 'simulate.x0' must have one entry per coordinate (" +
                      std::to_string(n) + ")");
  return cfg.x0;
}

Row occupancy_row(const OccupancyRow& r) { return {r.observable, r.estimate, r.target, r.se, r.pass}; }

// ---------------------------------------------------------------- commands

int cmd_quadrature(Context& c) {
  const auto rho = build_density(c.cfg.model);
  const std::size_t n = rho.dim();
  const auto spec = measure_spec(c.cfg, n, c.cfg.beta);
  const auto total = stratified_integral([](std::span<const double>) { return 1.0; }, rho, spec);
  const auto check = density_check(rho, spec);

  c.out << "mu(E) = " << num(std::round(total.value * 1e10) / 1e10) << '\n';
  ordered_json ratios = ordered_json::array();
  for (std::size_t j = 0; j < n; ++j) {
    const auto r = boundary_mass_ratio(j, rho, spec);
    c.out << "P(x_" << j + 1 << " = 0) = " << num(r.ratio) << '\n';
    ratios.push_back(to_json(r));
  }
  c.out << "density check: " << (check.ok ? "ok" : "FAILED") << '\n';

  {
    auto f = open_output(c, "quadrature.csv");
    f << "stratum,weighted_mass,probability\n";
    for (const auto& [b, v] : total.per_stratum)
      f << b.bit_string(n) << ',' << num(v) << ',' << num(v / total.value) << '\n';
  }
  auto j = sidecar(c);
  j["quadrature"] = to_json(total, n);
  j["boundary_mass_ratio"] = ratios;
  j["density_check"] = to_json(check);
  write_json(c, "quadrature.json", j);
  return kExitOk;
}

int cmd_sample(Context& c) {
  const auto rho = build_density(c.cfg.model);
  const std::size_t n = rho.dim();
  const auto spec = measure_spec(c.cfg, n, c.cfg.beta);
  SamplerConfig sc;
  sc.n_samples = c.cfg.n_samples;
  sc.burn_in = c.cfg.burn_in;
  sc.thin = c.cfg.thin;
  sc.grid_nodes = c.cfg.grid_nodes;
  sc.seed = c.cfg.seed;
  sc.validate();
  const auto set = sample_invariant(rho, spec, sc);

  {
    auto f = open_output(c, "samples.csv");
    for (std::size_t j = 0; j < n; ++j) f << (j ? "," : "") << "x_" << j + 1;
    f << '\n';
    for (std::size_t i = 0; i < set.size(); ++i) {
      auto x = set.sample(i);
      for (std::size_t j = 0; j < n; ++j) f << (j ? "," : "") << num(x[j]);
      f << '\n';
    }
  }
  auto j = sidecar(c);
  ordered_json strata, atoms = ordered_json::array();
  for (auto b : enumerate_strata(n)) strata[b.bit_string(n)] = set.stratum_frequency(b);
  for (std::size_t k = 0; k < n; ++k) atoms.push_back(set.atom_frequency(k));
  j["samples"] = set.size();
  j["stratum_frequencies"] = strata;
  j["atom_frequencies"] = atoms;
  write_json(c, "samples.json", j);
  c.out << "wrote " << set.size() << " samples\n";
  return kExitOk;
}

int cmd_simulate(Context& c) {
  const auto rho = build_density(c.cfg.model);
  const std::size_t n = rho.dim();
  const auto scheme = grid_scheme(c.cfg);
  SimulationOptions opt;
  opt.record_events = true;
  opt.decimate = std::max<std::size_t>(1, c.cfg.decimate);
  const auto traj = simulate(start_state(c.cfg, n), rho, c.cfg.beta, scheme, opt);

  {
    auto f = open_output(c, "events.csv");
    f << 't';
    for (std::size_t j = 0; j < n; ++j) f << ",x_" << j + 1;
    f << '\n';
    for (std::size_t i = 0; i < traj.logged_rows(); ++i) {
      f << num(traj.event_times[i]);
      for (double v : traj.logged_state(i)) f << ',' << num(v);
      f << '\n';
    }
  }
  auto j = sidecar(c);
  ordered_json occ;
  occ["origin"] = occupation_fraction(traj, OccupationPredicate::origin());
  occ["boundary"] = occupation_fraction(traj, OccupationPredicate::boundary());
  for (std::size_t k = 0; k < n; ++k)
    occ["zero[" + std::to_string(k + 1) + "]"] =
        occupation_fraction(traj, OccupationPredicate::zero(k));
  if (n <= 10)
    for (auto b : enumerate_strata(n))
      occ["stratum[" + b.bit_string(n) + "]"] =
          occupation_fraction(traj, OccupationPredicate::in_stratum(b));
  ordered_json lt = ordered_json::array();
  for (std::size_t k = 0; k < n; ++k) lt.push_back(local_time(traj, k, c.cfg.beta));
  j["events"] = traj.events;
  j["total_time"] = traj.total_time;
  j["truncated"] = traj.truncated;
  j["logged_rows"] = traj.logged_rows();
  j["occupation"] = occ;
  j["local_time"] = lt;
  write_json(c, "simulate.json", j);
  c.out << "simulated " << traj.events << " events to t = " << num(traj.total_time) << '\n';
  return kExitOk;
}

int cmd_occupancy(Context& c) {
  const auto rho = build_density(c.cfg.model);
  const std::size_t n = rho.dim();
  const auto spec = measure_spec(c.cfg, n, c.cfg.beta);
  const auto traj = simulate(start_state(c.cfg, n), rho, c.cfg.beta, grid_scheme(c.cfg));
  std::vector<Row> rows;
  for (const auto& r : occupancy_report(traj, rho, spec)) rows.push_back(occupancy_row(r));
  write_table(c, "occupancy.csv", rows);
  auto j = sidecar(c);
  j["events"] = traj.events;
  j["rows"] = rows_json(rows);
  write_json(c, "occupancy.json", j);
  std::size_t passed = 0;
  for (const auto& r : rows) passed += r.pass;
  c.out << passed << " of " << rows.size() << " occupancy rows within 3 SE\n";
  return kExitOk;
}

int cmd_verify_ibp(Context& c) {
  const auto rho = build_density(c.cfg.model);
  const std::size_t n = rho.dim();
  if (n > 3) throw ConfigError("config key 'model': verify-ibp supports at most 3 coordinates");
  const auto spec = measure_spec(c.cfg, n, c.cfg.beta);
  if (c.cfg.support > spec.length)
    throw ConfigError("config key 'verify.support' exceeds the quadrature length");
  const double tol = c.cfg.ibp_tolerance > 0.0 ? c.cfg.ibp_tolerance
                     : c.cfg.model.family == "wetting" ? 1e-5
                                                       : 1e-6;
  const auto fam = builtin_test_functions(n, c.cfg.support);
  ordered_json cases = ordered_json::array();
  std::size_t failed = 0;
  double worst = 0.0;
  for (const auto& f : fam)
    for (const auto& g : fam) {
      const auto r = check_ibp(f, g, rho, spec);
      const bool pass = r.rel_residual < tol;
      failed += !pass;
      worst = std::max(worst, r.rel_residual);
      ordered_json cj;
      cj["f"] = f.label();
      cj["g"] = g.label();
      const auto rj = to_json(r, n);
      for (auto it = rj.begin(); it != rj.end(); ++it) cj[it.key()] = *it;
      cj["pass"] = pass;
      cases.push_back(cj);
    }
  auto j = sidecar(c);
  j["tolerance"] = tol;
  j["max_rel_residual"] = worst;
  j["failed"] = failed;
  j["cases"] = cases;
  write_json(c, "verify-ibp.json", j);
  c.out << cases.size() - failed << " of " << cases.size()
        << " pairs pass (max relative residual " << num(worst) << ")\n";
  return failed ? kExitCheckFailed : kExitOk;
}

int cmd_verify_ergodic(Context& c) {
  const auto rho = build_density(c.cfg.model);
  const std::size_t n = rho.dim();
  const auto spec = measure_spec(c.cfg, n, c.cfg.beta);
  const auto scheme = grid_scheme(c.cfg);

  struct Named {
    std::string label;
    Observable f;
  };
  std::vector<Named> obs{{"one", [](std::span<const double>) { return 1.0; }}};
  for (std::size_t j = 0; j < n; ++j) {
    obs.push_back({"zero[" + std::to_string(j + 1) + "]",
                   [j](std::span<const double> x) { return x[j] == 0.0 ? 1.0 : 0.0; }});
    obs.push_back({"min(x_" + std::to_string(j + 1) + ",1)",
                   [j](std::span<const double> x) { return std::min(x[j], 1.0); }});
  }
  std::vector<ErgodicObserver> observers;
  observers.reserve(obs.size());
  SimulationOptions opt;
  for (const auto& o : obs) observers.emplace_back(o.f, scheme.T);
  for (auto& o : observers) opt.observers.push_back(&o);
  const auto traj = simulate(start_state(c.cfg, n), rho, c.cfg.beta, scheme, opt);

  std::vector<Row> rows;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto rep =
        make_ergodic_report(obs[k].label, observers[k].batches(), ergodic_target(obs[k].f, rho, spec));
    rows.push_back({rep.label, rep.average, rep.target, rep.se, rep.pass});
  }

  if (c.cfg.paths > 0) {
    auto f = TestFunction::product(std::vector<Profile>(n, Profile::Vanishing),
                                   std::vector<double>(n, c.cfg.support));
    GridSchemeSpec unit = scheme;
    unit.T = 1.0;
    const auto ens = martingale_ensemble(std::vector<double>(n, 0.0), f, rho, c.cfg.beta, unit,
                                         c.cfg.paths, worker_count());
    const auto res = martingale_residual(ens);
    rows.push_back({"martingale_mean", res.mean, 0.0, res.se,
                    std::abs(res.mean) <= 3.0 * res.se + kPassFloor});
    const auto qv = qv_ratio(ens);
    const double band = n == 1 ? 0.05 : 0.07;
    rows.push_back({"qv_ratio", qv.ratio, 1.0, std::nan(""),
                    !qv.degenerate && std::abs(qv.ratio - 1.0) <= band});
  }

  write_table(c, "verify-ergodic.csv", rows);
  auto j = sidecar(c);
  j["events"] = traj.events;
  j["rows"] = rows_json(rows);
  write_json(c, "verify-ergodic.json", j);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.pass;
  c.out << rows.size() - failed << " of " << rows.size() << " ergodic checks pass\n";
  return failed ? kExitCheckFailed : kExitOk;
}

int cmd_sweep_beta(Context& c) {
  const auto rho = build_density(c.cfg.model);
  const std::size_t n = rho.dim();
  if (c.cfg.betas.empty()) throw ConfigError("config key 'sweep.betas' must not be empty");
  for (double b : c.cfg.betas)
    if (!(b > 0.0)) throw ConfigError("config key 'sweep.betas' must be positive");
  // Coefficients are β-free; one quadrature serves the whole sweep.
  const auto base = measure_spec(c.cfg, n, c.cfg.betas.front());
  std::vector<BoundaryMassRatio> ratios;
  for (std::size_t j = 0; j < n; ++j) ratios.push_back(boundary_mass_ratio(j, rho, base));

  std::vector<Row> rows;
  std::vector<std::vector<double>> per_coord(n);
  for (std::size_t k = 0; k < c.cfg.betas.size(); ++k) {
    const double beta = c.cfg.betas[k];
    SimulationOptions opt;
    opt.stream = k;
    const auto traj = simulate(start_state(c.cfg, n), rho, beta, grid_scheme(c.cfg), opt);
    const auto spec = measure_spec(c.cfg, n, beta);
    for (const auto& r : occupancy_report(traj, rho, spec)) {
      if (r.observable.rfind("zero[", 0) != 0) continue;
      const std::size_t j = std::stoul(r.observable.substr(5)) - 1;
      Row row = occupancy_row(r);
      row.observable = "beta=" + num(beta) + " " + r.observable;
      row.target = ratios[j].at(beta);
      row.pass = std::abs(row.estimate - row.target) <= 3.0 * row.se + kPassFloor;
      rows.push_back(row);
      per_coord[j].push_back(row.estimate);
    }
  }
  ordered_json monotone = ordered_json::array();
  const bool ascending = std::is_sorted(c.cfg.betas.begin(), c.cfg.betas.end());
  for (const auto& v : per_coord)
    monotone.push_back(ascending &&
                       std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end());
  write_table(c, "sweep-beta.csv", rows);
  auto j = sidecar(c);
  j["rows"] = rows_json(rows);
  j["strictly_increasing"] = monotone;
  write_json(c, "sweep-beta.json", j);
  for (std::size_t k = 0; k < n; ++k)
    c.out << "zero[" << k + 1 << "] strictly increasing in beta: "
          << (monotone[k].get<bool>() ? "yes" : "no") << '\n';
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------- public

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ModelConfig parse_model_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  ModelConfig m;
  m.family = spec.substr(0, colon);
  std::vector<std::string> parts;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
  }
  auto to_double = [&](const std::string& t) {
    double v = 0.0;
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size())
      throw ConfigError("config key 'model': cannot parse '" + t + "' in '" + spec + "'");
    return v;
  };
  if (m.family == "wetting") {
    if (parts.size() < 3 || parts.size() > 4)
      throw ConfigError("config key 'model': expected wetting:d,N,potential[,stiffness]");
    m.d = static_cast<int>(to_double(parts[0]));
    m.N = static_cast<int>(to_double(parts[1]));
    m.potential = parts[2];
    if (parts.size() == 4) m.params = {to_double(parts[3])};
  } else {
    for (const auto& p : parts) m.params.push_back(to_double(p));
  }
  validate_model(m);
  return m;
}

DensityModel build_density(const ModelConfig& m) {
  validate_model(m);
  if (m.family == "exponential") return make_exponential_density(m.params);
  if (m.family == "gaussian") return make_gaussian_density(m.params);
  return make_wetting_density(LatticeSpec(m.d, m.N), make_potential(m.potential, m.params));
}

RunConfig resolve_config(const json& file, const FlagOverrides& flags) {
  const json empty = json::object();
  const json& f = file.is_null() ? empty : file;
  if (!f.is_object()) throw ConfigError("config file must hold a JSON object");
  reject_unknown(f,
                 {"model", "beta", "grid", "horizon", "seed", "out", "paths", "quadrature",
                  "sample", "simulate", "verify", "sweep"},
                 "");
  RunConfig c;

  if (flags.model) {
    c.model = parse_model_spec(*flags.model);
  } else if (const json* m = child(f, "model")) {
    c.model = model_from_json(*m);
  } else {
    throw ConfigError("missing required config key 'model'");
  }
  validate_model(c.model);

  if (flags.beta) {
    c.beta = *flags.beta;
  } else if (const json* b = child(f, "beta")) {
    c.beta = number(*b, "beta");
  } else {
    throw ConfigError("missing required config key 'beta'");
  }
  if (!(c.beta > 0.0) || !std::isfinite(c.beta)) throw ConfigError("config key 'beta' must be > 0");

  if (const json* g = child(f, "grid")) {
    require_object(*g, "grid");
    reject_unknown(*g, {"h", "L"}, "grid.");
    if (const json* h = child(*g, "h")) c.grid_h = number(*h, "grid.h");
    if (const json* L = child(*g, "L")) c.grid_L = number(*L, "grid.L");
  }
  if (flags.grid_h) c.grid_h = *flags.grid_h;
  if (flags.grid_L) c.grid_L = *flags.grid_L;
  if (!(c.grid_h > 0.0)) throw ConfigError("config key 'grid.h' must be > 0");
  if (!(c.grid_L > 0.0)) throw ConfigError("config key 'grid.L' must be > 0");
  {
    const double q = c.grid_L / c.grid_h;
    if (std::abs(q - std::round(q)) > 1e-9 * q || std::round(q) < 4)
      throw ConfigError("config keys 'grid.L'/'grid.h' must give an integer number of levels >= 4");
  }

  if (const json* t = child(f, "horizon")) c.horizon = number(*t, "horizon");
  if (flags.horizon) c.horizon = *flags.horizon;
  if (!(c.horizon >= 0.0)) throw ConfigError("config key 'horizon' must be >= 0");

  if (const json* s = child(f, "seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      throw ConfigError("config key 'seed' must be a nonnegative integer");
    c.seed = s->get<std::uint64_t>();
  }
  if (flags.seed) c.seed = *flags.seed;

  if (const json* o = child(f, "out")) {
    if (!o->is_string()) throw ConfigError("config key 'out' must be a string");
    c.out = o->get<std::string>();
  }
  if (flags.out) c.out = *flags.out;

  if (const json* p = child(f, "paths")) c.paths = count(*p, "paths");
  if (flags.paths) c.paths = *flags.paths;

  if (const json* q = child(f, "quadrature")) {
    require_object(*q, "quadrature");
    reject_unknown(*q, {"length", "nodes_per_axis"}, "quadrature.");
    if (const json* v = child(*q, "length")) c.quad_length = number(*v, "quadrature.length");
    if (const json* v = child(*q, "nodes_per_axis"))
      c.quad_nodes = count(*v, "quadrature.nodes_per_axis");
  }
  if (c.quad_length < 0.0) throw ConfigError("config key 'quadrature.length' must be > 0");
  if (c.quad_nodes < 2) throw ConfigError("config key 'quadrature.nodes_per_axis' must be >= 2");

  if (const json* s = child(f, "sample")) {
    require_object(*s, "sample");
    reject_unknown(*s, {"n_samples", "burn_in", "thin", "grid_nodes"}, "sample.");
    if (const json* v = child(*s, "n_samples")) c.n_samples = count(*v, "sample.n_samples");
    if (const json* v = child(*s, "burn_in")) c.burn_in = count(*v, "sample.burn_in");
    if (const json* v = child(*s, "thin")) c.thin = count(*v, "sample.thin");
    if (const json* v = child(*s, "grid_nodes")) c.grid_nodes = count(*v, "sample.grid_nodes");
  }
  if (c.n_samples < 1) throw ConfigError("config key 'sample.n_samples' must be >= 1");
  if (c.thin < 1) throw ConfigError("config key 'sample.thin' must be >= 1");
  if (c.grid_nodes < 16) throw ConfigError("config key 'sample.grid_nodes' must be >= 16");

  if (const json* s = child(f, "simulate")) {
    require_object(*s, "simulate");
    reject_unknown(*s, {"decimate", "x0"}, "simulate.");
    if (const json* v = child(*s, "decimate")) c.decimate = count(*v, "simulate.decimate");
    if (const json* v = child(*s, "x0")) c.x0 = numbers(*v, "simulate.x0");
  }
  if (c.decimate < 1) throw ConfigError("config key 'simulate.decimate' must be >= 1");

  if (const json* v = child(f, "verify")) {
    require_object(*v, "verify");
    reject_unknown(*v, {"support", "ibp_tolerance"}, "verify.");
    if (const json* s = child(*v, "support")) c.support = number(*s, "verify.support");
    if (const json* t = child(*v, "ibp_tolerance"))
      c.ibp_tolerance = number(*t, "verify.ibp_tolerance");
  }
  if (!(c.support > 0.0)) throw ConfigError("config key 'verify.support' must be > 0");

  if (const json* s = child(f, "sweep")) {
    require_object(*s, "sweep");
    reject_unknown(*s, {"betas"}, "sweep.");
    if (const json* b = child(*s, "betas")) c.betas = numbers(*b, "sweep.betas");
  }

  // The output directory stays out of the echo so relocated runs hash alike.
  ordered_json e;
  e["model"] = model_to_json(c.model);
  e["beta"] = c.beta;
  e["grid"] = {{"h", c.grid_h}, {"L", c.grid_L}};
  e["horizon"] = c.horizon;
  e["seed"] = c.seed;
  e["paths"] = c.paths;
  e["quadrature"] = {{"length", c.quad_length > 0.0 ? c.quad_length : c.grid_L},
                     {"nodes_per_axis", c.quad_nodes}};
  e["sample"] = {{"n_samples", c.n_samples},
                 {"burn_in", c.burn_in},
                 {"thin", c.thin},
                 {"grid_nodes", c.grid_nodes}};
  e["simulate"] = {{"decimate", c.decimate}, {"x0", c.x0}};
  e["verify"] = {{"support", c.support}, {"ibp_tolerance", c.ibp_tolerance}};
  e["sweep"] = {{"betas", c.betas}};
  c.echo = e;
  return c;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"sticky-walk: sticky reflected diffusions on the orthant"};
  app.set_version_flag("--version", std::string(STICKY_WALK_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(
      "Configuration: --config reads a JSON file; any flag given on the command line\n"
      "overrides the corresponding file key. Exit codes: 0 ok, 2 invalid configuration,\n"
      "3 numeric failure, 4 failed verify-* check. STICKY_WALK_THREADS caps workers.");

  std::string config_path;
  FlagOverrides flags;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--model", flags.model,
                 "model: exponential:c1,c2,... | gaussian:s1,... | wetting:d,N,potential[,k]");
  app.add_option("--seed", flags.seed, "64-bit seed");
  app.add_option("--beta", flags.beta, "stickiness beta > 0");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--paths", flags.paths, "martingale ensemble size (verify-ergodic)");
  app.add_option("--horizon", flags.horizon, "time horizon T");
  app.add_option("--grid-h", flags.grid_h, "grid step h");
  app.add_option("--grid-L", flags.grid_L, "reflecting wall L (multiple of h)");

  using Command = int (*)(Context&);
  const std::pair<const char*, std::pair<const char*, Command>> table[] = {
      {"quadrature", {"stratified quadrature oracle: mu(E), stratum masses", cmd_quadrature}},
      {"sample", {"Gibbs sampling of the invariant measure", cmd_sample}},
      {"simulate", {"grid-chain trajectory with event log", cmd_simulate}},
      {"occupancy", {"occupation fractions against the quadrature oracle", cmd_occupancy}},
      {"verify-ibp", {"integration-by-parts check on the builtin test functions", cmd_verify_ibp}},
      {"verify-ergodic", {"ergodic averages and martingale diagnostics", cmd_verify_ergodic}},
      {"sweep-beta", {"boundary occupation across a beta sweep", cmd_sweep_beta}},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [name, info] : table) subs.emplace_back(app.add_subcommand(name, info.first), info.second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    json file;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + config_path + "' is not valid JSON: " + e.what());
      }
    }
    Context ctx{resolve_config(file, flags), "", {}, out};
    for (const auto& [sub, fn] : subs) {
      if (!sub->parsed()) continue;
      ctx.command = sub->get_name();
      ctx.dir = ctx.cfg.out;
      std::filesystem::create_directories(ctx.dir);
      return fn(ctx);
    }
    return kExitValidation;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace sticky::cli
