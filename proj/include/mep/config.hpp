#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mep/scenarios.hpp"
#include "mep/splitting.hpp"

namespace mep {

/// Run configuration: plain key=value text with [section] headers. Scenario
/// presets fill everything; explicit keys and CLI flags override.
struct SimulationConfig {
  // [scenario]
  std::string scenario;  // vortex | diocotron | custom

  // [physics]
  std::string eos = "covolume";  // covolume | isothermal
  double gamma = 1.4;
  double covolume_b = 0.0;
  double theta_t = 1e-4;
  double alpha = 1.0;
  double omega = 0.0;

  // [numerics]
  double theta = 0.5;
  double cfl = 0.25;
  double solver_tol = 1e-12;
  double tau_max = 1e30;
  double t_final = 1.0;
  std::string restart = "none";  // none | full | relaxation
  std::string integrator = "ssp_rk3";  // forward_euler | ssp_rk3
  int threads = 1;

  // [mesh]
  std::string mesh_kind = "disk";  // rectangle | disk
  int refinement = 0;

  // [vortex]
  double vortex_speed_x = 1.0;
  double vortex_speed_y = 1.0;
  double vortex_size = 5.0;
  double vortex_center_x = -1.0;
  double vortex_center_y = -1.0;
  double domain_halfwidth = 5.0;

  // [diocotron]
  double dio_r0 = 6.0;
  double dio_r1 = 8.0;
  double dio_radius = 16.0;
  double dio_rho_min = 1e-6;
  double dio_rho_max = 1.0;
  double dio_beta = 1e6;
  double dio_delta = 0.1;
  int dio_mode = 3;
  int dio_samples = 256;

  // [output]
  std::string output_dir = "out";
  int record_interval = 1;  // full diagnostics every N steps
  int snapshots = 0;        // VTK snapshot count (besides the initial one)
};

namespace detail {

struct ConfigKey {
  const char* section;
  const char* key;
  std::variant<double SimulationConfig::*, int SimulationConfig::*,
               std::string SimulationConfig::*>
      field;
};

inline const std::vector<ConfigKey>& config_keys() {
  using C = SimulationConfig;
  static const std::vector<ConfigKey> keys = {
      {"scenario", "name", &C::scenario},
      {"physics", "eos", &C::eos},
      {"physics", "gamma", &C::gamma},
      {"physics", "covolume_b", &C::covolume_b},
      {"physics", "theta_t", &C::theta_t},
      {"physics", "alpha", &C::alpha},
      {"physics", "omega", &C::omega},
      {"numerics", "theta", &C::theta},
      {"numerics", "cfl", &C::cfl},
      {"numerics", "solver_tol", &C::solver_tol},
      {"numerics", "tau_max", &C::tau_max},
      {"numerics", "t_final", &C::t_final},
      {"numerics", "restart", &C::restart},
      {"numerics", "integrator", &C::integrator},
      {"numerics", "threads", &C::threads},
      {"mesh", "kind", &C::mesh_kind},
      {"mesh", "refinement", &C::refinement},
      {"vortex", "speed_x", &C::vortex_speed_x},
      {"vortex", "speed_y", &C::vortex_speed_y},
      {"vortex", "size", &C::vortex_size},
      {"vortex", "center_x", &C::vortex_center_x},
      {"vortex", "center_y", &C::vortex_center_y},
      {"vortex", "domain_halfwidth", &C::domain_halfwidth},
      {"diocotron", "r0", &C::dio_r0},
      {"diocotron", "r1", &C::dio_r1},
      {"diocotron", "radius", &C::dio_radius},
      {"diocotron", "rho_min", &C::dio_rho_min},
      {"diocotron", "rho_max", &C::dio_rho_max},
      {"diocotron", "beta", &C::dio_beta},
      {"diocotron", "delta", &C::dio_delta},
      {"diocotron", "mode", &C::dio_mode},
      {"diocotron", "samples", &C::dio_samples},
      {"output", "directory", &C::output_dir},
      {"output", "record_interval", &C::record_interval},
      {"output", "snapshots", &C::snapshots},
  };
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

inline void config_set(SimulationConfig& cfg, const std::string& section, const std::string& key,
                       const std::string& value) {
  for (const auto& k : detail::config_keys()) {
    if (section != k.section || key != k.key) continue;
    if (std::holds_alternative<double SimulationConfig::*>(k.field)) {
      std::size_t pos = 0;
      double v = 0;
      try {
        v = std::stod(value, &pos);
      } catch (const std::exception&) {
        throw ConfigError(section + "." + key, "not a number: '" + value + "'");
      }
      if (pos != value.size() || !std::isfinite(v))
        throw ConfigError(section + "." + key, "not a number: '" + value + "'");
      cfg.*std::get<double SimulationConfig::*>(k.field) = v;
    } else if (std::holds_alternative<int SimulationConfig::*>(k.field)) {
      std::size_t pos = 0;
      int v = 0;
      try {
        v = std::stoi(value, &pos);
      } catch (const std::exception&) {
        throw ConfigError(section + "." + key, "not an integer: '" + value + "'");
      }
      if (pos != value.size())
        throw ConfigError(section + "." + key, "not an integer: '" + value + "'");
      cfg.*std::get<int SimulationConfig::*>(k.field) = v;
    } else {
      cfg.*std::get<std::string SimulationConfig::*>(k.field) = value;
    }
    return;
  }
  throw ConfigError(section + "." + key, "unknown key");
}

/// Range validation; every failure names the offending key.
inline void validate_config(const SimulationConfig& c) {
  if (c.scenario != "vortex" && c.scenario != "diocotron" && c.scenario != "custom")
    throw ConfigError("scenario.name",
                      c.scenario.empty() ? "scenario is required" : "unknown scenario '" + c.scenario + "'");
  if (c.eos != "covolume" && c.eos != "isothermal")
    throw ConfigError("physics.eos", "must be covolume or isothermal");
  if (c.eos == "covolume" && !(c.gamma > 1.0 && c.gamma <= 5.0 / 3.0))
    throw ConfigError("physics.gamma", "must satisfy 1 < gamma <= 5/3");
  if (c.covolume_b < 0) throw ConfigError("physics.covolume_b", "must be >= 0");
  if (c.theta_t < 0) throw ConfigError("physics.theta_t", "must be >= 0");
  if (!(c.alpha > 0)) throw ConfigError("physics.alpha", "must be > 0");
  if (!(c.theta > 0 && c.theta <= 1)) throw ConfigError("numerics.theta", "must be in (0, 1]");
  if (!(c.cfl > 0 && c.cfl < 1)) throw ConfigError("numerics.cfl", "must be in (0, 1)");
  if (!(c.solver_tol > 0)) throw ConfigError("numerics.solver_tol", "must be > 0");
  if (!(c.t_final >= 0)) throw ConfigError("numerics.t_final", "must be >= 0");
  if (c.restart != "none" && c.restart != "full" && c.restart != "relaxation")
    throw ConfigError("numerics.restart", "must be none, full, or relaxation");
  if (c.integrator != "forward_euler" && c.integrator != "ssp_rk3")
    throw ConfigError("numerics.integrator", "must be forward_euler or ssp_rk3");
  if (c.threads < 1) throw ConfigError("numerics.threads", "must be >= 1");
  if (c.mesh_kind != "rectangle" && c.mesh_kind != "disk")
    throw ConfigError("mesh.kind", "must be rectangle or disk");
  if (c.refinement < 0) throw ConfigError("mesh.refinement", "must be >= 0");
  if (c.record_interval < 1) throw ConfigError("output.record_interval", "must be >= 1");
  if (c.snapshots < 0) throw ConfigError("output.snapshots", "must be >= 0");
  if (c.scenario == "diocotron") {
    if (!(0 < c.dio_r0 && c.dio_r0 < c.dio_r1 && c.dio_r1 < c.dio_radius))
      throw ConfigError("diocotron.r0", "need 0 < r0 < r1 < radius");
    if (!(c.dio_delta > 0 && c.dio_delta < 0.5))
      throw ConfigError("diocotron.delta", "must be in (0, 1/2)");
    if (c.dio_mode < 1) throw ConfigError("diocotron.mode", "must be >= 1");
    if (c.dio_samples < 4 * c.dio_mode)
      throw ConfigError("diocotron.samples", "too few samples for the requested mode");
  }
}

/// Scenario presets. vortex: the smooth-vortex convergence setup (low-order
/// variant uses forward Euler + θ=1). diocotron: the magnetized annulus.
inline void apply_scenario_preset(SimulationConfig& c) {
  if (c.scenario == "vortex") {
    c.eos = "covolume";
    c.gamma = 1.4;
    c.covolume_b = 0.0;
    c.alpha = 1.0;
    c.omega = 0.0;
    c.cfl = 0.1;
    c.theta = 1.0;
    c.integrator = "forward_euler";
    c.t_final = 1.0;
    c.mesh_kind = "rectangle";
  } else if (c.scenario == "diocotron") {
    c.eos = "isothermal";
    c.theta_t = 1e-4;
    c.alpha = 2.0 * M_PI * c.dio_beta * c.dio_beta / c.dio_rho_max;
    c.omega = c.dio_beta * c.dio_beta;
    c.cfl = 0.25;
    c.theta = 0.5;
    c.integrator = "ssp_rk3";
    c.t_final = 1.0;
    c.mesh_kind = "disk";
    c.refinement = std::max(c.refinement, 4);
  }
}

inline SimulationConfig parse_config(std::istream& in) {
  SimulationConfig cfg;
  cfg.scenario.clear();
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(section + ".?", "expected key=value at line " + std::to_string(lineno));
    config_set(cfg, section, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  validate_config(cfg);
  return cfg;
}

inline SimulationConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

inline std::string serialize_config(const SimulationConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  std::string section;
  for (const auto& k : detail::config_keys()) {
    if (section != k.section) {
      section = k.section;
      out << "[" << section << "]\n";
    }
    out << k.key << " = ";
    if (std::holds_alternative<double SimulationConfig::*>(k.field))
      out << cfg.*std::get<double SimulationConfig::*>(k.field);
    else if (std::holds_alternative<int SimulationConfig::*>(k.field))
      out << cfg.*std::get<int SimulationConfig::*>(k.field);
    else
      out << cfg.*std::get<std::string SimulationConfig::*>(k.field);
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------

inline VortexParams vortex_params_from(const SimulationConfig& c) {
  VortexParams p;
  p.box_lo = {-c.domain_halfwidth, -c.domain_halfwidth};
  p.box_hi = {c.domain_halfwidth, c.domain_halfwidth};
  p.speed = {c.vortex_speed_x, c.vortex_speed_y};
  p.size = c.vortex_size;
  p.center = {c.vortex_center_x, c.vortex_center_y};
  p.gamma = c.gamma;
  p.alpha = c.alpha;
  return p;
}

inline DiocotronParams diocotron_params_from(const SimulationConfig& c) {
  DiocotronParams p;
  p.r0 = c.dio_r0;
  p.r1 = c.dio_r1;
  p.radius = c.dio_radius;
  p.rho_min = c.dio_rho_min;
  p.rho_max = c.dio_rho_max;
  p.beta_scaling = c.dio_beta;
  p.delta = c.dio_delta;
  p.mode = c.dio_mode;
  p.theta_T = c.theta_t;
  return p;
}

/// Assembles a ready-to-run Simulation from a validated config.
inline Simulation build_simulation(const SimulationConfig& c) {
  validate_config(c);
  Simulation sim;
  sim.theta = c.theta;
  sim.cfl = c.cfl;
  sim.alpha = c.alpha;
  sim.omega = c.omega;
  sim.solver_tol = c.solver_tol;
  sim.tau_max = c.tau_max;
  sim.nthreads = static_cast<unsigned>(c.threads);
  sim.integrator =
      c.integrator == "forward_euler" ? HypIntegrator::forward_euler : HypIntegrator::ssp_rk3;
  sim.restart = c.restart == "none"
                    ? RestartMode::none
                    : (c.restart == "full" ? RestartMode::full : RestartMode::relaxation);

  if (c.scenario == "vortex") {
    const VortexParams vp = vortex_params_from(c);
    const int n = 32 << c.refinement;
    sim.prepare(build_rectangle_mesh(vp.box_lo, vp.box_hi, n, n));
    sim.eos = Eos::covolume(c.gamma, c.covolume_b);
    sim.bc.kind = BoundaryData::Kind::dirichlet;
    sim.bc.dirichlet = [vp](Vec2 x, double t, double* u) {
      const ConservedState s = vortex_exact(x, t, vp);
      u[0] = s.rho;
      u[1] = s.m.x;
      u[2] = s.m.y;
      u[3] = s.E;
    };
    sim.background.active = true;
    sim.background.charge = [vp](Vec2 x, double t) { return vortex_exact(x, t, vp).rho; };
    sim.background.current = [vp](Vec2 x, double t) { return vortex_exact(x, t, vp).m; };
    sim.state.resize(sim.dg.n_nodes, true);
    for (int i = 0; i < sim.dg.n_nodes; ++i) {
      const ConservedState s = vortex_exact(sim.dg.coords[i], 0.0, vp);
      sim.state.rho[i] = s.rho;
      sim.state.mx[i] = s.m.x;
      sim.state.my[i] = s.m.y;
      sim.state.en[i] = s.E;
    }
  } else if (c.scenario == "diocotron") {
    const DiocotronParams dp = diocotron_params_from(c);
    sim.prepare(build_disk_mesh(dp.radius, c.refinement));
    sim.eos = Eos::isothermal(c.theta_t);
    sim.bc.kind = BoundaryData::Kind::reflecting;
    diocotron_initialize(sim.dg, sim.cg, dp, sim.precond, sim.state, sim.phi, c.solver_tol,
                         sim.nthreads);
    sim.sampler.emplace(sim.mesh, sim.cg, dp.r0, c.dio_samples);
    sim.sampler_mode = dp.mode;
  } else {
    throw ConfigError("scenario.name", "build_simulation requires vortex or diocotron");
  }
  return sim;
}

}  // namespace mep
