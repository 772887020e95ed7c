// Command-line front end: run a scenario, run the vortex convergence study,
// or fit diocotron growth rates.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mep/config.hpp"
#include "mep/diagnostics.hpp"
#include "mep/io.hpp"
#include "mep/splitting.hpp"

namespace {

struct Overrides {
  std::optional<std::string> scenario, restart, integrator, output_dir;
  std::optional<int> refinement, mode, threads, record_interval, snapshots;
  std::optional<double> t_final, theta, cfl, tol;
};

// precedence: defaults < scenario preset < config file keys < CLI flags
mep::SimulationConfig resolve_config(const std::string& config_path, const Overrides& ov) {
  std::vector<std::array<std::string, 3>> file_keys;
  std::string scenario;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + config_path);
    std::string line, section;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = mep::detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') {
        section = mep::detail::trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw std::runtime_error("config: expected key=value: " + line);
      file_keys.push_back({section, mep::detail::trim(line.substr(0, eq)),
                           mep::detail::trim(line.substr(eq + 1))});
      if (section == "scenario" && file_keys.back()[1] == "name") scenario = file_keys.back()[2];
    }
  }
  if (ov.scenario) scenario = *ov.scenario;

  mep::SimulationConfig cfg;
  cfg.scenario = scenario;
  if (ov.refinement) cfg.refinement = *ov.refinement;  // preset may clamp it
  if (ov.mode) cfg.dio_mode = *ov.mode;
  mep::apply_scenario_preset(cfg);
  for (const auto& [sec, key, value] : file_keys) mep::config_set(cfg, sec, key, value);

  if (ov.restart) cfg.restart = *ov.restart;
  if (ov.integrator) cfg.integrator = *ov.integrator;
  if (ov.output_dir) cfg.output_dir = *ov.output_dir;
  if (ov.refinement) cfg.refinement = *ov.refinement;
  if (ov.mode) cfg.dio_mode = *ov.mode;
  if (ov.threads) cfg.threads = *ov.threads;
  if (ov.record_interval) cfg.record_interval = *ov.record_interval;
  if (ov.snapshots) cfg.snapshots = *ov.snapshots;
  if (ov.t_final) cfg.t_final = *ov.t_final;
  if (ov.theta) cfg.theta = *ov.theta;
  if (ov.cfl) cfg.cfl = *ov.cfl;
  if (ov.tol) cfg.solver_tol = *ov.tol;
  mep::validate_config(cfg);
  return cfg;
}

void add_override_flags(CLI::App* cmd, Overrides& ov, std::string& config_path) {
  cmd->add_option("--config", config_path, "configuration file (key=value with [sections])");
  cmd->add_option("--scenario", ov.scenario, "vortex | diocotron");
  cmd->add_option("--refinement", ov.refinement, "mesh refinement level");
  cmd->add_option("--mode", ov.mode, "diocotron perturbation mode l");
  cmd->add_option("--restart", ov.restart, "Gauss law restart: none | full | relaxation");
  cmd->add_option("--integrator", ov.integrator, "hyperbolic integrator: forward_euler | ssp_rk3");
  cmd->add_option("--threads", ov.threads, "worker thread count");
  cmd->add_option("--output-dir", ov.output_dir, "output directory");
  cmd->add_option("--t-final", ov.t_final, "final time");
  cmd->add_option("--theta", ov.theta, "source-update theta (1 = backward Euler, 0.5 = CN)");
  cmd->add_option("--cfl", ov.cfl, "hyperbolic CFL parameter");
  cmd->add_option("--tol", ov.tol, "linear solver relative tolerance");
  cmd->add_option("--record-interval", ov.record_interval, "full diagnostics every N steps");
  cmd->add_option("--snapshots", ov.snapshots, "number of VTK snapshots after the initial one");
}

int run_command(const mep::SimulationConfig& cfg, bool verbose) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  std::filesystem::create_directories(cfg.output_dir);

  mep::Simulation sim = mep::build_simulation(cfg);
  if (cfg.scenario == "diocotron") {
    const mep::Timescales ts = mep::timescale_report(cfg.alpha, cfg.dio_rho_max, cfg.omega);
    std::printf("timescales: omega_c = %.3e, omega_p = %.3e, omega_d = %.3e\n", ts.omega_c,
                ts.omega_p, ts.omega_d);
  }

  std::vector<double> snapshot_times;
  for (int s = 0; s <= cfg.snapshots; ++s)
    snapshot_times.push_back(cfg.snapshots == 0 ? 0.0 : cfg.t_final * s / cfg.snapshots);
  std::size_t next_snapshot = 0;
  int snapshot_id = 0;
  auto maybe_snapshot = [&]() {
    while (next_snapshot < snapshot_times.size() &&
           sim.t >= snapshot_times[next_snapshot] - 1e-12 * std::max(1.0, cfg.t_final)) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%04d.vtk", snapshot_id++);
      mep::write_vtk_snapshot(sim.mesh, sim.dg, sim.state, sim.phi,
                              cfg.output_dir + "/" + std::string(name));
      ++next_snapshot;
    }
  };
  maybe_snapshot();

  std::vector<mep::StepRecord> records;
  long step = 0;
  auto flush_series = [&]() { mep::write_csv_series(records, cfg.output_dir + "/series.csv"); };
  try {
    while (sim.t < cfg.t_final - 1e-13 * std::max(1.0, cfg.t_final)) {
      sim.full_diagnostics = (step % cfg.record_interval == 0);
      const mep::StepRecord rec = mep::strang_step(sim, cfg.t_final);
      records.push_back(rec);
      maybe_snapshot();
      if (verbose && step % 100 == 0)
        std::fprintf(stderr, "step %ld: t = %.6f, tau = %.3e, min rho = %.3e, iters = %d\n", step,
                     rec.t, rec.tau, rec.min_rho, rec.solver_iterations);
      ++step;
    }
  } catch (...) {
    flush_series();  // keep partial output
    throw;
  }
  flush_series();

  const double secs = std::chrono::duration<double>(clock::now() - t0).count();
  if (!records.empty()) {
    const mep::StepRecord& last = records.back();
    std::printf("%ld steps to t = %.6f in %.1f s; energy = %.12e, min rho = %.3e\n", step, last.t,
                secs, last.energy_total, last.min_rho);
  } else {
    std::printf("t_final = %g: initial snapshot only\n", cfg.t_final);
  }
  return 0;
}

int convergence_command(const std::string& levels_arg, const Overrides& ov,
                        const std::string& config_path, bool verbose) {
  std::vector<int> levels;
  {
    std::stringstream ss(levels_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) levels.push_back(std::stoi(tok));
  }
  std::vector<double> errors;
  std::vector<long> dofs;
  std::printf("%10s  %12s  %6s\n", "dofs", "delta_h", "rate");
  for (std::size_t li = 0; li < levels.size(); ++li) {
    Overrides o = ov;
    o.scenario = std::string("vortex");
    o.refinement = levels[li];
    mep::SimulationConfig cfg = resolve_config(config_path, o);
    mep::Simulation sim = mep::build_simulation(cfg);
    sim.full_diagnostics = false;
    const mep::VortexParams vp = mep::vortex_params_from(cfg);
    long nsteps = 0;
    mep::run_simulation(sim, cfg.t_final, [&](const mep::StepRecord& r) {
      ++nsteps;
      if (verbose && nsteps % 200 == 0)
        std::fprintf(stderr, "  level %d: t = %.4f, tau = %.3e\n", levels[li], r.t, r.tau);
    });
    const double err = mep::l1_error_vortex(sim.mesh, sim.dg, sim.state, sim.t, vp);
    errors.push_back(err);
    dofs.push_back(4L * sim.mesh.n_cells());
    if (li == 0)
      std::printf("%10ld  %12.4e  %6s\n", dofs.back(), err, "");
    else
      std::printf("%10ld  %12.4e  %6.2f\n", dofs.back(), err,
                  std::log2(errors[li - 1] / errors[li]));
  }
  return 0;
}

int growth_command(const Overrides& ov, const std::string& config_path, double window_a,
                   double window_b, bool verbose) {
  Overrides o = ov;
  o.scenario = std::string("diocotron");
  mep::SimulationConfig cfg = resolve_config(config_path, o);

  // fit windows from the growth-rate study; overridable via flags
  const int ell = cfg.dio_mode;
  if (window_a < 0) window_a = ell == 3 ? 0.4 : (ell == 4 ? 0.6 : 1.15);
  if (window_b < 0) window_b = ell == 3 ? 0.7 : (ell == 4 ? 0.75 : 1.35);
  if (cfg.t_final < window_b) cfg.t_final = window_b;

  mep::Simulation sim = mep::build_simulation(cfg);
  mep::ModeAmplitudeSeries series;
  series.record(0.0, sim.sampler->mode_amplitude(sim.phi, sim.sampler_mode));
  long step = 0;
  mep::run_simulation(sim, cfg.t_final, [&](const mep::StepRecord& r) {
    series.record(r.t, r.mode_amplitude);
    if (verbose && ++step % 100 == 0)
      std::fprintf(stderr, "t = %.4f, amplitude = %.4e\n", r.t, r.mode_amplitude);
  });

  const double gamma_fit = mep::fit_growth_rate(series, window_a, window_b);
  const double gamma_theory = ell == 3 ? 0.772 : (ell == 4 ? 0.911 : (ell == 5 ? 0.683 : -1.0));
  std::printf("mode %d: gamma_fit = %.4f over [%g, %g]", ell, gamma_fit, window_a, window_b);
  if (gamma_theory > 0)
    std::printf(" (theory %.3f, deviation %.4f)", gamma_theory, std::abs(gamma_fit - gamma_theory));
  std::printf("\n");

  std::filesystem::create_directories(cfg.output_dir);
  mep::detail::AtomicFile file(cfg.output_dir + "/amplitude.csv");
  file.stream() << "t,amplitude\n";
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", series.t[i], series.amplitude[i]);
    file.stream() << buf;
  }
  file.commit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structure-preserving 2D magnetic Euler-Poisson solver"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "progress output on stderr");

  std::string config_run, config_conv, config_growth;
  Overrides ov_run, ov_conv, ov_growth;

  CLI::App* run = app.add_subcommand("run", "run one scenario and write series + snapshots");
  add_override_flags(run, ov_run, config_run);

  CLI::App* conv = app.add_subcommand("convergence", "vortex convergence study (dofs/error/rate)");
  std::string levels = "0,1,2,3";
  conv->add_option("--levels", levels, "comma-separated refinement levels");
  add_override_flags(conv, ov_conv, config_conv);

  CLI::App* growth = app.add_subcommand("diocotron-growth", "diocotron mode growth-rate fit");
  double wa = -1, wb = -1;
  growth->add_option("--window-start", wa, "fit window start");
  growth->add_option("--window-end", wb, "fit window end");
  add_override_flags(growth, ov_growth, config_growth);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(resolve_config(config_run, ov_run), verbose);
    if (conv->parsed()) return convergence_command(levels, ov_conv, config_conv, verbose);
    if (growth->parsed()) return growth_command(ov_growth, config_growth, wa, wb, verbose);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
