#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mep/diagnostics.hpp"
#include "mep/discretization.hpp"
#include "mep/eos.hpp"
#include "mep/hyperbolic.hpp"
#include "mep/mesh.hpp"
#include "mep/solver.hpp"
#include "mep/source_update.hpp"

namespace mep {

enum class RestartMode { none, full, relaxation };
enum class HypIntegrator { forward_euler, ssp_rk3 };

/// Per-step diagnostic record. `t` is the end-of-step time at which the
/// diagnostics are measured.
struct StepRecord {
  double t = 0.0;
  double tau = 0.0;
  double energy_total = 0.0;
  double energy_hyperbolic = 0.0;
  double energy_kinetic = 0.0;
  double energy_field = 0.0;
  double gauss_residual = 0.0;
  int solver_iterations = 0;
  double min_rho = 0.0;
  double min_e = 0.0;
  double mass = 0.0;
  double mass_flux = 0.0;    // Σ τ_sub · Φ_ρ over the step's hyperbolic parts
  double mass_defect = 0.0;  // mass − mass_prev + mass_flux
  double mode_amplitude = std::numeric_limits<double>::quiet_NaN();
  bool relaxation_clamped = false;
};

/// Time-dependent neutralizing background (charge and current); subtracted
/// inside the Gauß law and the source-update transport term.
struct Background {
  bool active = false;
  std::function<double(Vec2, double)> charge;
  std::function<Vec2(Vec2, double)> current;
};

/// Everything one run needs: the discrete structures, the evolving fields,
/// and the numerical configuration.
struct Simulation {
  Mesh mesh;
  DgLayout dg;
  CgLayout cg;
  CouplingGraph graph;
  Preconditioner precond = Preconditioner::identity();

  Eos eos;
  BoundaryData bc;
  Background background;

  HypState state;
  CgField phi;
  double t = 0.0;

  double theta = 0.5;
  double cfl = 0.25;
  double alpha = 1.0;
  double omega = 0.0;
  double solver_tol = 1e-12;
  int solver_max_iter = 1000;
  double tau_max = std::numeric_limits<double>::infinity();
  RestartMode restart = RestartMode::none;
  HypIntegrator integrator = HypIntegrator::ssp_rk3;
  unsigned nthreads = 1;
  bool full_diagnostics = true;

  std::optional<CircleSampler> sampler;
  int sampler_mode = 0;

  // scratch
  HyperbolicWorkspace hws;
  SourceWorkspace sws;
  HypState scratch;
  CgField stiff_diag;
  int relaxation_clamp_events = 0;

  void prepare(Mesh m, bool dirichlet_on_boundary = true) {
    mesh = std::move(m);
    dg = build_dg_layout(mesh);
    cg = build_cg_layout(mesh, dirichlet_on_boundary);
    graph = assemble_coupling_graph(mesh, dg);
    precond = Preconditioner::stiffness_cholesky(cg);
    stiff_diag = stiffness_diagonal(cg);
    phi.assign(cg.n_nodes, 0.0);
  }

  /// charge = ρ − ρ_b(t) when a background is active, else ρ.
  DgField effective_charge(double time) const {
    DgField q = state.rho;
    if (background.active)
      for (int i = 0; i < dg.n_nodes; ++i) q[i] -= background.charge(dg.coords[i], time);
    return q;
  }
};

/// Full Gauß law restart: replace φ by the solution of
/// (∇φ̃,∇ω) = α⟨ρ − ρ_b, ω⟩_h.
inline SolveStats gauss_restart_full(Simulation& sim) {
  const DgField charge = sim.effective_charge(sim.t);
  return solve_gauss_law(sim.dg, sim.cg, charge, sim.alpha, sim.precond, sim.phi, sim.solver_tol,
                         nullptr, sim.nthreads);
}

/// Restart with relaxation: rescale momenta so total (kinetic + field)
/// energy does not increase. Returns true when the scaling was clamped.
inline bool gauss_restart_relaxation(Simulation& sim) {
  CgField phi_tilde = sim.phi;
  const DgField charge = sim.effective_charge(sim.t);
  solve_gauss_law(sim.dg, sim.cg, charge, sim.alpha, sim.precond, phi_tilde, sim.solver_tol,
                  nullptr, sim.nthreads);

  const double f_new = cg_stiffness_energy(sim.cg, phi_tilde) / (2.0 * sim.alpha);
  const double f_old = cg_stiffness_energy(sim.cg, sim.phi) / (2.0 * sim.alpha);
  const double delta_e = f_new - f_old;
  sim.phi = phi_tilde;
  if (delta_e <= 0.0) return false;

  double kin = 0.0;
  for (int i = 0; i < sim.dg.n_nodes; ++i)
    kin += 0.5 * sim.dg.mass[i] *
           (sim.state.mx[i] * sim.state.mx[i] + sim.state.my[i] * sim.state.my[i]) /
           sim.state.rho[i];
  bool clamped = false;
  double factor = 0.0;
  if (kin > 0.0 && delta_e < kin) {
    factor = std::sqrt(1.0 - delta_e / kin);
  } else {
    clamped = true;
    ++sim.relaxation_clamp_events;
  }
  for (int i = 0; i < sim.dg.n_nodes; ++i) {
    double eps = 0.0;
    if (sim.state.has_energy)
      eps = sim.state.en[i] -
            0.5 * (sim.state.mx[i] * sim.state.mx[i] + sim.state.my[i] * sim.state.my[i]) /
                sim.state.rho[i];
    sim.state.mx[i] *= factor;
    sim.state.my[i] *= factor;
    if (sim.state.has_energy)
      sim.state.en[i] = eps + 0.5 *
                                  (sim.state.mx[i] * sim.state.mx[i] +
                                   sim.state.my[i] * sim.state.my[i]) /
                                  sim.state.rho[i];
  }
  return clamped;
}

namespace detail {

/// Advances the hyperbolic subsystem by exactly `span`, sub-stepping against
/// the CFL limit. If `viscosities_fresh`, the workspace already matches the
/// current state (forward Euler only).
template <class Law>
StepTally advance_hyperbolic(Simulation& sim, const Law& law, double t0, double span,
                             bool viscosities_fresh) {
  StepTally total;
  double done = 0.0;
  bool fresh = viscosities_fresh;
  while (done < span * (1.0 - 1e-14)) {
    const double remaining = span - done;
    double tau_sub = remaining;
    if (sim.integrator == HypIntegrator::forward_euler) {
      if (!fresh)
        compute_graph_viscosities(law, sim.dg, sim.graph, sim.bc, t0 + done, sim.state, sim.hws,
                                  sim.nthreads);
      const double limit = cfl_timestep(sim.hws, sim.dg, sim.cfl, sim.tau_max);
      tau_sub = remaining <= limit * (1.0 + 1e-12) ? remaining : limit;
      const StepTally t =
          forward_euler_step(law, sim.dg, sim.graph, tau_sub, sim.state, sim.scratch, sim.hws,
                             sim.nthreads);
      total.merge(t, tau_sub);
      std::swap(sim.state, sim.scratch);
      fresh = false;
    } else {
      compute_graph_viscosities(law, sim.dg, sim.graph, sim.bc, t0 + done, sim.state, sim.hws,
                                sim.nthreads);
      const double limit = cfl_timestep(sim.hws, sim.dg, sim.cfl, sim.tau_max);
      tau_sub = remaining <= limit * (1.0 + 1e-12) ? remaining : limit;
      const StepTally t = ssp_rk3_step(law, sim.dg, sim.graph, sim.bc, t0 + done, tau_sub,
                                       sim.state, sim.scratch, sim.hws, sim.nthreads);
      total.merge(t, tau_sub);
      std::swap(sim.state, sim.scratch);
      fresh = false;
    }
    done += tau_sub;
    if (!(tau_sub > 0.0) || !std::isfinite(tau_sub))
      throw std::runtime_error("hyperbolic advance: non-positive time step (set tau_max?)");
  }
  return total;
}

template <class Law>
StepRecord strang_step_impl(Simulation& sim, const Law& law, double t_final) {
  const double mass_before = mass_tally(sim.dg, sim.state)[0];

  // τ_n = 2 × CFL limit of the initial state; the first hyperbolic solve is
  // the τ_n/2 half-step.
  compute_graph_viscosities(law, sim.dg, sim.graph, sim.bc, sim.t, sim.state, sim.hws,
                            sim.nthreads);
  double tau_half = cfl_timestep(sim.hws, sim.dg, sim.cfl, 0.5 * sim.tau_max);
  if (!std::isfinite(tau_half))
    throw std::runtime_error("strang_step: unbounded time step (set tau_max)");
  double tau_n = 2.0 * tau_half;
  if (sim.t + tau_n > t_final) {
    tau_n = t_final - sim.t;
    tau_half = 0.5 * tau_n;
  }

  StepRecord rec;
  rec.tau = tau_n;

  // (1) hyperbolic half step; φ is frozen here
  StepTally hyp = advance_hyperbolic(sim, law, sim.t, tau_half,
                                     sim.integrator == HypIntegrator::forward_euler);

  // (2) implicit source update over the full τ_n
  ThetaParams prm;
  prm.theta = sim.theta;
  prm.tau = tau_n;
  prm.alpha = sim.alpha;
  prm.omega = sim.omega;
  prm.tol = sim.solver_tol;
  prm.max_iter = sim.solver_max_iter;

  SolveStats stats;
  if (sim.background.active) {
    const double tb = sim.t + sim.theta * tau_n;
    DgVecField jb(sim.dg.n_nodes);
    for (int i = 0; i < sim.dg.n_nodes; ++i) {
      const Vec2 j = sim.background.current(sim.dg.coords[i], tb);
      jb.x[i] = j.x;
      jb.y[i] = j.y;
    }
    stats = source_update_conserved(sim.dg, sim.cg, sim.state, sim.phi, prm, sim.precond, sim.sws,
                                    &jb, sim.nthreads);
  } else {
    stats = source_update_conserved(sim.dg, sim.cg, sim.state, sim.phi, prm, sim.precond, sim.sws,
                                    nullptr, sim.nthreads);
  }
  rec.solver_iterations = stats.iterations;

  // (3) second hyperbolic half step, re-split against its own CFL limit
  const StepTally hyp2 = advance_hyperbolic(sim, law, sim.t + tau_half, tau_half, false);
  hyp.merge(hyp2, 1.0);
  // merge() above already weighted sub-steps by their τ; boundary_flux now
  // carries Σ τ_sub Φ directly.

  sim.t += tau_n;

  // (4) Gauß law restart
  switch (sim.restart) {
    case RestartMode::none:
      break;
    case RestartMode::full:
      gauss_restart_full(sim);
      break;
    case RestartMode::relaxation:
      rec.relaxation_clamped = gauss_restart_relaxation(sim);
      break;
  }

  rec.t = sim.t;
  rec.min_rho = hyp.min_rho;
  rec.min_e = hyp.min_e;
  rec.mass = mass_tally(sim.dg, sim.state)[0];
  rec.mass_flux = hyp.boundary_flux[0];
  rec.mass_defect = rec.mass - mass_before + rec.mass_flux;

  if (sim.full_diagnostics) {
    const EnergyLedger led = total_energy(sim.dg, sim.cg, sim.state, sim.phi, sim.alpha, sim.eos);
    rec.energy_hyperbolic = led.hyperbolic;
    rec.energy_kinetic = led.kinetic;
    rec.energy_field = led.field;
    rec.energy_total = led.total();
    rec.gauss_residual = gauss_residual_norm(sim.dg, sim.cg, sim.effective_charge(sim.t), sim.phi,
                                             sim.alpha, sim.stiff_diag, sim.nthreads);
  }
  if (sim.sampler)
    rec.mode_amplitude = sim.sampler->mode_amplitude(sim.phi, sim.sampler_mode);
  return rec;
}

}  // namespace detail

/// One Strang step: hyperbolic τ_n/2, implicit source τ_n, hyperbolic τ_n/2
/// (sub-split if the CFL limit shrank), then the configured restart.
inline StepRecord strang_step(Simulation& sim,
                              double t_final = std::numeric_limits<double>::infinity()) {
  if (sim.eos.kind == Eos::Kind::covolume)
    return detail::strang_step_impl(sim, sim.eos.as_covolume(), t_final);
  return detail::strang_step_impl(sim, sim.eos.as_isothermal(), t_final);
}

/// Marches to t_final, invoking `on_record` after every step. Step records
/// for a fixed configuration and thread count are bitwise reproducible.
template <class RecordFn>
void run_simulation(Simulation& sim, double t_final, RecordFn&& on_record) {
  const double eps = 1e-13 * std::max(1.0, std::abs(t_final));
  while (sim.t < t_final - eps) {
    const StepRecord rec = strang_step(sim, t_final);
    if (!(rec.tau > 0.0)) throw std::runtime_error("run_simulation: stalled time step");
    on_record(rec);
  }
}

}  // namespace mep
