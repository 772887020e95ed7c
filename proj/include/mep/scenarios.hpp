#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mep/discretization.hpp"
#include "mep/eos.hpp"
#include "mep/hyperbolic.hpp"
#include "mep/mesh.hpp"
#include "mep/source_update.hpp"

namespace mep {

// ---------------------------------------------------------------------------
// Isentropic vortex (covolume/ideal EOS, Ω = 0). With a neutralizing
// background charge the potential stays constant, so the exact solution is
// the plain translating Euler vortex.

struct VortexParams {
  Vec2 box_lo{-5, -5};
  Vec2 box_hi{5, 5};
  Vec2 speed{1, 1};       // M
  double size = 5.0;      // β
  Vec2 center{-1, -1};    // position at t = 0
  double gamma = 1.4;
  double alpha = 1.0;
};

inline ConservedState vortex_exact(Vec2 x, double t, const VortexParams& p) {
  const Vec2 xb = x - p.center - t * p.speed;
  const double r2 = norm_sq(xb);
  const double g = p.gamma;
  const double T =
      1.0 - (g - 1.0) * p.size * p.size / (8.0 * g * M_PI * M_PI) * std::exp(1.0 - r2);
  const double rho = std::pow(T, 1.0 / (g - 1.0));
  const Vec2 v = p.speed + p.size / (2.0 * M_PI) * std::exp(0.5 * (1.0 - r2)) * Vec2{-xb.y, xb.x};
  const double pres = std::pow(rho, g);
  return {rho, rho * v, pres / (g - 1.0) + 0.5 * rho * norm_sq(v)};
}

// ---------------------------------------------------------------------------
// Diocotron annulus on the disk (isothermal barotropic EOS, strong uniform
// magnetic field). α = β²/ρ_max and ω_c = β² give the scale separation
// ω_c ~ β², ω_p ~ β, ω_d ~ 1.

struct DiocotronParams {
  double r0 = 6.0;
  double r1 = 8.0;
  double radius = 16.0;  // R
  double rho_min = 1e-6;
  double rho_max = 1.0;
  double beta_scaling = 1e6;  // β
  double delta = 0.1;
  int mode = 3;  // ℓ
  double theta_T = 1e-4;

  // The 2π carries Davidson's normalization ω_p² = 4πρα into the Gauss law
  // −Δφ = αρ used here; the quoted growth rates γ₃ ≈ 0.772, γ₄ ≈ 0.911,
  // γ₅ ≈ 0.683 are exact for this coupling (edge-wave dispersion relation).
  double alpha() const { return 2.0 * M_PI * beta_scaling * beta_scaling / rho_max; }
  double omega_c() const { return beta_scaling * beta_scaling; }

  void validate() const {
    if (!(0 < r0 && r0 < r1 && r1 < radius))
      throw std::invalid_argument("diocotron: need 0 < r0 < r1 < R");
    if (!(delta > 0.0 && delta < 0.5))
      throw std::invalid_argument("diocotron: need 0 < delta < 1/2");
  }
};

inline double diocotron_initial_density(Vec2 x, const DiocotronParams& p) {
  const double r = norm(x);
  if (r <= p.r0 || r >= p.r1) return p.rho_min;
  return p.rho_max * (1.0 - p.delta + p.delta * std::sin(p.mode * std::atan2(x.y, x.x)));
}

/// ρ⁰ by nodal interpolation, φ⁰ from the discrete Gauß law (homogeneous
/// Dirichlet on the rim), v⁰ the cell-local drift velocity.
inline void diocotron_initialize(const DgLayout& dg, const CgLayout& cg,
                                 const DiocotronParams& p, const Preconditioner& precond,
                                 HypState& state, CgField& phi, double solver_tol = 1e-12,
                                 unsigned nthreads = 1) {
  p.validate();
  const int n = dg.n_nodes;
  state.resize(n, false);
  for (int i = 0; i < n; ++i) state.rho[i] = diocotron_initial_density(dg.coords[i], p);

  phi.assign(cg.n_nodes, 0.0);
  solve_gauss_law(dg, cg, state.rho, p.alpha(), precond, phi, solver_tol, nullptr, nthreads);

  DgVecField g;
  cg_gradient_at_dg_nodes(dg, cg, phi, g, nthreads);
  const double omega = p.omega_c();
  for (int i = 0; i < n; ++i) {
    // v_dr = −(∇φ × Ω)/|Ω|² = (−∂_yφ, ∂_xφ)/Ω
    const Vec2 v{-g.y[i] / omega, g.x[i] / omega};
    state.mx[i] = state.rho[i] * v.x;
    state.my[i] = state.rho[i] * v.y;
  }
}

// ---------------------------------------------------------------------------

/// The three time scales of the model: cyclotron, plasma, diocotron.
struct Timescales {
  double omega_c;
  double omega_p;
  double omega_d;
};

inline Timescales timescale_report(double alpha, double rho_ref, double omega) {
  Timescales ts;
  ts.omega_c = std::abs(omega);
  ts.omega_p = std::sqrt(rho_ref * alpha);
  ts.omega_d = ts.omega_c > 0.0 ? rho_ref * alpha / ts.omega_c
                                : std::numeric_limits<double>::infinity();
  return ts;
}

}  // namespace mep
