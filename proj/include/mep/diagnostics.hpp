#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "mep/discretization.hpp"
#include "mep/eos.hpp"
#include "mep/hyperbolic.hpp"
#include "mep/scenarios.hpp"
#include "mep/solver.hpp"

namespace mep {

struct EnergyLedger {
  double hyperbolic = 0.0;  // Σ m E (covolume) or Σ m η (barotropic)
  double field = 0.0;       // (2α)⁻¹ ‖∇φ‖²
  double kinetic = 0.0;     // Σ ½ m |m|²/ρ
  double total() const { return hyperbolic + field; }
};

inline EnergyLedger total_energy(const DgLayout& dg, const CgLayout& cg, const HypState& s,
                                 const CgField& phi, double alpha, const Eos& eos) {
  EnergyLedger led;
  double hyp = 0.0, kin = 0.0, ch = 0.0, ck = 0.0;
  const IsothermalEos iso = eos.as_isothermal();
  for (int i = 0; i < dg.n_nodes; ++i) {
    const double m2 = s.mx[i] * s.mx[i] + s.my[i] * s.my[i];
    const double e = s.has_energy
                         ? s.en[i]
                         : iso.entropy({s.rho[i], {s.mx[i], s.my[i]}, 0.0});
    double y = dg.mass[i] * e - ch;
    double t = hyp + y;
    ch = (t - hyp) - y;
    hyp = t;
    y = 0.5 * dg.mass[i] * m2 / s.rho[i] - ck;
    t = kin + y;
    ck = (t - kin) - y;
    kin = t;
  }
  led.hyperbolic = hyp;
  led.kinetic = kin;
  led.field = cg_stiffness_energy(cg, phi) / (2.0 * alpha);
  return led;
}

/// Surrogate operator norm of the Gauß law residual
/// R[ω] = α⟨charge, ω⟩_h − (∇φ, ∇ω): max over free nodal test functions of
/// |R[ω_i]| / ‖∇ω_i‖.
inline double gauss_residual_norm(const DgLayout& dg, const CgLayout& cg, const DgField& charge,
                                  const CgField& phi, double alpha,
                                  const CgField& stiffness_diag, unsigned nthreads = 1) {
  CgField q, sphi;
  dg_collocated_charge(dg, cg, charge, q);
  cg_stiffness_apply(cg, phi, sphi, nthreads);
  double worst = 0.0;
  for (int v = 0; v < cg.n_nodes; ++v) {
    if (cg.dirichlet[v]) continue;
    const double r = alpha * q[v] - sphi[v];
    worst = std::max(worst, std::abs(r) / std::sqrt(stiffness_diag[v]));
  }
  return worst;
}

/// L¹ error against the exact vortex solution, δ_h = ‖ρ−ρ_h‖ + ‖m−m_h‖ +
/// ‖E−E_h‖, by cellwise 3×3 Gauss quadrature.
inline double l1_error_vortex(const Mesh& mesh, const DgLayout& dg, const HypState& s, double t,
                              const VortexParams& p) {
  constexpr std::array<double, 3> x3 = {0.1127016653792583, 0.5, 0.8872983346207417};
  constexpr std::array<double, 3> w3 = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double err_rho = 0.0, err_m = 0.0, err_e = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const CellMapping cm = mesh.mapping(k);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double xi = x3[i], eta = x3[j];
        const auto sh = CellMapping::shape(xi, eta);
        double rho = 0, mx = 0, my = 0, en = 0;
        for (int c = 0; c < 4; ++c) {
          const int node = dg.node(k, c);
          rho += sh[c] * s.rho[node];
          mx += sh[c] * s.mx[node];
          my += sh[c] * s.my[node];
          en += sh[c] * s.en[node];
        }
        const ConservedState ex = vortex_exact(cm.map(xi, eta), t, p);
        const double w = w3[i] * w3[j] * cm.jacobian(xi, eta).det();
        err_rho += w * std::abs(rho - ex.rho);
        err_m += w * norm(Vec2{mx - ex.m.x, my - ex.m.y});
        err_e += w * std::abs(en - ex.E);
      }
  }
  return err_rho + err_m + err_e;
}

/// Point sampler on the circle r = r₀: locates the containing cells once
/// (bounding-box prefilter + Newton inversion of the bilinear maps) and then
/// evaluates CG fields per call.
class CircleSampler {
 public:
  CircleSampler(const Mesh& mesh, const CgLayout& cg, double r0, int n_samples = 256)
      : n_(n_samples) {
    vids_.resize(n_);
    shapes_.resize(n_);
    std::vector<std::array<double, 4>> bbox(mesh.n_cells());
    for (int k = 0; k < mesh.n_cells(); ++k) {
      double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
      for (int c = 0; c < 4; ++c) {
        const Vec2 v = mesh.vertices[mesh.cells[k][c]];
        xlo = std::min(xlo, v.x);
        xhi = std::max(xhi, v.x);
        ylo = std::min(ylo, v.y);
        yhi = std::max(yhi, v.y);
      }
      bbox[k] = {xlo, xhi, ylo, yhi};
    }
    for (int s = 0; s < n_; ++s) {
      const double th = 2.0 * M_PI * s / n_;
      const Vec2 x{r0 * std::cos(th), r0 * std::sin(th)};
      bool found = false;
      for (int k = 0; k < mesh.n_cells() && !found; ++k) {
        const auto& bb = bbox[k];
        const double pad = 1e-9 * (1.0 + std::abs(r0));
        if (x.x < bb[0] - pad || x.x > bb[1] + pad || x.y < bb[2] - pad || x.y > bb[3] + pad)
          continue;
        Vec2 ref;
        if (!mesh.mapping(k).invert(x, ref, 1e-12)) continue;
        if (ref.x >= -1e-9 && ref.x <= 1.0 + 1e-9 && ref.y >= -1e-9 && ref.y <= 1.0 + 1e-9) {
          vids_[s] = cg.cells[k];
          shapes_[s] = CellMapping::shape(ref.x, ref.y);
          found = true;
        }
      }
      if (!found) throw std::runtime_error("CircleSampler: point location failed");
    }
  }

  int n_samples() const { return n_; }

  double evaluate(const CgField& phi, int s) const {
    const auto& vid = vids_[s];
    const auto& sh = shapes_[s];
    return sh[0] * phi[vid[0]] + sh[1] * phi[vid[1]] + sh[2] * phi[vid[2]] + sh[3] * phi[vid[3]];
  }

  /// |ĉ_ℓ| of the sampled trace, scaled by 2/N so a pure cos(ℓθ) gives 1.
  double mode_amplitude(const CgField& phi, int ell) const {
    std::vector<double> samples(n_);
    for (int s = 0; s < n_; ++s) samples[s] = evaluate(phi, s);
    return mode_amplitude_of_samples(samples, ell);
  }

  /// DFT modulus of equispaced angular samples, same 2/N convention.
  static double mode_amplitude_of_samples(const std::vector<double>& samples, int ell) {
    const int n = static_cast<int>(samples.size());
    std::complex<double> acc{0.0, 0.0};
    for (int s = 0; s < n; ++s)
      acc += samples[s] * std::polar(1.0, -ell * 2.0 * M_PI * s / n);
    return 2.0 * std::abs(acc) / n;
  }

 private:
  int n_;
  std::vector<std::array<int, 4>> vids_;
  std::vector<std::array<double, 4>> shapes_;
};

struct ModeAmplitudeSeries {
  std::vector<double> t;
  std::vector<double> amplitude;  // normalized by the first recorded value

  void record(double time, double raw) {
    if (t.empty()) norm_ = raw != 0.0 ? raw : 1.0;
    t.push_back(time);
    amplitude.push_back(raw / norm_);
  }

 private:
  double norm_ = 1.0;
};

/// Least-squares slope of ln(amplitude) over the window [ta, tb].
inline double fit_growth_rate(const ModeAmplitudeSeries& series, double ta, double tb) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    if (series.t[i] < ta || series.t[i] > tb) continue;
    const double x = series.t[i];
    const double y = std::log(series.amplitude[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_growth_rate: empty fit window");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mep
