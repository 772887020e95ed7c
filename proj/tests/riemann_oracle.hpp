#pragma once

// Test-only oracle: exact Riemann star pressure and maximum wavespeed for the
// covolume equation of state (Toro ch. 4 pressure functions with covolume
// factors). Not used by any production code path.

#include <algorithm>
#include <cmath>

namespace oracle {

struct Side {
  double rho, v, p;  // v = velocity component along the probe direction
};

inline double sound_speed(double gamma, double b, const Side& s) {
  return std::sqrt(gamma * s.p / (s.rho * (1.0 - b * s.rho)));
}

// f_K(p): velocity jump across the wave connecting to state K.
inline double pressure_fn(double gamma, double b, const Side& s, double p) {
  if (p > s.p) {  // shock
    const double A = 2.0 * (1.0 - b * s.rho) / ((gamma + 1.0) * s.rho);
    const double B = (gamma - 1.0) / (gamma + 1.0) * s.p;
    return (p - s.p) * std::sqrt(A / (p + B));
  }
  const double c = sound_speed(gamma, b, s);
  return 2.0 * c * (1.0 - b * s.rho) / (gamma - 1.0) *
         (std::pow(p / s.p, (gamma - 1.0) / (2.0 * gamma)) - 1.0);
}

/// Star pressure by bisection (the pressure function is monotone).
inline double star_pressure(double gamma, double b, const Side& L, const Side& R) {
  const double dv = R.v - L.v;
  auto f = [&](double p) { return pressure_fn(gamma, b, L, p) + pressure_fn(gamma, b, R, p) + dv; };
  if (f(0.0) >= 0.0) return 0.0;  // vacuum-adjacent: both waves are full rarefactions
  double lo = 0.0, hi = std::max(L.p, R.p);
  while (f(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Exact maximum wavespeed of the 1D Riemann fan: the two-rarefaction λ
/// expressions evaluated at the exact star pressure (their form is exact for
/// both shock and rarefaction extreme waves, covolume included).
inline double max_wavespeed(double gamma, double b, const Side& L, const Side& R) {
  const double ps = star_pressure(gamma, b, L, R);
  const double cL = sound_speed(gamma, b, L);
  const double cR = sound_speed(gamma, b, R);
  const double qL = std::sqrt(1.0 + (gamma + 1.0) / (2.0 * gamma) * std::max(0.0, (ps - L.p) / L.p));
  const double qR = std::sqrt(1.0 + (gamma + 1.0) / (2.0 * gamma) * std::max(0.0, (ps - R.p) / R.p));
  const double lam1 = L.v - cL * qL;
  const double lam3 = R.v + cR * qR;
  return std::max(std::max(0.0, -lam1), std::max(0.0, lam3));
}

}  // namespace oracle
