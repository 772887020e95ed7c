#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "mep/geometry.hpp"

namespace mep {

/// Conserved hyperbolic state at one collocation point. E is meaningful only
/// for the covolume (full Euler) closure.
struct ConservedState {
  double rho = 0.0;
  Vec2 m{};
  double E = 0.0;
};

inline double specific_internal_energy(const ConservedState& u) {
  if (!(u.rho > 0.0)) throw std::domain_error("specific_internal_energy: rho <= 0");
  return u.E / u.rho - norm_sq(u.m) / (2.0 * u.rho * u.rho);
}

/// Covolume (Noble-Abel) closure p(1−bρ) = (γ−1)eρ; b = 0 is the ideal gas.
struct CovolumeEos {
  double gamma = 1.4;
  double b = 0.0;
  static constexpr int ncomp = 4;
  static constexpr bool has_energy = true;

  bool admissible(double rho, double e) const {
    return rho > 0.0 && e > 0.0 && b * rho < 1.0;
  }
  bool admissible(const ConservedState& u) const {
    return u.rho > 0.0 && b * u.rho < 1.0 && specific_internal_energy(u) > 0.0;
  }
  double pressure(double rho, double e) const { return (gamma - 1.0) * e * rho / (1.0 - b * rho); }
  double pressure(const ConservedState& u) const {
    return pressure(u.rho, specific_internal_energy(u));
  }
  double sound_speed(double rho, double p) const {
    return std::sqrt(gamma * p / (rho * (1.0 - b * rho)));
  }
  double sound_speed(const ConservedState& u) const {
    return sound_speed(u.rho, pressure(u));
  }
  /// −ρ s up to constants; the hyperbolic tally only needs monotonicity.
  double entropy(const ConservedState& u) const {
    const double e = specific_internal_energy(u);
    return -u.rho * (std::log(e) / (gamma - 1.0) + std::log(1.0 / u.rho - b));
  }
};

/// Isothermal barotropic closure p = θρ, c = √θ, e(ρ) = θ ln ρ.
struct IsothermalEos {
  double theta = 0.0;
  static constexpr int ncomp = 3;
  static constexpr bool has_energy = false;

  bool admissible(const ConservedState& u) const { return u.rho > 0.0; }
  double pressure(double rho) const { return theta * rho; }
  double pressure(const ConservedState& u) const { return pressure(u.rho); }
  double sound_speed(double) const { return std::sqrt(theta); }
  double sound_speed(const ConservedState&) const { return std::sqrt(theta); }
  double internal_energy(double rho) const { return theta * std::log(rho); }
  /// Mathematical entropy η = |m|²/(2ρ) + ρ e(ρ).
  double entropy(const ConservedState& u) const {
    if (!(u.rho > 0.0)) throw std::domain_error("entropy: rho <= 0");
    return norm_sq(u.m) / (2.0 * u.rho) + u.rho * internal_energy(u.rho);
  }
  /// Entropy flux q = (η + p) v.
  Vec2 entropy_flux(const ConservedState& u) const {
    return ((entropy(u) + pressure(u)) / u.rho) * u.m;
  }
};

inline std::pair<double, Vec2> entropy_pair_barotropic(const ConservedState& u,
                                                       const IsothermalEos& eos) {
  return {eos.entropy(u), eos.entropy_flux(u)};
}

/// Runtime-tagged equation of state for configuration plumbing. Hot kernels
/// dispatch once to the typed variants above.
struct Eos {
  enum class Kind { covolume, isothermal } kind = Kind::covolume;
  double gamma = 1.4;
  double b = 0.0;
  double theta = 0.0;

  static Eos covolume(double gamma, double b = 0.0) {
    if (!(gamma > 1.0 && gamma <= 5.0 / 3.0))
      throw std::invalid_argument("covolume EOS requires 1 < gamma <= 5/3");
    if (b < 0.0) throw std::invalid_argument("covolume EOS requires b >= 0");
    return Eos{Kind::covolume, gamma, b, 0.0};
  }
  static Eos isothermal(double theta) {
    if (theta < 0.0) throw std::invalid_argument("isothermal EOS requires theta >= 0");
    return Eos{Kind::isothermal, 0.0, 0.0, theta};
  }
  CovolumeEos as_covolume() const { return {gamma, b}; }
  IsothermalEos as_isothermal() const { return {theta}; }
  int ncomp() const { return kind == Kind::covolume ? 4 : 3; }
};

inline double pressure(const ConservedState& u, const Eos& eos) {
  if (eos.kind == Eos::Kind::covolume) {
    if (!eos.as_covolume().admissible(u)) throw std::domain_error("pressure: inadmissible state");
    return eos.as_covolume().pressure(u);
  }
  if (!(u.rho > 0.0)) throw std::domain_error("pressure: rho <= 0");
  return eos.as_isothermal().pressure(u);
}

inline double sound_speed(const ConservedState& u, const Eos& eos) {
  if (eos.kind == Eos::Kind::covolume) {
    if (!eos.as_covolume().admissible(u))
      throw std::domain_error("sound_speed: inadmissible state");
    return eos.as_covolume().sound_speed(u);
  }
  if (!(u.rho > 0.0)) throw std::domain_error("sound_speed: rho <= 0");
  return eos.as_isothermal().sound_speed(u);
}

}  // namespace mep
