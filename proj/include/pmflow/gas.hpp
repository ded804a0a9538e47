#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "pmflow/errors.hpp"

namespace pmflow {

// Scaled polytropic gas in the wedge frame: rho_inf = 1, c(rho_inf) = 1,
// i(rho) = (rho^{gamma-1} - 1)/(gamma - 1), c^2 = rho^{gamma-1}.
// gamma == 1 selects the isothermal closures i = ln rho, c == 1.
// The Bernoulli constant is B = v_inf^2/2 and B0 = (gamma-1)B + 1.
struct GasSetup {
  double gamma = 1.4;
  double v_inf = 0.5;
  double B = 0.125;

  double B0() const { return (gamma - 1.0) * B + 1.0; }

  static GasSetup wedge_frame(double gamma, double v_inf) {
    if (!(gamma >= 1.0)) {
      throw std::domain_error("GasSetup: gamma must be >= 1, got " +
                              std::to_string(gamma));
    }
    if (!(v_inf > 0.0)) {
      throw std::domain_error("GasSetup: v_inf must be > 0, got " +
                              std::to_string(v_inf));
    }
    return GasSetup{gamma, v_inf, 0.5 * v_inf * v_inf};
  }
};

inline bool isothermal(double gamma) { return gamma == 1.0; }

// i(rho): specific enthalpy of the scaled gas.
inline double enthalpy(double rho, double gamma) {
  if (!(rho > 0.0)) {
    throw std::domain_error("enthalpy: rho must be > 0, got " +
                            std::to_string(rho));
  }
  if (isothermal(gamma)) return std::log(rho);
  return (std::pow(rho, gamma - 1.0) - 1.0) / (gamma - 1.0);
}

// Inverse of i: density at a given enthalpy.
inline double density_from_enthalpy(double i_val, double gamma) {
  if (isothermal(gamma)) return std::exp(i_val);
  const double arg = 1.0 + (gamma - 1.0) * i_val;
  if (!(arg > 0.0)) {
    throw CavitationError(arg, 0.0, i_val);
  }
  return std::pow(arg, 1.0 / (gamma - 1.0));
}

inline double sound_speed(double rho, double gamma) {
  if (!(rho > 0.0)) {
    throw std::domain_error("sound_speed: rho must be > 0, got " +
                            std::to_string(rho));
  }
  if (isothermal(gamma)) return 1.0;
  return std::pow(rho, 0.5 * (gamma - 1.0));
}

// rho(|Dphi|^2, phi) = (B0 - (gamma-1)(|Dphi|^2/2 + phi))^{1/(gamma-1)};
// exp(B - |Dphi|^2/2 - phi) for gamma = 1.
inline double density_from_pseudo_bernoulli(double speed_sq, double phi_val,
                                            const GasSetup& gas) {
  if (isothermal(gas.gamma)) {
    return std::exp(gas.B - 0.5 * speed_sq - phi_val);
  }
  const double arg =
      gas.B0() - (gas.gamma - 1.0) * (0.5 * speed_sq + phi_val);
  if (!(arg > 0.0)) {
    throw CavitationError(arg, speed_sq, phi_val);
  }
  return std::pow(arg, 1.0 / (gas.gamma - 1.0));
}

// c^2(|Dphi|^2, phi) = B0 - (gamma-1)(|Dphi|^2/2 + phi). Equals 1 for the
// isothermal gas.
inline double sound_speed_sq_from_state(double speed_sq, double phi_val,
                                        const GasSetup& gas) {
  if (isothermal(gas.gamma)) return 1.0;
  const double arg =
      gas.B0() - (gas.gamma - 1.0) * (0.5 * speed_sq + phi_val);
  if (!(arg > 0.0)) {
    throw CavitationError(arg, speed_sq, phi_val);
  }
  return arg;
}

// Steady-flow critical speed q*: |q| = c under i(rho) + q^2/2 = M_inf^2/2
// with rho_inf = 1. Admits m_inf = 1 (the formula limit q* = 1).
inline double critical_speed(double m_inf, double gamma) {
  if (!(m_inf >= 1.0)) {
    throw std::domain_error("critical_speed: m_inf must be >= 1, got " +
                            std::to_string(m_inf));
  }
  if (isothermal(gamma)) return 1.0;
  return std::sqrt((2.0 + (gamma - 1.0) * m_inf * m_inf) / (gamma + 1.0));
}

}  // namespace pmflow
