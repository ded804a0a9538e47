#pragma once

#include <array>
#include <cmath>

#include "pmflow/gas.hpp"

namespace pmflow {

struct Point {
  double xi = 0.0;
  double eta = 0.0;
};

// Uniform pseudo-state: phi = -(xi^2+eta^2)/2 + u xi + v eta + k with
// constant density. Its sonic circle is the circle of radius c centered at
// (u, v), since |Dphi| = |(u,v) - (xi,eta)|.
struct UniformState {
  double u = 0.0;
  double v = 0.0;
  double k = 0.0;
  double rho = 1.0;
  double c = 1.0;

  double phi(double xi, double eta) const {
    return -0.5 * (xi * xi + eta * eta) + u * xi + v * eta + k;
  }
  std::array<double, 2> grad(double xi, double eta) const {
    return {u - xi, v - eta};
  }
  // |Dphi|^2/2 + phi, constant for quadratic states.
  double bernoulli_combo() const { return 0.5 * (u * u + v * v) + k; }
};

// Derives rho and c from the pseudo-Bernoulli law
// i(rho) + (u^2+v^2)/2 + k = B.
inline UniformState make_uniform_state(double u, double v, double k,
                                       const GasSetup& gas) {
  UniformState st;
  st.u = u;
  st.v = v;
  st.k = k;
  st.rho = density_from_enthalpy(gas.B - 0.5 * (u * u + v * v) - k,
                                 gas.gamma);
  st.c = sound_speed(st.rho, gas.gamma);
  return st;
}

// Incoming state in the wedge frame: phi_inf = -(xi^2+eta^2)/2 - v_inf eta,
// density 1, sound speed 1.
inline UniformState incoming_state(const GasSetup& gas) {
  return make_uniform_state(0.0, -gas.v_inf, 0.0, gas);
}

}  // namespace pmflow
