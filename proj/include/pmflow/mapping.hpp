#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "pmflow/errors.hpp"
#include "pmflow/geometry.hpp"
#include "pmflow/shock_curve.hpp"

namespace pmflow {

// Maps Omega onto the rectangle (-1,1) x (0,1): s affine in xi over the
// wedge segment, t = eta / eta_top(xi) along vertical fibers. The top
// boundary is the left sonic arc for xi in [wedge_lo, xi_O], the shock
// graph on [xi_O, xi_N], and the right sonic arc on [xi_N, wedge_hi].
struct DomainMapping {
  double xi_lo = 0.0, xi_hi = 0.0;
  double xi_O = 0.0, xi_N = 0.0;
  double u_O = 0.0, c_O = 0.0, c_N = 0.0;
  ShockCurve shock;

  double length() const { return xi_hi - xi_lo; }
  double xi_of_s(double s) const {
    return xi_lo + 0.5 * (s + 1.0) * length();
  }
  double s_of_xi(double xi) const {
    return 2.0 * (xi - xi_lo) / length() - 1.0;
  }

  double top(double xi) const {
    if (xi <= xi_O) {
      const double d = xi - u_O;
      return std::sqrt(std::max(0.0, c_O * c_O - d * d));
    }
    if (xi >= xi_N) {
      return std::sqrt(std::max(0.0, c_N * c_N - xi * xi));
    }
    return shock.eval(xi);
  }

  double top_prime(double xi) const {
    if (xi <= xi_O) {
      const double d = xi - u_O;
      const double h = std::sqrt(std::max(1e-300, c_O * c_O - d * d));
      return -d / h;
    }
    if (xi >= xi_N) {
      const double h = std::sqrt(std::max(1e-300, c_N * c_N - xi * xi));
      return -xi / h;
    }
    return shock.deriv(xi);
  }

  Point to_physical(double s, double t) const {
    const double xi = xi_of_s(s);
    return {xi, t * top(xi)};
  }

  std::array<double, 2> to_reference(double xi, double eta) const {
    const double T = top(xi);
    if (!(T > 0.0)) {
      throw InvariantViolation("DomainMapping: eta_top <= 0 at xi=" +
                               std::to_string(xi));
    }
    return {s_of_xi(xi), eta / T};
  }
};

inline DomainMapping make_mapping(const Geometry& g, const ShockCurve& sc) {
  if (std::abs(sc.knots.front() - g.xi_O()) > 1e-12 ||
      std::abs(sc.knots.back() - g.xi_N) > 1e-12 ||
      std::abs(sc.values.front() - g.eta_O()) > 1e-10 ||
      std::abs(sc.values.back() - g.eta_bar) > 1e-10) {
    throw InvariantViolation("make_mapping: shock endpoints not pinned to "
                             "P1, P2");
  }
  DomainMapping m;
  m.xi_lo = g.wedge_lo;
  m.xi_hi = g.wedge_hi;
  m.xi_O = g.xi_O();
  m.xi_N = g.xi_N;
  m.u_O = g.state_O.u;
  m.c_O = g.state_O.c;
  m.c_N = g.state_N.c;
  m.shock = sc;
  return m;
}

}  // namespace pmflow
