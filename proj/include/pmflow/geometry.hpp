#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "pmflow/errors.hpp"
#include "pmflow/gas.hpp"
#include "pmflow/roots.hpp"
#include "pmflow/shock_polar.hpp"
#include "pmflow/uniform_state.hpp"

namespace pmflow {

// ---------------------------------------------------------------------
// Frame change between the original self-similar plane and the wedge frame
// ---------------------------------------------------------------------

// Rotate by -theta_w and translate so the wedge boundary becomes the
// xi-axis: p' = R(theta_w) p - (u_O cos(theta_w), 0).
inline Point rotate_to_wedge_frame(Point p, double theta_w,
                                   double u_O_original) {
  const double c = std::cos(theta_w);
  const double s = std::sin(theta_w);
  return {c * p.xi + s * p.eta - u_O_original * c,
          -s * p.xi + c * p.eta};
}

inline Point rotate_from_wedge_frame(Point p, double theta_w,
                                     double u_O_original) {
  const double c = std::cos(theta_w);
  const double s = std::sin(theta_w);
  const double xi = p.xi + u_O_original * c;
  return {c * xi - s * p.eta, s * xi + c * p.eta};
}

// Unsteady potential from the pseudo-potential: Phi(x, t) = t (phi + r^2/2)
// at x = t (xi, eta).
inline double reconstruct_time_potential(double phi_value, double xi,
                                         double eta, double t) {
  if (!(t > 0.0)) {
    throw std::domain_error("reconstruct_time_potential: t must be > 0");
  }
  return t * (phi_value + 0.5 * (xi * xi + eta * eta));
}

// ---------------------------------------------------------------------
// Normal shock S_N = {eta = eta_bar}
// ---------------------------------------------------------------------

struct NormalShock {
  double rho_N = 0.0;
  double eta_bar = 0.0;
  double c_N = 0.0;
  double xi_N = 0.0;  // xi-coordinate of P2 on the sonic circle
};

// Solves i(rho) = v_inf^2/2 + v_inf^2/(rho - 1) for the unique rho_N > 1;
// eta_bar = v_inf/(rho_N - 1).
inline NormalShock normal_state(const GasSetup& gas) {
  const double v = gas.v_inf;
  if (!(v > 0.0)) throw std::domain_error("normal_state: v_inf must be > 0");
  auto defect = [&](double rho) {
    return enthalpy(rho, gas.gamma) - 0.5 * v * v - v * v / (rho - 1.0);
  };
  auto bracket = widen_bracket(defect, 1.0 + 1e-12, 1e-12);
  if (!bracket) {
    throw NumericalError("normal_state: root of the eta_bar system not "
                         "bracketed for v_inf=" + std::to_string(v));
  }
  NormalShock ns;
  ns.rho_N = bisect(defect, bracket->first, bracket->second, 1e-14);
  ns.eta_bar = v / (ns.rho_N - 1.0);
  ns.c_N = sound_speed(ns.rho_N, gas.gamma);
  if (!(ns.eta_bar > 0.0 && ns.eta_bar < ns.c_N)) {
    throw InvariantViolation("normal_state: 0 < eta_bar < c_N violated: "
                             "eta_bar=" + std::to_string(ns.eta_bar) +
                             ", c_N=" + std::to_string(ns.c_N));
  }
  ns.xi_N = std::sqrt(ns.c_N * ns.c_N - ns.eta_bar * ns.eta_bar);
  return ns;
}

inline UniformState normal_uniform_state(const GasSetup& gas,
                                         const NormalShock& ns) {
  return make_uniform_state(0.0, 0.0, -gas.v_inf * ns.eta_bar, gas);
}

// ---------------------------------------------------------------------
// Oblique shock S_O = {eta = tan(beta) (xi - xi_tilde)}
// ---------------------------------------------------------------------

struct ObliqueShock {
  UniformState state;  // v == 0 in the wedge frame
  double xi_tilde = std::numeric_limits<double>::quiet_NaN();
};

// The u-coefficient is forced: the line {phi_inf = phi_O} has slope
// -u_O/v_inf, which must equal tan(beta). The density and the intercept
// then solve pseudo-Bernoulli plus the Rankine-Hugoniot flux balance, a
// scalar root-find in rho_O.
inline ObliqueShock oblique_state(const GasSetup& gas, double beta) {
  if (!(beta >= 0.0 && beta < 1.5707963267948966)) {
    throw std::domain_error("oblique_state: beta must be in [0, pi/2)");
  }
  if (beta == 0.0) {
    // Degenerate case: the oblique shock coincides with the normal shock.
    const NormalShock ns = normal_state(gas);
    return ObliqueShock{normal_uniform_state(gas, ns),
                        std::numeric_limits<double>::quiet_NaN()};
  }
  const double v = gas.v_inf;
  const double tb = std::tan(beta);
  const double u_O = -v * tb;

  // xi_tilde from Bernoulli (k_O = -u_O xi_tilde), then the flux balance
  // rho_O (xi_tilde - u_O) = xi_tilde - v_inf/tan(beta) along S_O.
  auto xi_tilde_of = [&](double rho) {
    return (enthalpy(rho, gas.gamma) + 0.5 * u_O * u_O - gas.B) / u_O;
  };
  auto defect = [&](double rho) {
    const double xt = xi_tilde_of(rho);
    return (rho - 1.0) * xt - rho * u_O + v / tb;
  };
  auto bracket = widen_bracket(defect, 1.0 + 1e-12, 1e-12);
  if (!bracket) {
    throw NumericalError("oblique_state: no attached oblique shock "
                         "(compressive root not bracketed) at v_inf=" +
                         std::to_string(v) + ", beta=" + std::to_string(beta));
  }
  const double rho_O = bisect(defect, bracket->first, bracket->second, 1e-14);
  const double xt = xi_tilde_of(rho_O);
  ObliqueShock ob;
  ob.state = make_uniform_state(u_O, 0.0, -u_O * xt, gas);
  ob.xi_tilde = xt;
  // make_uniform_state re-derives rho from Bernoulli; keep it consistent
  // with the flux root to full precision.
  ob.state.rho = rho_O;
  ob.state.c = sound_speed(rho_O, gas.gamma);
  if (!(rho_O > 1.0)) {
    throw InvariantViolation("oblique_state: rho_O <= 1");
  }
  return ob;
}

// Intersection P1 of S_O with the sonic circle of the oblique state, taking
// the smaller-xi root. Returns nullopt if there is no intersection with
// eta > 0.
inline std::optional<Point> p1_point(const ObliqueShock& ob, double beta) {
  const double tb = std::tan(beta);
  const double u_O = ob.state.u;
  const double c_O = ob.state.c;
  const double xt = ob.xi_tilde;
  // (xi - u_O)^2 + tan^2(beta) (xi - xi_tilde)^2 = c_O^2
  const double A = 1.0 + tb * tb;
  const double B = -2.0 * u_O - 2.0 * tb * tb * xt;
  const double C = u_O * u_O + tb * tb * xt * xt - c_O * c_O;
  const double disc = B * B - 4.0 * A * C;
  if (!(disc > 0.0)) return std::nullopt;
  const double xi = (-B - std::sqrt(disc)) / (2.0 * A);
  const double eta = tb * (xi - xt);
  if (!(eta > 0.0)) return std::nullopt;
  return Point{xi, eta};
}

// Supremum of beta with eta_O(beta) > 0. Uses the monotone decrease of
// eta_O in beta; returns pi/2 when P1 stays above the wedge on all of
// (0, pi/2).
inline double beta_c(const GasSetup& gas) {
  constexpr double half_pi = 1.5707963267948966;
  auto p1_above_wedge = [&](double beta) {
    try {
      return p1_point(oblique_state(gas, beta), beta).has_value();
    } catch (const NumericalError&) {
      return false;
    }
  };
  if (p1_above_wedge(half_pi - 1e-9)) return half_pi;
  const double lo = 1e-9;
  if (!p1_above_wedge(lo)) {
    throw InvariantViolation("beta_c: eta_O(0+) <= 0, geometry is broken");
  }
  return bisect_predicate(p1_above_wedge, lo, half_pi - 1e-9, 1e-12);
}

// ---------------------------------------------------------------------
// Parameter correspondence P1 <-> P2 (weak-branch wedge flow)
// ---------------------------------------------------------------------

// (u_inf, theta_w) -> (v_inf, beta): v_inf = u_inf sin(theta_w), beta is
// the angle between the weak oblique shock and the wedge.
inline std::pair<double, double> map_p1_to_p2(double u_inf, double theta_w,
                                              double gamma) {
  if (!(u_inf > 1.0)) {
    throw std::domain_error("map_p1_to_p2: u_inf must be > 1");
  }
  if (!(theta_w > 0.0) || !(theta_w < theta_sonic(u_inf, gamma))) {
    throw std::domain_error("map_p1_to_p2: theta_w outside (0, theta_sonic)");
  }
  const double v_inf = u_inf * std::sin(theta_w);
  return {v_inf, sigma_weak(u_inf, gamma, theta_w) - theta_w};
}

namespace detail {

// Smallest admissible wedge angle probe: keeps u_inf = v/sin(theta_w)
// within the representable Mach range (theta_w -> 0 is the u_inf = infinity
// limit and is never a root).
inline double theta_w_floor(double v_inf, double gamma) {
  return std::asin(std::min(1.0, v_inf / max_mach(gamma)));
}

// Largest admissible wedge angle at fixed v_inf: where theta_w meets
// theta_sonic(v_inf / sin(theta_w)).
inline double theta_w_crit(double v_inf, double gamma) {
  constexpr double half_pi = 1.5707963267948966;
  // Keep the probe Mach number u = v/sin(theta) at least 1 + 1e-6: closer
  // to the sonic incoming state the polar collapses below roundoff.
  const double s_ub = std::min(1.0, v_inf / (1.0 + 1e-6));
  const double theta_ub = std::min(std::asin(s_ub), half_pi - 1e-11);
  const double theta_lb = std::max(1e-9, theta_w_floor(v_inf, gamma));
  auto defect = [&](double tw) {
    return tw - theta_sonic(v_inf / std::sin(tw), gamma);
  };
  return bisect(defect, theta_lb, theta_ub, 1e-13);
}

inline double beta_of_theta_w(double v_inf, double theta_w, double gamma) {
  const double u_inf = v_inf / std::sin(theta_w);
  return sigma_weak(u_inf, gamma, theta_w) - theta_w;
}

}  // namespace detail

// (v_inf, beta) -> (u_inf, theta_w): inverts map_p1_to_p2 by a root-find
// in theta_w with u_inf = v_inf / sin(theta_w) substituted.
inline std::pair<double, double> map_p2_to_p1(double v_inf, double beta,
                                              double gamma) {
  if (!(v_inf > 0.0) || !(beta > 0.0)) {
    throw std::domain_error("map_p2_to_p1: need v_inf > 0 and beta > 0");
  }
  const double tw_hi = detail::theta_w_crit(v_inf, gamma) - 1e-12;
  auto defect = [&](double tw) {
    return detail::beta_of_theta_w(v_inf, tw, gamma) - beta;
  };
  // beta(theta_w) -> 0 as theta_w -> 0+ and reaches beta_c at tw_hi; scan
  // for a bracket to be robust against non-monotone stretches.
  double lo = std::max(tw_hi * 1e-8,
                       detail::theta_w_floor(v_inf, gamma) * 1.0000001);
  double f_lo = defect(lo);
  double hi = tw_hi;
  double f_hi = defect(hi);
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    bool found = false;
    constexpr int kScan = 64;
    double prev = lo;
    double f_prev = f_lo;
    for (int k = 1; k <= kScan; ++k) {
      const double tw = lo + (tw_hi - lo) * k / kScan;
      const double f = defect(tw);
      if (std::signbit(f_prev) != std::signbit(f) || f == 0.0) {
        found = true;
        hi = tw;
        f_hi = f;
        lo = prev;
        f_lo = f_prev;
        break;
      }
      prev = tw;
      f_prev = f;
    }
    if (!found) {
      throw std::domain_error("map_p2_to_p1: no theta_w in (0, theta_sonic) "
                              "matches beta=" + std::to_string(beta) +
                              " at v_inf=" + std::to_string(v_inf));
    }
  }
  const double tw = bisect(defect, lo, hi, 1e-13);
  return {v_inf / std::sin(tw), tw};
}

// ---------------------------------------------------------------------
// Full geometric scaffold for a parameter pair (v_inf, beta)
// ---------------------------------------------------------------------

struct Geometry {
  GasSetup gas;
  double beta = 0.0;
  UniformState state_inf, state_O, state_N;
  double xi_tilde = std::numeric_limits<double>::quiet_NaN();  // NaN at beta=0
  double eta_bar = 0.0;
  double xi_N = 0.0;
  Point P1, P2;
  double wedge_lo = 0.0;  // u_O - c_O
  double wedge_hi = 0.0;  // c_N

  double xi_O() const { return P1.xi; }
  double eta_O() const { return P1.eta; }
  bool has_oblique() const { return beta > 0.0; }
};

namespace detail {

inline void check_residual(double value, double scale, double tol,
                           const std::string& what) {
  if (!(std::abs(value) <= tol * std::max(1.0, std::abs(scale)))) {
    throw InvariantViolation("geometry invariant: " + what + " residual " +
                             std::to_string(value));
  }
}

}  // namespace detail

// Validates every structural identity of a Geometry; throws
// InvariantViolation on failure.
inline void validate(const Geometry& g, double tol = 1e-9) {
  const GasSetup& gas = g.gas;
  // Uniform-state Bernoulli consistency.
  for (const UniformState* st : {&g.state_inf, &g.state_O, &g.state_N}) {
    detail::check_residual(enthalpy(st->rho, gas.gamma) +
                               st->bernoulli_combo() - gas.B,
                           gas.B, tol, "pseudo-Bernoulli");
    detail::check_residual(st->c - sound_speed(st->rho, gas.gamma), 1.0, tol,
                           "sound speed");
  }
  // Normal shock identities.
  detail::check_residual(g.eta_bar - gas.v_inf / (g.state_N.rho - 1.0),
                         g.eta_bar, tol, "eta_bar");
  detail::check_residual(enthalpy(g.state_N.rho, gas.gamma) -
                             0.5 * gas.v_inf * gas.v_inf -
                             g.eta_bar * gas.v_inf,
                         1.0, tol, "normal-shock enthalpy");
  if (!(g.eta_bar > 0.0 && g.eta_bar < g.state_N.c)) {
    throw InvariantViolation("geometry invariant: 0 < eta_bar < c_N");
  }
  // P2 on the normal sonic circle.
  detail::check_residual(std::hypot(g.P2.xi, g.P2.eta) - g.state_N.c, 1.0,
                         tol, "P2 on sonic circle");
  // P1 on the oblique sonic circle.
  detail::check_residual(std::hypot(g.P1.xi - g.state_O.u, g.P1.eta) -
                             g.state_O.c,
                         1.0, tol, "P1 on sonic circle");
  // RH flux balance along S_N: rho_N Dphi_N . nu = Dphi_inf . nu, nu=(0,1).
  detail::check_residual(g.state_N.rho * g.eta_bar - g.eta_bar - gas.v_inf,
                         gas.v_inf, tol, "RH flux on S_N");
  if (g.has_oblique()) {
    if (!(g.eta_O() > 0.0)) {
      throw InvariantViolation("geometry invariant: eta_O > 0");
    }
    const double tb = std::tan(g.beta);
    // P1 on the shock line.
    detail::check_residual(g.P1.eta - tb * (g.P1.xi - g.xi_tilde), 1.0, tol,
                           "P1 on S_O");
    // S_O coincides with {phi_inf = phi_O} (three-point residual). At
    // small beta the intercept sits far out, so scale by the potential
    // magnitude there.
    for (double xi : {g.xi_tilde, 0.5 * (g.xi_tilde + g.P1.xi), g.P1.xi}) {
      const double eta = tb * (xi - g.xi_tilde);
      detail::check_residual(g.state_inf.phi(xi, eta) -
                                 g.state_O.phi(xi, eta),
                             g.state_inf.phi(xi, eta), tol,
                             "S_O is {phi_inf = phi_O}");
    }
    // RH flux balance along S_O, nu = (-sin b, cos b).
    const double sb = std::sin(g.beta);
    const double cb = std::cos(g.beta);
    for (double xi : {g.xi_tilde, g.P1.xi}) {
      const double eta = tb * (xi - g.xi_tilde);
      const auto gi = g.state_inf.grad(xi, eta);
      const auto go = g.state_O.grad(xi, eta);
      const double flux_inf = -gi[0] * sb + gi[1] * cb;
      const double flux_O = g.state_O.rho * (-go[0] * sb + go[1] * cb);
      detail::check_residual(flux_O - flux_inf, gas.v_inf, tol,
                             "RH flux on S_O");
    }
  }
}

// Assembles and validates the full geometry. beta = 0 is admitted as the
// degenerate normal-shock configuration: S_O is absent and P1 = (-xi_N,
// eta_bar), the junction where the left sonic arc meets {eta = eta_bar}.
inline Geometry build_geometry(double v_inf, double beta, double gamma) {
  const GasSetup gas = GasSetup::wedge_frame(gamma, v_inf);
  Geometry g;
  g.gas = gas;
  g.beta = beta;
  g.state_inf = incoming_state(gas);
  const NormalShock ns = normal_state(gas);
  g.state_N = normal_uniform_state(gas, ns);
  g.eta_bar = ns.eta_bar;
  g.xi_N = ns.xi_N;
  g.P2 = {ns.xi_N, ns.eta_bar};
  if (beta == 0.0) {
    g.state_O = g.state_N;
    g.xi_tilde = std::numeric_limits<double>::quiet_NaN();
    g.P1 = {-ns.xi_N, ns.eta_bar};
  } else {
    const ObliqueShock ob = oblique_state(gas, beta);
    auto p1 = p1_point(ob, beta);
    if (!p1) {
      throw std::domain_error("build_geometry: (v_inf, beta) outside the "
                              "admissible set: P1 does not exist at beta=" +
                              std::to_string(beta));
    }
    g.state_O = ob.state;
    g.xi_tilde = ob.xi_tilde;
    g.P1 = *p1;
  }
  g.wedge_lo = g.state_O.u - g.state_O.c;
  g.wedge_hi = g.state_N.c;
  validate(g);
  return g;
}

}  // namespace pmflow
