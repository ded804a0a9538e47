#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "pmflow/errors.hpp"
#include "pmflow/geometry.hpp"
#include "pmflow/roots.hpp"

namespace pmflow {

// Slopes of the tangent lines from an external point (a, b) to the circle
// of radius 1 centered at (0, -v); ascending order. Throws when the point
// is inside the circle.
inline std::vector<double> tangent_slopes_to_incoming_sonic(double a,
                                                            double b,
                                                            double v) {
  const double h = b + v;  // height above the circle center
  const double d2 = a * a + h * h;
  if (d2 < 1.0) {
    throw InvariantViolation("tangent_slopes: point inside the incoming "
                             "sonic circle");
  }
  // (a^2 - 1) m^2 - 2 a h m + (h^2 - 1) = 0
  const double A = a * a - 1.0;
  const double B = -2.0 * a * h;
  const double C = h * h - 1.0;
  std::vector<double> out;
  if (std::abs(A) < 1e-14) {
    if (std::abs(B) > 0.0) out.push_back(-C / B);
    return out;
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return out;  // touching case handled by d2 >= 1
  const double sq = std::sqrt(std::max(0.0, disc));
  double m1 = (-B - sq) / (2.0 * A);
  double m2 = (-B + sq) / (2.0 * A);
  if (m1 > m2) std::swap(m1, m2);
  out.push_back(m1);
  out.push_back(m2);
  return out;
}

// F(beta) = tan(theta_O) - tan(theta_inf): slope of the segment P1P2 minus
// the slope of the positive-slope tangent from P2 to B_1(0, -v_inf) (the
// smaller when two qualify). Returns +infinity when P1P2 is vertical.
inline double elling_liu_F(const Geometry& g) {
  const double dx = g.P2.xi - g.P1.xi;
  const double dy = g.P2.eta - g.P1.eta;
  if (std::abs(dx) < 1e-300) return std::numeric_limits<double>::infinity();
  const double tan_O = dy / dx;
  const auto slopes =
      tangent_slopes_to_incoming_sonic(g.P2.xi, g.P2.eta, g.gas.v_inf);
  double tan_inf = std::numeric_limits<double>::quiet_NaN();
  bool found = false;
  for (double m : slopes) {
    if (m > 0.0 && (!found || m < tan_inf)) {
      tan_inf = m;
      found = true;
    }
  }
  if (!found) {
    throw InvariantViolation("elling_liu_F: no positive-slope tangent from "
                             "P2 to the incoming sonic circle");
  }
  return tan_O - tan_inf;
}

inline double elling_liu_F(const GasSetup& gas, double beta) {
  return elling_liu_F(build_geometry(gas.v_inf, beta, gas.gamma));
}

// Exact segment-versus-open-disk intersection for P1P2 against
// B_1(0, -v_inf).
inline bool segment_hits_incoming_sonic(const Geometry& g) {
  const double cx = 0.0, cy = -g.gas.v_inf;
  const double ax = g.P1.xi - cx, ay = g.P1.eta - cy;
  const double bx = g.P2.xi - cx, by = g.P2.eta - cy;
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(-(ax * dx + ay * dy) / len2, 0.0, 1.0);
  }
  const double px = ax + t * dx, py = ay + t * dy;
  return px * px + py * py < 1.0;
}

inline bool segment_hits_incoming_sonic(const GasSetup& gas, double beta) {
  return segment_hits_incoming_sonic(
      build_geometry(gas.v_inf, beta, gas.gamma));
}

// Unique sign-change location of F on (0, beta_c), when it exists. More
// than one sign change contradicts the expected structure and is reported
// as an error rather than masked.
inline std::optional<double> beta_hat(const GasSetup& gas,
                                      int scan_points = 256) {
  const double bc = beta_c(gas);
  auto F = [&](double b) {
    return elling_liu_F(build_geometry(gas.v_inf, b, gas.gamma));
  };
  const double lo = bc * 1e-6;
  const double hi = bc * (1.0 - 1e-9);
  double prev_b = lo;
  double prev_f = F(lo);
  int changes = 0;
  double root = -1.0;
  for (int k = 1; k <= scan_points; ++k) {
    const double b = lo + (hi - lo) * k / scan_points;
    const double f = F(b);
    if ((prev_f <= 0.0 && f > 0.0) || (prev_f > 0.0 && f <= 0.0)) {
      ++changes;
      if (changes == 1) {
        root = bisect([&](double x) { return F(x); }, prev_b, b, 1e-10);
      }
    }
    prev_b = b;
    prev_f = f;
  }
  if (changes == 0) return std::nullopt;
  if (changes > 1) {
    throw NumericalError("beta_hat: F has " + std::to_string(changes) +
                         " sign changes on (0, beta_c); expected one");
  }
  return root;
}

// sup{v_inf : max over beta of F(v_inf, beta) > 0}, by bisection on the
// predicate over a beta grid.
inline double v_star(double gamma, double tol = 1e-4, int beta_grid = 128) {
  auto has_positive_F = [&](double v) {
    const GasSetup gas = GasSetup::wedge_frame(gamma, v);
    const double bc = beta_c(gas);
    for (int k = 1; k < beta_grid; ++k) {
      const double b = bc * k / beta_grid;
      try {
        if (elling_liu_F(build_geometry(v, b, gamma)) > 0.0) return true;
      } catch (const NumericalError&) {
        continue;
      }
    }
    return false;
  };
  double lo = 1e-3, hi = 1.0;
  if (!has_positive_F(lo)) {
    throw NumericalError("v_star: predicate false even at v_inf=1e-3");
  }
  while (has_positive_F(hi)) hi *= 1.5;  // defensive; v* <= 1 expected
  return bisect_predicate(has_positive_F, lo, hi, tol);
}

}  // namespace pmflow
