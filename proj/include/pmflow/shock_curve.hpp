#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pmflow/errors.hpp"

namespace pmflow {

// The free boundary eta = f_shock(xi) as a monotone graph with pinned
// endpoints, interpolated by a shape-preserving (Fritsch-Butland) cubic.
struct ShockCurve {
  std::vector<double> knots;   // strictly increasing, spanning [xi_O, xi_N]
  std::vector<double> values;  // f at the knots
  std::vector<double> slopes;  // Hermite slopes, rebuilt from the knots

  void rebuild() {
    const size_t n = knots.size();
    if (n < 2 || values.size() != n) {
      throw InvariantViolation("ShockCurve: need >= 2 knots");
    }
    for (size_t k = 0; k + 1 < n; ++k) {
      if (!(knots[k + 1] > knots[k])) {
        throw InvariantViolation("ShockCurve: knots not strictly increasing");
      }
    }
    slopes.assign(n, 0.0);
    std::vector<double> h(n - 1), d(n - 1);
    for (size_t k = 0; k + 1 < n; ++k) {
      h[k] = knots[k + 1] - knots[k];
      d[k] = (values[k + 1] - values[k]) / h[k];
    }
    if (n == 2) {
      slopes[0] = slopes[1] = d[0];
      return;
    }
    for (size_t k = 1; k + 1 < n; ++k) {
      if (d[k - 1] * d[k] <= 0.0) {
        slopes[k] = 0.0;
      } else {
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        slopes[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
      }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (m * d0 <= 0.0) return 0.0;
      if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
      return m;
    };
    slopes[0] = end_slope(h[0], h[1], d[0], d[1]);
    slopes[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }

  size_t interval(double xi) const {
    const size_t n = knots.size();
    if (xi <= knots.front()) return 0;
    if (xi >= knots[n - 2]) return n - 2;
    return static_cast<size_t>(
               std::upper_bound(knots.begin(), knots.end(), xi) -
               knots.begin()) - 1;
  }

  double eval(double xi) const {
    const size_t k = interval(xi);
    const double h = knots[k + 1] - knots[k];
    const double s = (xi - knots[k]) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * values[k] + h * h10 * slopes[k] + h01 * values[k + 1] +
           h * h11 * slopes[k + 1];
  }

  double deriv(double xi) const {
    const size_t k = interval(xi);
    const double h = knots[k + 1] - knots[k];
    const double s = (xi - knots[k]) / h;
    const double g00 = 6.0 * s * (s - 1.0) / h;
    const double g10 = (1.0 - s) * (1.0 - 3.0 * s);
    const double g01 = -g00;
    const double g11 = s * (3.0 * s - 2.0);
    return g00 * values[k] + g10 * slopes[k] + g01 * values[k + 1] +
           g11 * slopes[k + 1];
  }

  double min_knot_slope() const {
    double m = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < knots.size(); ++k) {
      m = std::min(m, deriv(knots[k]));
    }
    return m;
  }
};

// Straight-line shock through the two pinned endpoints.
inline ShockCurve make_linear_shock(double xi_O, double eta_O, double xi_N,
                                    double eta_bar, int n_knots) {
  if (n_knots < 2) throw std::domain_error("make_linear_shock: n_knots < 2");
  ShockCurve sc;
  sc.knots.resize(n_knots);
  sc.values.resize(n_knots);
  for (int k = 0; k < n_knots; ++k) {
    const double s = static_cast<double>(k) / (n_knots - 1);
    sc.knots[k] = xi_O + s * (xi_N - xi_O);
    sc.values[k] = eta_O + s * (eta_bar - eta_O);
  }
  sc.rebuild();
  return sc;
}

// Restores nondecreasing knot values in place (forward/backward clamp with
// fixed endpoints); used when a Newton step transiently overshoots.
inline bool monotonize_values(std::vector<double>& v) {
  bool touched = false;
  for (size_t k = 1; k + 1 < v.size(); ++k) {
    if (v[k] < v[k - 1]) {
      v[k] = v[k - 1];
      touched = true;
    }
  }
  for (size_t k = v.size() - 1; k-- > 1;) {
    if (v[k] > v[k + 1]) {
      v[k] = v[k + 1];
      touched = true;
    }
  }
  return touched;
}

}  // namespace pmflow
