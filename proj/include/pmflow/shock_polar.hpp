#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmflow/errors.hpp"
#include "pmflow/gas.hpp"
#include "pmflow/roots.hpp"

namespace pmflow {

// Downstream state behind an oblique shock in the original (unrotated)
// steady frame. Upstream is (m_inf, 0) at rho = 1; sigma is the shock angle
// measured from the upstream flow direction.
struct PolarState {
  double u = 0.0;
  double v = 0.0;
  double rho = 1.0;
  double sigma = 0.0;
  double deflection = 0.0;
};

inline double mach_angle(double m_inf) { return std::asin(1.0 / m_inf); }

// Largest Mach number whose downstream densities stay representable in
// doubles (the isothermal normal-shock density grows like exp(M^2/2)).
inline double max_mach(double gamma) {
  if (isothermal(gamma)) return 30.0;
  const double e = 250.0 * (gamma - 1.0);
  if (e > 16.0) return 1e8;
  return std::min(1e8, std::sqrt(2.0 * (std::pow(10.0, e) - 1.0) /
                                 (gamma - 1.0)));
}

// Unique compressive downstream state for shock angle sigma in (mu, pi/2].
// The tangential velocity m_inf cos(sigma) is continuous; the normal
// velocity solves rho(q^2) w = m_inf sin(sigma) on the subsonic-normal
// branch w < m_inf sin(sigma).
inline PolarState polar_state(double m_inf, double gamma, double sigma) {
  if (!(m_inf > 1.0)) {
    throw std::domain_error("polar_state: m_inf must be > 1");
  }
  const double mu = mach_angle(m_inf);
  constexpr double half_pi = 1.5707963267948966;
  if (!(sigma > mu && sigma <= half_pi + 1e-15)) {
    throw std::domain_error("polar_state: sigma=" + std::to_string(sigma) +
                            " outside (" + std::to_string(mu) + ", pi/2]");
  }
  sigma = std::min(sigma, half_pi);
  const double tang = (sigma >= half_pi) ? 0.0 : m_inf * std::cos(sigma);
  const double w_inf = m_inf * std::sin(sigma);

  // Downstream density as a function of the normal velocity w. Since the
  // tangential component is continuous, m^2 - q^2 = (w_inf - w)(w_inf + w);
  // this form avoids the catastrophic cancellation of m^2 - t^2 - w^2 at
  // large Mach numbers.
  auto rho_of_w = [&](double w) {
    const double dq2 = (w_inf - w) * (w_inf + w);
    if (isothermal(gamma)) return std::exp(0.5 * dq2);
    const double arg = 1.0 + 0.5 * (gamma - 1.0) * dq2;
    if (!(arg > 0.0)) throw CavitationError(arg, w * w + tang * tang, 0.0);
    return std::pow(arg, 1.0 / (gamma - 1.0));
  };
  // Mass flux rho w is unimodal in w, peaking where the normal component
  // is sonic; the compressive root lies left of the peak.
  auto mass_flux_defect = [&](double w) { return rho_of_w(w) * w - w_inf; };
  double w_peak;
  if (isothermal(gamma)) {
    w_peak = 1.0;
  } else {
    w_peak = std::sqrt((2.0 + (gamma - 1.0) * w_inf * w_inf) / (gamma + 1.0));
  }
  double w;
  if (mass_flux_defect(w_peak) <= 0.0) {
    // Vanishing-strength shock at the Mach angle; the roots have merged.
    w = w_peak;
  } else {
    // rho is decreasing in w... rho_of_w(0) is the stagnation-normal
    // density, so w_lo = w_inf/rho_of_w(0) is a guaranteed lower bracket
    // even when that density is astronomically large.
    const double w_lo = 0.999999 * w_inf / rho_of_w(0.0);
    w = bisect(mass_flux_defect, std::min(w_lo, w_peak), w_peak, 1e-13);
  }

  PolarState st;
  st.sigma = sigma;
  st.rho = rho_of_w(w);
  st.u = tang * std::cos(sigma) + w * std::sin(sigma);
  st.v = tang * std::sin(sigma) - w * std::cos(sigma);
  st.deflection = (tang > 0.0) ? sigma - std::atan2(w, tang) : 0.0;
  return st;
}

// n samples of the polar at sigma uniform in (mu, pi/2], Mach-angle limit
// first, normal shock last.
inline std::vector<PolarState> polar_curve(double m_inf, double gamma, int n) {
  if (n < 2) throw std::domain_error("polar_curve: n must be >= 2");
  const double mu = mach_angle(m_inf);
  constexpr double half_pi = 1.5707963267948966;
  std::vector<PolarState> out;
  out.reserve(static_cast<size_t>(n));
  // Endpoints are the Mach-angle limit point and the normal shock; the
  // interval is open at mu, so the first sample sits just inside.
  for (int k = 0; k < n; ++k) {
    const double frac = std::max(1e-9, static_cast<double>(k) / (n - 1));
    out.push_back(polar_state(m_inf, gamma, mu + frac * (half_pi - mu)));
  }
  return out;
}

// Shock angle at the deflection maximum (detachment).
inline double sigma_detach(double m_inf, double gamma) {
  const double mu = mach_angle(m_inf);
  constexpr double half_pi = 1.5707963267948966;
  return golden_max(
      [&](double s) { return polar_state(m_inf, gamma, s).deflection; },
      mu + 1e-12, half_pi, 1e-12);
}

inline double theta_detach(double m_inf, double gamma) {
  return polar_state(m_inf, gamma, sigma_detach(m_inf, gamma)).deflection;
}

// Shock angle on the weak branch at which the downstream speed equals the
// critical speed q*.
inline double sigma_sonic(double m_inf, double gamma) {
  const double mu = mach_angle(m_inf);
  constexpr double half_pi = 1.5707963267948966;
  const double q_star = critical_speed(m_inf, gamma);
  auto speed_defect = [&](double s) {
    const PolarState st = polar_state(m_inf, gamma, s);
    return std::hypot(st.u, st.v) - q_star;
  };
  return bisect(speed_defect, mu + 1e-12, half_pi, 1e-13);
}

inline double theta_sonic(double m_inf, double gamma) {
  return polar_state(m_inf, gamma, sigma_sonic(m_inf, gamma)).deflection;
}

struct WedgeIntersection {
  PolarState weak;
  PolarState strong;
};

// Weak-branch shock angle for a given deflection: the smaller root of
// deflection(sigma) = theta_w, on (mu, sigma_detach]. Well-conditioned at
// any Mach number (the strong branch is not, in the hypersonic limit).
inline double sigma_weak(double m_inf, double gamma, double theta_w) {
  if (!(theta_w > 0.0)) {
    throw std::domain_error("sigma_weak: theta_w must be > 0");
  }
  const double s_det = sigma_detach(m_inf, gamma);
  const double t_det = polar_state(m_inf, gamma, s_det).deflection;
  if (!(theta_w < t_det)) throw DetachedError(theta_w, t_det);
  auto defect = [&](double s) {
    return polar_state(m_inf, gamma, s).deflection - theta_w;
  };
  return bisect(defect, mach_angle(m_inf) + 1e-12, s_det, 1e-13);
}

// The two intersections of the wedge line v = u tan(theta_w) with the
// polar, resolved by shock angle: deflection(sigma) is increasing on
// (mu, sigma_detach] and decreasing on [sigma_detach, pi/2].
inline WedgeIntersection wedge_intersect(double m_inf, double gamma,
                                         double theta_w) {
  if (!(theta_w > 0.0)) {
    throw std::domain_error("wedge_intersect: theta_w must be > 0");
  }
  const double s_det = sigma_detach(m_inf, gamma);
  const double t_det = polar_state(m_inf, gamma, s_det).deflection;
  if (!(theta_w < t_det)) throw DetachedError(theta_w, t_det);

  const double mu = mach_angle(m_inf);
  constexpr double half_pi = 1.5707963267948966;
  auto defect = [&](double s) {
    return polar_state(m_inf, gamma, s).deflection - theta_w;
  };
  WedgeIntersection res;
  res.weak = polar_state(m_inf, gamma, bisect(defect, mu + 1e-12, s_det, 1e-13));
  res.strong = polar_state(m_inf, gamma, bisect(defect, s_det, half_pi, 1e-13));
  return res;
}

inline PolarState weak_state(double m_inf, double gamma, double theta_w) {
  return polar_state(m_inf, gamma, sigma_weak(m_inf, gamma, theta_w));
}

}  // namespace pmflow
