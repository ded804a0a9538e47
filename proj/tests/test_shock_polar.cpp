#include <catch_amalgamated.hpp>

#include <cmath>

#include "pmflow/gas.hpp"
#include "pmflow/roots.hpp"
#include "pmflow/shock_polar.hpp"

using namespace pmflow;

namespace {

constexpr double kHalfPi = 1.5707963267948966;

// Independent oracle for the normal-velocity jump: plain scan + bisection
// on rho(w^2 + t^2) w = m sin(sigma), kept free of the library's
// bracketing helpers.
double oracle_normal_velocity(double m, double gam, double sigma) {
  const double t = m * std::cos(sigma);
  const double winf = m * std::sin(sigma);
  auto rho = [&](double q2) {
    if (gam == 1.0) return std::exp(0.5 * (m * m - q2));
    return std::pow(1.0 + 0.5 * (gam - 1.0) * (m * m - q2),
                    1.0 / (gam - 1.0));
  };
  auto f = [&](double w) { return rho(w * w + t * t) * w - winf; };
  double lo = 1e-12, hi = lo;
  const int n = 20000;
  for (int k = 1; k <= n; ++k) {
    hi = winf * k / n;
    if (f(lo) * f(hi) <= 0.0) break;
    lo = hi;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(lo) * f(mid) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("vanishing-strength shock at the Mach angle") {
  const double mu = mach_angle(2.0);
  const PolarState st = polar_state(2.0, 1.4, mu + 1e-8);
  CHECK(st.rho == Catch::Approx(1.0).margin(1e-3));
  CHECK(st.u == Catch::Approx(2.0).margin(1e-3));
  CHECK(std::abs(st.v) < 1e-3);
  CHECK(std::abs(st.deflection) < 1e-3);
}

TEST_CASE("normal shock at sigma = pi/2") {
  const PolarState st = polar_state(2.0, 1.4, kHalfPi);
  const double w_oracle = oracle_normal_velocity(2.0, 1.4, kHalfPi);
  CHECK(std::abs(st.u - w_oracle) < 1e-10);
  CHECK(std::abs(st.v) < 1e-12);
  CHECK(std::abs(st.deflection) < 1e-12);
  // Frozen golden values of the oracle.
  CHECK(st.u == Catch::Approx(0.4926387397751836).margin(1e-10));
  CHECK(st.rho == Catch::Approx(4.059770047545812).margin(1e-9));
}

TEST_CASE("weak-shock limit at m_inf -> 1") {
  const PolarState st = polar_state(1.0001, 2.0, kHalfPi);
  CHECK(std::abs(st.rho - 1.0) < 5e-4);
  CHECK(std::abs(st.u - 1.0001) < 5e-4);
}

TEST_CASE("polar state invariants") {
  for (double gam : {1.0, 1.4, 2.0}) {
    const double m = 2.0;
    const double mu = mach_angle(m);
    for (int k = 1; k <= 20; ++k) {
      const double sigma = mu + (kHalfPi - mu) * k / 20.0;
      const PolarState st = polar_state(m, gam, sigma);
      // Bernoulli consistency (2-n1 form; isothermal analogue ln rho).
      const double q2 = st.u * st.u + st.v * st.v;
      if (gam > 1.0) {
        const double lhs = std::pow(st.rho, gam - 1.0);
        const double rhs = 1.0 + 0.5 * (gam - 1.0) * (m * m - q2);
        CHECK(std::abs(lhs - rhs) < 1e-10);
      } else {
        CHECK(std::abs(std::log(st.rho) - 0.5 * (m * m - q2)) < 1e-10);
      }
      // Tangential continuity along the shock direction.
      const double tang = st.u * std::cos(sigma) + st.v * std::sin(sigma);
      CHECK(std::abs(tang - m * std::cos(sigma)) < 1e-10);
      CHECK(st.rho > 1.0);
      CHECK(st.v >= -1e-14);
      // The compressive root satisfies the jump equation to 1e-10.
      const double w = -st.u * std::sin(sigma) + st.v * std::cos(sigma);
      CHECK(std::abs(st.rho * (-w) - m * std::sin(sigma)) < 1e-10);
    }
  }
}

TEST_CASE("polar curve endpoints and sampling") {
  const auto two = polar_curve(2.0, 1.4, 2);
  REQUIRE(two.size() == 2);
  CHECK(two.front().rho < 1.7);  // near the Mach-angle limit point
  CHECK(std::abs(two.back().sigma - kHalfPi) < 1e-12);
  CHECK(std::abs(two.back().v) < 1e-12);

  const auto curve = polar_curve(3.0, 1.4, 101);
  double max_defl = 0.0;
  for (const auto& st : curve) max_defl = std::max(max_defl, st.deflection);
  const double td = theta_detach(3.0, 1.4);
  CHECK(max_defl <= td + 1e-12);
  CHECK(td - max_defl < 2e-3);  // grid tolerance
  CHECK(td == Catch::Approx(0.9985947310141556).margin(1e-7));

  for (const auto& st : polar_curve(2.0, 1.0, 51)) {
    const double q2 = st.u * st.u + st.v * st.v;
    CHECK(std::abs(std::log(st.rho) - 0.5 * (4.0 - q2)) < 1e-10);
  }
}

TEST_CASE("deflection is unimodal in sigma") {
  const double m = 2.0, gam = 1.4;
  const double mu = mach_angle(m);
  int sign_changes = 0;
  double prev = 0.0;
  bool have_prev = false;
  for (int k = 1; k < 1000; ++k) {
    const double s = mu + (kHalfPi - mu) * k / 1000.0;
    const double d = polar_state(m, gam, s).deflection;
    if (have_prev && d < prev - 1e-14 && sign_changes == 0) ++sign_changes;
    if (have_prev && d > prev + 1e-14 && sign_changes == 1) sign_changes = 99;
    prev = d;
    have_prev = true;
  }
  CHECK(sign_changes == 1);  // rises once, falls once
  CHECK(polar_state(m, gam, mu + 1e-9).deflection < 1e-6);
  CHECK(std::abs(polar_state(m, gam, kHalfPi).deflection) < 1e-12);
}

TEST_CASE("wedge intersection weak/strong branches") {
  const double m = 2.0, gam = 1.4;
  const double td = theta_detach(m, gam);

  const auto tiny = wedge_intersect(m, gam, 1e-7);
  CHECK(tiny.weak.u == Catch::Approx(2.0).margin(1e-3));
  CHECK(std::abs(tiny.weak.v) < 1e-3);
  CHECK(std::abs(tiny.strong.sigma - kHalfPi) < 1e-3);

  const auto mid = wedge_intersect(m, gam, 0.5 * td);
  CHECK(std::abs(mid.weak.deflection - 0.5 * td) < 1e-10);
  CHECK(std::abs(mid.strong.deflection - 0.5 * td) < 1e-10);
  CHECK(mid.weak.sigma < mid.strong.sigma);
  CHECK(mid.weak.rho < mid.strong.rho);

  const double ts = theta_sonic(m, gam);
  const auto sonic = wedge_intersect(m, gam, ts);
  const double speed = std::hypot(sonic.weak.u, sonic.weak.v);
  CHECK(std::abs(speed - critical_speed(m, gam)) < 1e-8);

  CHECK_THROWS_AS(wedge_intersect(m, gam, td + 1e-3), DetachedError);
  CHECK_THROWS_AS(wedge_intersect(m, gam, 0.0), std::domain_error);

  // weak.sigma < strong.sigma across the admissible range.
  for (int k = 1; k <= 9; ++k) {
    const auto w = wedge_intersect(m, gam, td * k / 10.0);
    CHECK(w.weak.sigma < w.strong.sigma);
  }
}

TEST_CASE("theta_sonic golden values and ordering") {
  // Bisection oracle: scan the weak branch for |q| = q*.
  const double m = 2.0, gam = 1.4;
  const double qs = critical_speed(m, gam);
  const double sd = sigma_detach(m, gam);
  auto defect = [&](double s) {
    const auto st = polar_state(m, gam, s);
    return std::hypot(st.u, st.v) - qs;
  };
  const double s_oracle = bisect(defect, mach_angle(m) + 1e-10, sd, 1e-13);
  const double ts_oracle = polar_state(m, gam, s_oracle).deflection;
  CHECK(std::abs(theta_sonic(m, gam) - ts_oracle) < 1e-10);
  CHECK(ts_oracle == Catch::Approx(0.4861747974233869).margin(1e-8));
  CHECK(theta_sonic(2.0, 1.0) ==
        Catch::Approx(0.686233137441272).margin(1e-8));

  CHECK(theta_sonic(m, gam) > 0.0);
  CHECK(theta_sonic(m, gam) < theta_detach(m, gam));
  // Collapse toward m -> 1+.
  CHECK(theta_sonic(1.001, 1.4) < 1e-3);
}

TEST_CASE("theta_detach golden values and monotonicity") {
  // Dense-sampling oracle against the golden-section result.
  const double m = 2.0, gam = 1.4;
  const double mu = mach_angle(m);
  double best = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double s = mu + (kHalfPi - mu) * k / 100000.0;
    best = std::max(best, polar_state(m, gam, s).deflection);
  }
  const double td = theta_detach(m, gam);
  CHECK(std::abs(td - best) < 1e-8);
  CHECK(td == Catch::Approx(0.5553797911103078).margin(1e-8));
  CHECK(theta_detach(5.0, 1.4) > td);
  CHECK(theta_detach(1.0001, 1.4) < 1e-3);
}
