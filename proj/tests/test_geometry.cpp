#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pmflow/geometry.hpp"
#include "pmflow/shock_polar.hpp"

using namespace pmflow;

namespace {

// Oracle for rho_N: plain scan + bisection of
// i(rho) - v^2/2 - v^2/(rho-1) = 0 on (1, 1e6), independent of the
// library's bracket widening.
double oracle_rho_N(double v, double gam) {
  auto f = [&](double rho) {
    return enthalpy(rho, gam) - 0.5 * v * v - v * v / (rho - 1.0);
  };
  double lo = 1.0 + 1e-10, hi = lo;
  for (int k = 1; k <= 100000; ++k) {
    hi = 1.0 + 1e-10 + (1e6 - 1.0) * k / 100000.0;
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

// Oracle for the oblique state: bisection on the flux defect with
// xi_tilde eliminated through Bernoulli.
double oracle_rho_O(double v, double gam, double beta) {
  const double tb = std::tan(beta);
  const double u_O = -v * tb;
  const double B = 0.5 * v * v;
  auto xt = [&](double rho) {
    return (enthalpy(rho, gam) + 0.5 * u_O * u_O - B) / u_O;
  };
  auto f = [&](double rho) {
    return (rho - 1.0) * xt(rho) - rho * u_O + v / tb;
  };
  double lo = 1.0 + 1e-10, step = 1e-10, hi = lo;
  for (int k = 0; k < 100; ++k) {
    hi = lo + step;
    if (f(lo) * f(hi) <= 0.0) break;
    lo = hi;
    step *= 2.0;
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

TEST_CASE("wedge-frame rotation") {
  CHECK(rotate_to_wedge_frame({0, 0}, 0.0, 1.0).xi ==
        Catch::Approx(-1.0).margin(1e-15));
  CHECK(rotate_to_wedge_frame({0, 0}, 0.0, 1.0).eta == 0.0);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const double tw = 0.1 + 0.2 * std::abs(u(rng));
    const double xi = std::abs(u(rng)) + 0.1;
    // Points on the wedge line eta = xi tan(theta_w) map to eta' = 0.
    const Point p{xi, xi * std::tan(tw)};
    CHECK(std::abs(rotate_to_wedge_frame(p, tw, 1.3).eta) < 1e-14);
    // Round trip.
    const Point q{u(rng), u(rng)};
    const Point r =
        rotate_from_wedge_frame(rotate_to_wedge_frame(q, tw, 1.3), tw, 1.3);
    CHECK(std::abs(r.xi - q.xi) < 1e-14);
    CHECK(std::abs(r.eta - q.eta) < 1e-14);
  }
}

TEST_CASE("normal state against the bisection oracle") {
  struct Golden {
    double gam, rho_N, eta_bar, c_N, xi_N;
  };
  // Frozen from the oracle below.
  const Golden goldens[] = {
      {1.4, 1.6172249280964832, 0.8100774567579375, 1.1009157512505607,
       0.7455132496503187},
      {1.0, 1.6574303485020374, 0.760536840350093, 1.0, 0.6492947824141952},
      {2.0, 1.5663911092686562, 0.8827822185373236, 1.2515554759053455,
       0.8871790483904458},
  };
  for (const auto& gd : goldens) {
    const GasSetup gas = GasSetup::wedge_frame(gd.gam, 0.5);
    const NormalShock ns = normal_state(gas);
    const double rho_oracle = oracle_rho_N(0.5, gd.gam);
    CHECK(std::abs(ns.rho_N - rho_oracle) < 1e-10);
    CHECK(ns.rho_N == Catch::Approx(gd.rho_N).margin(1e-10));
    CHECK(ns.eta_bar == Catch::Approx(gd.eta_bar).margin(1e-10));
    CHECK(ns.c_N == Catch::Approx(gd.c_N).margin(1e-10));
    CHECK(ns.xi_N == Catch::Approx(gd.xi_N).margin(1e-10));
    // Residuals of the defining identities.
    CHECK(std::abs(ns.eta_bar - 0.5 / (ns.rho_N - 1.0)) < 1e-10);
    CHECK(std::abs(enthalpy(ns.rho_N, gd.gam) - 0.125 - ns.eta_bar * 0.5) <
          1e-10);
    CHECK(ns.eta_bar > 0.0);
    CHECK(ns.eta_bar < ns.c_N);
  }
  // Weak incoming flow: the root stays admissible.
  for (double v : {1e-3, 1e-2}) {
    const NormalShock ns = normal_state(GasSetup::wedge_frame(1.4, v));
    CHECK(ns.eta_bar > 0.0);
    CHECK(ns.eta_bar < ns.c_N);
  }
}

TEST_CASE("oblique state: degenerate beta = 0 and golden beta = 0.3") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 0.5);
  const NormalShock ns = normal_state(gas);

  const ObliqueShock ob0 = oblique_state(gas, 0.0);
  CHECK(ob0.state.u == 0.0);
  CHECK(ob0.state.rho == Catch::Approx(ns.rho_N).margin(1e-12));
  CHECK(ob0.state.k == Catch::Approx(-0.5 * ns.eta_bar).margin(1e-12));
  CHECK(std::isnan(ob0.xi_tilde));

  const ObliqueShock ob = oblique_state(gas, 0.3);
  const double rho_oracle = oracle_rho_O(0.5, 1.4, 0.3);
  CHECK(std::abs(ob.state.rho - rho_oracle) < 1e-10);
  CHECK(ob.state.rho == Catch::Approx(1.6528333598439109).margin(1e-10));
  CHECK(ob.xi_tilde == Catch::Approx(-2.8675077338456036).margin(1e-9));
  CHECK(ob.state.u == Catch::Approx(-0.15466812480481162).margin(1e-12));
  CHECK(ob.state.v == 0.0);

  // Flux residual along S_O at two points.
  const double tb = std::tan(0.3), sb = std::sin(0.3), cb = std::cos(0.3);
  const UniformState inf = incoming_state(gas);
  for (double xi : {ob.xi_tilde, ob.xi_tilde + 1.0}) {
    const double eta = tb * (xi - ob.xi_tilde);
    const auto gi = inf.grad(xi, eta);
    const auto go = ob.state.grad(xi, eta);
    const double flux_inf = -gi[0] * sb + gi[1] * cb;
    const double flux_O = ob.state.rho * (-go[0] * sb + go[1] * cb);
    CHECK(std::abs(flux_O - flux_inf) < 1e-12);
  }
}

TEST_CASE("cross-frame consistency with the steady polar") {
  // (v_inf, beta) -> (u_inf, theta_w) -> weak polar state; the rotated
  // u-coefficient of the oblique state must match -v tan(beta).
  const double v = 0.5, gam = 1.4, beta = 0.3;
  const auto [u_inf, tw] = map_p2_to_p1(v, beta, gam);
  CHECK(u_inf * std::sin(tw) == Catch::Approx(v).margin(1e-10));

  const auto wi = wedge_intersect(u_inf, gam, tw);
  const double q = std::hypot(wi.weak.u, wi.weak.v);
  const double u_tilde = q - u_inf * std::cos(tw);
  CHECK(std::abs(u_tilde - (-v * std::tan(beta))) < 1e-8);

  // Downstream density agrees between the frames.
  const ObliqueShock ob = oblique_state(GasSetup::wedge_frame(gam, v), beta);
  CHECK(std::abs(wi.weak.rho - ob.state.rho) < 1e-8);
}

TEST_CASE("P1 intersection point") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 0.5);
  const ObliqueShock ob = oblique_state(gas, 0.3);
  const auto p1 = p1_point(ob, 0.3);
  REQUIRE(p1.has_value());
  CHECK(p1->xi == Catch::Approx(-1.1190857311228914).margin(1e-9));
  CHECK(p1->eta == Catch::Approx(0.5408503050571902).margin(1e-9));
  // On the line and on the circle.
  CHECK(std::abs(p1->eta - std::tan(0.3) * (p1->xi - ob.xi_tilde)) < 1e-12);
  CHECK(std::abs(std::hypot(p1->xi - ob.state.u, p1->eta) - ob.state.c) <
        1e-12);

  // beta = 0: the degenerate line has no intersection above the wedge.
  const ObliqueShock ob0 = oblique_state(gas, 0.0);
  ObliqueShock fake = ob0;
  fake.xi_tilde = 0.0;  // formal line eta = 0 through a finite intercept
  CHECK(!p1_point(fake, 0.0).has_value());
}

TEST_CASE("beta_c: threshold of the admissible interval") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 0.5);
  const double bc = beta_c(gas);
  CHECK(bc == Catch::Approx(0.7230110457888892).margin(1e-9));
  // eta_O exists just below, does not just above.
  const auto below = p1_point(oblique_state(gas, bc - 1e-6), bc - 1e-6);
  REQUIRE(below.has_value());
  CHECK(below->eta > 0.0);
  const auto above = p1_point(oblique_state(gas, bc + 1e-6), bc + 1e-6);
  CHECK(!above.has_value());

  CHECK(beta_c(GasSetup::wedge_frame(1.0, 0.5)) ==
        Catch::Approx(0.7466053526333263).margin(1e-8));
  CHECK(beta_c(GasSetup::wedge_frame(2.0, 0.5)) ==
        Catch::Approx(0.6946281718333589).margin(1e-8));
  CHECK(beta_c(GasSetup::wedge_frame(1.4, 2.0)) ==
        Catch::Approx(0.24722927371030984).margin(1e-8));

  // eta_O(beta) strictly decreasing (50-point grid).
  for (double gam : {1.0, 1.4}) {
    const GasSetup g = GasSetup::wedge_frame(gam, 0.5);
    const double b_c = beta_c(g);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 50; ++k) {
      const double b = b_c * k / 51.0;
      const auto p1 = p1_point(oblique_state(g, b), b);
      REQUIRE(p1.has_value());
      CHECK(p1->eta < prev);
      prev = p1->eta;
    }
  }

  // Smooth dependence on v_inf (spot check).
  for (double v : {0.3, 0.5, 1.0}) {
    const double a = beta_c(GasSetup::wedge_frame(1.4, v));
    const double b = beta_c(GasSetup::wedge_frame(1.4, v + 1e-6));
    CHECK(std::abs(a - b) < 1e-3);
  }
}

TEST_CASE("parameter maps are inverse bijections (spot grid)") {
  for (double gam : {1.0, 1.4, 2.0}) {
    for (double u_inf : {1.5, 2.5}) {
      const double ts = theta_sonic(u_inf, gam);
      for (double frac : {0.25, 0.7}) {
        const double tw = frac * ts;
        const auto [v, beta] = map_p1_to_p2(u_inf, tw, gam);
        CHECK(v == Catch::Approx(u_inf * std::sin(tw)).margin(1e-14));
        CHECK(beta > 0.0);
        const auto [u2, tw2] = map_p2_to_p1(v, beta, gam);
        CHECK(std::abs(u2 - u_inf) < 1e-8);
        CHECK(std::abs(tw2 - tw) < 1e-8);
        // beta lies in the admissible interval.
        CHECK(beta < beta_c(GasSetup::wedge_frame(gam, v)));
      }
    }
  }
  CHECK_THROWS_AS(map_p1_to_p2(2.0, 10.0, 1.4), std::domain_error);
  CHECK_THROWS_AS(map_p1_to_p2(0.5, 0.1, 1.4), std::domain_error);
}

TEST_CASE("time potential reconstruction") {
  CHECK(reconstruct_time_potential(0.0, 0.0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(reconstruct_time_potential(0.0, 0.0, 0.0, -1.0),
                  std::domain_error);
  // Uniform state pattern: Phi(x, t) = u x1 + t k.
  const double u = 2.0, k = 0.7;
  for (double t : {0.5, 1.0, 3.0}) {
    for (double xi : {-1.0, 0.3, 2.0}) {
      const double eta = 0.4;
      const double phi = -0.5 * (xi * xi + eta * eta) + u * xi + k;
      const double Phi = reconstruct_time_potential(phi, xi, eta, t);
      CHECK(Phi == Catch::Approx(u * (t * xi) + t * k).margin(1e-12));
    }
  }
  // Self-similar scaling: Phi(a x, a t) = a Phi(x, t).
  const double phi_val = 0.3, xi = 0.2, eta = 0.9, t = 1.7;
  CHECK(reconstruct_time_potential(phi_val, xi, eta, 2.0 * t) ==
        Catch::Approx(2.0 * reconstruct_time_potential(phi_val, xi, eta, t))
            .margin(1e-12));
}

TEST_CASE("build_geometry validates its invariants") {
  const double bc = beta_c(GasSetup::wedge_frame(1.4, 0.5));
  const Geometry g = build_geometry(0.5, 0.5 * bc, 1.4);
  CHECK(g.eta_O() > 0.0);
  CHECK(g.eta_O() < g.eta_bar);
  CHECK(g.wedge_lo < g.xi_O());
  CHECK(g.xi_N < g.wedge_hi);

  // Degenerate beta = 0: S_O absent, P1 at the arc/shock junction.
  const Geometry g0 = build_geometry(0.5, 0.0, 1.4);
  CHECK(std::isnan(g0.xi_tilde));
  CHECK(g0.P1.xi == Catch::Approx(-g0.xi_N).margin(1e-14));
  CHECK(g0.P1.eta == Catch::Approx(g0.eta_bar).margin(1e-14));
  CHECK(g0.state_O.rho == g0.state_N.rho);

  CHECK_THROWS_AS(build_geometry(0.5, bc + 0.01, 1.4), std::domain_error);
}
