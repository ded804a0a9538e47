#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pmflow/elliptic.hpp"
#include "pmflow/geometry.hpp"
#include "pmflow/mapping.hpp"

using namespace pmflow;

namespace {

ShockCurve pinned_linear(const Geometry& g, int n = 17) {
  return make_linear_shock(g.xi_O(), g.eta_O(), g.xi_N, g.eta_bar, n);
}

}  // namespace

TEST_CASE("mapping roundtrip on random interior points") {
  for (double beta_frac : {0.0, 0.4}) {
    const GasSetup gas = GasSetup::wedge_frame(1.4, 0.5);
    const double b = beta_frac == 0.0 ? 0.0 : beta_frac * beta_c(gas);
    const Geometry g = build_geometry(0.5, b, 1.4);
    const DomainMapping m = make_mapping(g, pinned_linear(g));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> us(-0.999, 0.999);
    std::uniform_real_distribution<double> ut(0.001, 0.999);
    for (int k = 0; k < 200; ++k) {
      const double s = us(rng), t = ut(rng);
      const Point p = m.to_physical(s, t);
      const auto st = m.to_reference(p.xi, p.eta);
      CHECK(std::abs(st[0] - s) < 1e-12);
      CHECK(std::abs(st[1] - t) < 1e-12);
    }
  }
}

TEST_CASE("top boundary pieces join at P1 and P2") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 0.5);
  const double b = 0.5 * beta_c(gas);
  const Geometry g = build_geometry(0.5, b, 1.4);
  const DomainMapping m = make_mapping(g, pinned_linear(g));
  // Arc side and shock side agree at the junctions.
  CHECK(m.top(g.xi_O()) == Catch::Approx(g.eta_O()).margin(1e-10));
  CHECK(m.top(g.xi_N) == Catch::Approx(g.eta_bar).margin(1e-10));
  CHECK(m.top(g.xi_O() - 1e-9) ==
        Catch::Approx(m.top(g.xi_O() + 1e-9)).margin(1e-6));
  CHECK(m.top(g.xi_N - 1e-9) ==
        Catch::Approx(m.top(g.xi_N + 1e-9)).margin(1e-6));
  // P1 sits on the top boundary at t = 1.
  const auto st = m.to_reference(g.P1.xi, g.P1.eta - 1e-13);
  CHECK(st[1] == Catch::Approx(1.0).margin(1e-9));
  // Corners collapse.
  CHECK(m.top(m.xi_lo) == 0.0);
  CHECK(m.top(m.xi_hi) == 0.0);
}

TEST_CASE("unpinned shock endpoints are rejected") {
  const Geometry g = build_geometry(0.5, 0.3, 1.4);
  ShockCurve bad = pinned_linear(g);
  bad.values.front() += 1e-3;
  bad.rebuild();
  CHECK_THROWS_AS(make_mapping(g, bad), InvariantViolation);
}

TEST_CASE("mesh cells are positive and nested in the bounding box") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 0.5);
  for (double bf : {0.0, 0.3, 0.7}) {
    const double b = bf == 0.0 ? 0.0 : bf * beta_c(gas);
    const Geometry g = build_geometry(0.5, b, 1.4);
    const FbpMesh mesh = make_mesh(g, pinned_linear(g), 32, 20);
    for (double a : mesh.area) CHECK(a > 0.0);
    for (const Point& p : mesh.corner) {
      CHECK(p.xi >= g.wedge_lo - 1e-12);
      CHECK(p.xi <= g.wedge_hi + 1e-12);
      CHECK(p.eta >= -1e-12);
      CHECK(p.eta <= g.eta_bar + 1e-12);
    }
    // Total mesh area approximates the domain area; convergence is slowed
    // by the square-root corners where the arcs meet the wedge.
    double area = 0.0;
    for (double a : mesh.area) area += a;
    const FbpMesh fine = make_mesh(g, pinned_linear(g), 128, 80);
    double area_f = 0.0;
    for (double a : fine.area) area_f += a;
    CHECK(std::abs(area - area_f) / area_f < 2e-2);
  }
}

TEST_CASE("background blend matches each arc's own state") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 0.5);
  const double b = 0.5 * beta_c(gas);
  const Geometry g = build_geometry(0.5, b, 1.4);
  const Background bg = make_background(g);
  // Left of the strip: phi_O; right: phi_N; smooth in between.
  const Point pl = {g.xi_O() + 0.05, 0.3};
  CHECK(bg.phi(pl) == Catch::Approx(g.state_O.phi(pl.xi, pl.eta)).margin(
                          1e-14));
  const Point pr = {g.xi_N - 0.05, 0.3};
  CHECK(bg.phi(pr) == Catch::Approx(g.state_N.phi(pr.xi, pr.eta)).margin(
                          1e-14));
  // Gradient consistency by finite differences across the strip.
  for (double xi : {bg.xi_a + 0.3 * (bg.xi_b - bg.xi_a),
                    bg.xi_a + 0.6 * (bg.xi_b - bg.xi_a)}) {
    const Point p = {xi, 0.2};
    const auto gr = bg.grad(p);
    const double h = 1e-7;
    const double fx = (bg.phi({xi + h, 0.2}) - bg.phi({xi - h, 0.2})) /
                      (2.0 * h);
    const double fy = (bg.phi({xi, 0.2 + h}) - bg.phi({xi, 0.2 - h})) /
                      (2.0 * h);
    CHECK(gr[0] == Catch::Approx(fx).margin(1e-7));
    CHECK(gr[1] == Catch::Approx(fy).margin(1e-7));
  }
}

TEST_CASE("sonic bands classify and clamp") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 0.5);
  const double b = 0.5 * beta_c(gas);
  const Geometry g = build_geometry(0.5, b, 1.4);
  SolverConfig cfg;
  const SonicBands bands = make_bands(g, cfg);
  CHECK(bands.eps > 0.0);

  // A point just inside the right arc, mid-span.
  const double th = 0.5 * std::atan2(g.P2.eta, g.P2.xi);
  const double r = g.state_N.c - 0.3 * bands.eps;
  const Point p = {r * std::cos(th), r * std::sin(th)};
  double x = 0.0;
  CHECK(bands.band(p, &x) == 2);
  CHECK(x == Catch::Approx(0.3 * bands.eps).margin(1e-12));

  // The background gradient itself satisfies psi_x = 0: no clamp.
  std::array<double, 2> grad = g.state_N.grad(p.xi, p.eta);
  auto st = bands.clamp(p, grad);
  CHECK(st.first);
  CHECK(!st.second);
  // A gradient with a large radial excess is clamped down to the bound.
  std::array<double, 2> hot = {grad[0] - 2.0 * x * p.xi / r,
                               grad[1] - 2.0 * x * p.eta / r};
  // psi_x of "hot" is +2x > (2 - delta)/(1+gamma) x.
  CHECK(bands.psi_x(p, hot, 2) == Catch::Approx(2.0 * x).margin(1e-12));
  auto st2 = bands.clamp(p, hot);
  CHECK(st2.second);
  CHECK(bands.psi_x(p, hot, 2) ==
        Catch::Approx(bands.slope_bound(x)).margin(1e-12));

  // Far interior point: outside both bands.
  CHECK(bands.band({0.5 * (g.xi_O() + g.xi_N), 0.05}, &x) == 0);
}
