#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "pmflow/shock_curve.hpp"

using namespace pmflow;

TEST_CASE("linear data is reproduced exactly") {
  ShockCurve sc = make_linear_shock(-1.0, 0.2, 1.0, 0.8, 11);
  for (double xi = -1.0; xi <= 1.0; xi += 0.05) {
    const double f_lin = 0.2 + (xi + 1.0) / 2.0 * 0.6;
    CHECK(sc.eval(xi) == Catch::Approx(f_lin).margin(1e-14));
    CHECK(sc.deriv(xi) == Catch::Approx(0.3).margin(1e-13));
  }
  CHECK(sc.eval(-1.0) == 0.2);
  CHECK(sc.eval(1.0) == 0.8);
}

TEST_CASE("shape preservation on monotone data") {
  ShockCurve sc;
  sc.knots = {0.0, 0.5, 1.0, 1.6, 2.0, 3.0};
  sc.values = {0.0, 0.05, 0.5, 0.52, 0.9, 1.0};
  sc.rebuild();
  double prev = sc.eval(0.0);
  for (int k = 1; k <= 600; ++k) {
    const double xi = 3.0 * k / 600.0;
    const double cur = sc.eval(xi);
    CHECK(cur >= prev - 1e-12);
    prev = cur;
  }
  CHECK(sc.min_knot_slope() >= 0.0);
}

TEST_CASE("flat data gives zero slopes") {
  ShockCurve sc = make_linear_shock(0.0, 0.7, 2.0, 0.7, 9);
  CHECK(sc.eval(1.234) == Catch::Approx(0.7).margin(1e-15));
  CHECK(std::abs(sc.deriv(0.9)) < 1e-14);
}

TEST_CASE("monotonize repairs a transient dip") {
  std::vector<double> v = {0.1, 0.3, 0.25, 0.4, 0.5};
  CHECK(monotonize_values(v));
  for (size_t k = 1; k < v.size(); ++k) CHECK(v[k] >= v[k - 1]);
  CHECK(v.front() == 0.1);
  CHECK(v.back() == 0.5);

  std::vector<double> ok = {0.1, 0.2, 0.3};
  CHECK(!monotonize_values(ok));
}

TEST_CASE("invalid knots are rejected") {
  ShockCurve sc;
  sc.knots = {0.0, 0.0, 1.0};
  sc.values = {0.0, 0.1, 0.2};
  CHECK_THROWS_AS(sc.rebuild(), InvariantViolation);
}
