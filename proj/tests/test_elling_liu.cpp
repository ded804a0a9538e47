#include <catch_amalgamated.hpp>

#include <cmath>

#include "pmflow/elling_liu.hpp"
#include "pmflow/geometry.hpp"

using namespace pmflow;

TEST_CASE("tangent slopes from an external point") {
  // Circle of radius 1 centered at (0, -1); point (2, 0) outside.
  const auto ms = tangent_slopes_to_incoming_sonic(2.0, 0.0, 1.0);
  REQUIRE(ms.size() == 2);
  // Verify each slope really is tangent: distance from the center to the
  // line y - b = m (x - a) equals 1.
  for (double m : ms) {
    const double d = std::abs(-(-1.0) + (0.0 - m * 2.0)) / std::hypot(m, 1.0);
    CHECK(d == Catch::Approx(1.0).margin(1e-12));
  }
  CHECK_THROWS_AS(tangent_slopes_to_incoming_sonic(0.1, -0.9, 0.0),
                  InvariantViolation);
}

TEST_CASE("v_inf > 1: the incoming sonic disk is below the wedge") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 2.0);
  const double bc = beta_c(gas);
  for (int k = 1; k <= 12; ++k) {
    const double b = bc * k / 13.0;
    const Geometry g = build_geometry(2.0, b, 1.4);
    CHECK(!segment_hits_incoming_sonic(g));
    CHECK(elling_liu_F(g) < 0.0);
  }
}

TEST_CASE("F sign change for small v_inf (Elling-Liu failure region)") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 0.05);
  const auto bh = beta_hat(gas, 200);
  REQUIRE(bh.has_value());
  const double bc = beta_c(gas);
  CHECK(*bh > 0.0);
  CHECK(*bh < bc);
  // Sign structure on a grid: F <= 0 left of beta_hat, F > 0 right of it.
  for (int k = 1; k <= 40; ++k) {
    const double b = bc * k / 41.0;
    const double F = elling_liu_F(build_geometry(0.05, b, 1.4));
    if (b < *bh - 1e-4) CHECK(F <= 0.0);
    if (b > *bh + 1e-4 && b < bc - 1e-4) CHECK(F > 0.0);
  }
}

TEST_CASE("beta_hat absent for v_inf = 2") {
  const GasSetup gas = GasSetup::wedge_frame(1.4, 2.0);
  CHECK(!beta_hat(gas, 128).has_value());
}

TEST_CASE("F > 0 iff the segment P1P2 meets the open disk") {
  for (double v : {0.05, 0.2, 0.5, 1.0, 2.0}) {
    const GasSetup gas = GasSetup::wedge_frame(1.4, v);
    const double bc = beta_c(gas);
    for (int k = 1; k <= 15; ++k) {
      const double b = bc * k / 16.0;
      const Geometry g = build_geometry(v, b, 1.4);
      const double F = elling_liu_F(g);
      if (std::abs(F) < 1e-9) continue;  // within tangency tolerance
      CHECK(segment_hits_incoming_sonic(g) == (F > 0.0));
    }
  }
}

TEST_CASE("degenerate segment reduces to a point-in-disk test") {
  Geometry g;  // hand-made: only the fields the predicate reads
  g.gas = GasSetup::wedge_frame(1.4, 0.5);
  g.P1 = {0.0, 0.2};
  g.P2 = {0.0, 0.2};
  CHECK(segment_hits_incoming_sonic(g));  // |(0,0.2)-(0,-0.5)| = 0.7 < 1
  g.P1 = {3.0, 0.2};
  g.P2 = {3.0, 0.2};
  CHECK(!segment_hits_incoming_sonic(g));
}

TEST_CASE("v_star threshold for gamma = 1.4") {
  const double vs = v_star(1.4, 1e-3);
  CHECK(vs > 0.0);
  CHECK(vs <= 1.0);
  // Predicate flips across the threshold.
  auto max_F_positive = [&](double v) {
    const GasSetup gas = GasSetup::wedge_frame(1.4, v);
    const double bc = beta_c(gas);
    for (int k = 1; k < 64; ++k) {
      if (elling_liu_F(build_geometry(v, bc * k / 64.0, 1.4)) > 0.0) {
        return true;
      }
    }
    return false;
  };
  CHECK(max_F_positive(vs - 0.02));
  CHECK(!max_F_positive(vs + 0.02));
}

TEST_CASE("F at beta -> 0 is negative (flat segment, positive tangent)") {
  for (double v : {0.1, 0.5, 1.5}) {
    const Geometry g = build_geometry(v, 1e-4, 1.4);
    CHECK(elling_liu_F(g) < 0.0);
  }
}
