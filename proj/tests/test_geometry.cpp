#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "billiard/geometry.hpp"
#include "oracles.hpp"

using namespace billiard;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("validate_table rejects degenerate radii") {
  CHECK_THROWS_AS(validate_table({{{0.5, 0.5}, 0.0}}), DegenerateRadius);
  CHECK_THROWS_AS(validate_table({{{0.5, 0.5}, -0.1}}), DegenerateRadius);
}

TEST_CASE("disjointness is checked over torus lifts") {
  // Distance between (0,0) and (0.5,0.5) lifts is sqrt(0.5) ~ 0.7071, so a
  // radius sum of 0.55 passes and 0.71 overlaps.
  HorizonScanParams cheap{0.05, 0.05, 4.0};
  CHECK_NOTHROW(validate_table({{{0.0, 0.0}, 0.45}, {{0.5, 0.5}, 0.1}}, cheap));
  CHECK_THROWS_AS(validate_table({{{0.0, 0.0}, 0.45}, {{0.5, 0.5}, 0.26}}, cheap),
                  OverlappingScatterers);
  // Same-scatterer lifts: 2r >= 1 overlaps with the neighboring copy, even
  // though there is no other scatterer to collide with.
  CHECK_THROWS_AS(validate_table({{{0.5, 0.5}, 0.51}}, cheap), OverlappingScatterers);
  CHECK_THROWS_AS(validate_table({{{0.0, 0.0}, 0.6}, {{0.5, 0.5}, 0.1}}, cheap),
                  OverlappingScatterers);
}

TEST_CASE("derived constants") {
  HorizonScanParams cheap{0.05, 0.05, 4.0};
  Table t = validate_table({{{0.0, 0.0}, 0.42}, {{0.5, 0.5}, 0.28}}, cheap);
  CHECK(t.k_min == doctest::Approx(1.0 / 0.42));
  CHECK(t.k_max == doctest::Approx(1.0 / 0.28));
  CHECK(t.k_min <= t.k_max);
  // Common-normal gap between the diagonal neighbors.
  CHECK(t.tau_min == doctest::Approx(std::sqrt(0.5) - 0.7).epsilon(1e-9));
  CHECK(t.tau_min <= t.tau_max);
}

TEST_CASE("single disk fails the horizon check along y = 0") {
  HorizonScanParams cheap{0.05, 0.05, 4.0};
  Table t = validate_table({{{0.5, 0.5}, 0.3}}, cheap);
  CHECK_FALSE(t.horizon_certificate.pass);
  CHECK(t.horizon_certificate.budget_failures > 0);
  CHECK(t.tau_max == std::numeric_limits<double>::infinity());
}

TEST_CASE("reference table passes the horizon check") {
  Table t = oracle::reference_table(0.01, 0.01);
  CHECK(t.horizon_certificate.pass);
  CHECK(t.tau_max > 0.0);
  CHECK(t.tau_max < 6.0);
  CHECK(t.tau_min <= t.horizon_certificate.tau_min_seen);
}

TEST_CASE("horizon scan is monotone under refinement") {
  // Refining the grid can only add rays, so a fail stays a fail and tau_max
  // never decreases.
  Table t = oracle::reference_table(0.02, 0.02);
  HorizonReport coarse = finite_horizon_check(t, 0.02, 0.02, 6.0);
  HorizonReport fine = finite_horizon_check(t, 0.01, 0.01, 6.0);
  CHECK(coarse.pass);
  CHECK(fine.pass);
  CHECK(fine.tau_max >= coarse.tau_max - 1e-12);
}

TEST_CASE("rational direction flight matches the analytic intersection") {
  // Ray through the reference table along (1,0) at height y = 0.5 starts on
  // the boundary of the disk at (0.5,0.5) r=0.28 and flies to its own lift at
  // (1.5, 0.5): flight = 1 - 2r.
  Table t = oracle::reference_table(0.02, 0.02);
  RayHit hit;
  const bool ok = first_hit(t, {0.78, 0.5}, {1.0, 0.0}, 1, &hit);
  REQUIRE(ok);
  CHECK(hit.scatterer == 1);
  CHECK(hit.t == doctest::Approx(1.0 - 0.56).epsilon(1e-12));
  CHECK(hit.lift_x == 1);
  CHECK(hit.lift_y == 0);
}

TEST_CASE("boundary_point parametrization") {
  HorizonScanParams cheap{0.05, 0.05, 4.0};
  Table t = validate_table({{{0.3, 0.4}, 0.2}}, cheap);
  auto bp = boundary_point(t, 0, 0.0);
  CHECK(bp.position.x == doctest::Approx(0.5));
  CHECK(bp.position.y == doctest::Approx(0.4));
  CHECK(bp.normal.x == doctest::Approx(1.0));
  CHECK(bp.normal.y == doctest::Approx(0.0));
  CHECK(bp.curvature == doctest::Approx(5.0));

  // Quarter perimeter: normal points along +y.
  auto q = boundary_point(t, 0, 0.25 * t.perimeter(0));
  CHECK(q.normal.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(q.normal.y == doctest::Approx(1.0));

  CHECK_THROWS_AS(boundary_point(t, 3, 0.0), IndexOutOfRange);
}

TEST_CASE("boundary_point is periodic in s") {
  HorizonScanParams cheap{0.05, 0.05, 4.0};
  Table t = validate_table({{{0.3, 0.4}, 0.2}}, cheap);
  const double per = t.perimeter(0);
  for (double s : {0.0, 0.3, 1.1}) {
    auto a = boundary_point(t, 0, s);
    auto b = boundary_point(t, 0, s + per);
    CHECK((a.position - b.position).norm() < 1e-12);
  }
  // s just below the full perimeter limits to s = 0 within eps/r in angle.
  const double eps = 1e-8;
  auto a = boundary_point(t, 0, per - eps);
  auto b = boundary_point(t, 0, 0.0);
  CHECK((a.position - b.position).norm() < 2.0 * eps);
}

TEST_CASE("wide empty corridor reported as the worst ray") {
  HorizonScanParams cheap{0.05, 0.05, 4.0};
  Table t = validate_table({{{0.5, 0.5}, 0.3}}, cheap);
  // The failing family includes horizontal rays near y = 0; the worst ray is
  // the first failing one encountered (theta = 0 row).
  CHECK_FALSE(t.horizon_certificate.pass);
  CHECK(t.horizon_certificate.worst.theta == doctest::Approx(0.0));
}
