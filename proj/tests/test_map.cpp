#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "billiard/billiard_map.hpp"
#include "oracles.hpp"

using namespace billiard;

namespace {
constexpr double kPi = std::numbers::pi;

Table symmetric_two_disk() {
  // Two equal disks; head-on bounce along the x axis between them.
  HorizonScanParams cheap{0.05, 0.05, 4.0};
  return validate_table({{{0.25, 0.5}, 0.2}, {{0.75, 0.5}, 0.2}}, cheap);
}

}  // namespace

TEST_CASE("head-on flight between nearest points") {
  Table t = symmetric_two_disk();
  // Point of disk 0 nearest disk 1: s = 0 (normal (1,0)), phi = 0.
  PhasePoint x{0, 0.0, 0.0};
  CollisionResult r = forward(t, x);
  CHECK(r.next.scatterer == 1);
  CHECK(r.next.phi == doctest::Approx(0.0));
  CHECK(r.tau == doctest::Approx(0.5 - 0.4));
  // Arrival at the point of disk 1 nearest disk 0: normal (-1,0), s = half perimeter.
  CHECK(r.next.s == doctest::Approx(0.5 * t.perimeter(1)));
}

TEST_CASE("grazing input refused") {
  Table t = symmetric_two_disk();
  CHECK_THROWS_AS(forward(t, {0, 0.0, kPi / 2 - 1e-10}), GrazingInput);
  CHECK_THROWS_AS(forward(t, {0, 0.0, -kPi / 2}), GrazingInput);
}

TEST_CASE("forward matches the sphere-tracing oracle") {
  Table t = oracle::reference_table(0.02, 0.02);
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    PhasePoint x = oracle::random_point(t, rng);
    CollisionResult r;
    try {
      r = forward(t, x);
    } catch (const GrazingInput&) {
      continue;
    }
    if (r.tangential) continue;
    PhasePoint y;
    double tau = 0.0;
    REQUIRE(oracle::trace(t, x, &y, &tau));
    CHECK(phase_distance(t, r.next, y) < 1e-10);
    CHECK(r.tau == doctest::Approx(tau).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("time reversal and inverse identities") {
  Table t = oracle::reference_table(0.02, 0.02);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 500; ++k) {
    PhasePoint x = oracle::random_point(t, rng);
    CollisionResult r;
    try {
      r = forward(t, x);
    } catch (const GrazingInput&) {
      continue;
    }
    if (r.tangential) continue;
    // backward(forward(x)) = x
    CollisionResult b = backward(t, r.next);
    CHECK(phase_distance(t, b.next, x) < 1e-9);
    // iota . T . iota = T^{-1}: applying forward from the reversed image point
    // retraces the collision.
    CollisionResult f2 = forward(t, reversal(r.next));
    CHECK(phase_distance(t, reversal(f2.next), x) < 1e-9);
  }
}

TEST_CASE("flight times stay inside the certified bounds") {
  Table t = oracle::reference_table(0.01, 0.01);
  std::mt19937_64 rng(13);
  for (int k = 0; k < 2000; ++k) {
    PhasePoint x = oracle::random_point(t, rng);
    try {
      CollisionResult r = forward(t, x);
      CHECK(r.tau >= t.tau_min - 1e-9);
      CHECK(r.tau <= t.tau_max + 1e-6);
    } catch (const GrazingInput&) {
    }
  }
}

TEST_CASE("differential agrees with centered finite differences") {
  Table t = oracle::reference_table(0.02, 0.02);
  std::mt19937_64 rng(17);
  const double h = 1e-6;
  int checked = 0;
  for (int k = 0; k < 1200 && checked < 1000; ++k) {
    PhasePoint x = oracle::random_point(t, rng, 1.35);
    CollisionResult r;
    try {
      r = forward(t, x);
    } catch (const GrazingInput&) {
      continue;
    }
    if (r.tangential || std::abs(r.next.phi) > 1.45) continue;
    auto D = differential(t, x);

    auto img = [&](double ds, double dphi) {
      return forward(t, {x.scatterer, x.s + ds, x.phi + dphi}).next;
    };
    const PhasePoint sp = img(h, 0), sm = img(-h, 0), pp = img(0, h), pm = img(0, -h);
    REQUIRE(sp.scatterer == r.next.scatterer);
    REQUIRE(sm.scatterer == r.next.scatterer);
    const double per = t.perimeter(r.next.scatterer);
    auto wrap = [&](double d) {
      if (d > per / 2) return d - per;
      if (d < -per / 2) return d + per;
      return d;
    };
    const double fd[2][2] = {
        {wrap(sp.s - sm.s) / (2 * h), wrap(pp.s - pm.s) / (2 * h)},
        {(sp.phi - sm.phi) / (2 * h), (pp.phi - pm.phi) / (2 * h)}};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double scale = std::max(1.0, std::abs(fd[a][b]));
        CHECK(std::abs(D[a][b] - fd[a][b]) / scale < 1e-5);
      }
    // Liouville: |det DT| = cos phi / cos phi'.
    const double det = D[0][0] * D[1][1] - D[0][1] * D[1][0];
    CHECK(std::abs(det) ==
          doctest::Approx(std::cos(x.phi) / std::cos(r.next.phi)).epsilon(1e-6));
    ++checked;
  }
  CHECK(checked >= 900);
}

TEST_CASE("cone classification at the boundaries") {
  Table t = oracle::reference_table(0.02, 0.02);
  CHECK(cone_classify(t, {1.0, t.k_min}) == ConeClass::Unstable);
  CHECK(cone_classify(t, {1.0, -t.k_min}) == ConeClass::Stable);
  CHECK(cone_classify(t, {1.0, 0.0}) == ConeClass::Neither);
  CHECK(cone_classify(t, {1.0, t.k_max + 1.0 / t.tau_min}) == ConeClass::Unstable);
  CHECK(cone_classify(t, {0.0, 1.0}) == ConeClass::Neither);
  CHECK_THROWS_AS(cone_classify(t, {0.0, 0.0}), ZeroVector);
}

TEST_CASE("DT maps the unstable cone into itself") {
  Table t = oracle::reference_table(0.02, 0.02);
  std::mt19937_64 rng(23);
  const double hi = t.k_max + 1.0 / t.tau_min;
  int tested = 0;
  for (int k = 0; k < 3000 && tested < 2000; ++k) {
    PhasePoint x = oracle::random_point(t, rng, 1.35);
    std::array<std::array<double, 2>, 2> D;
    try {
      D = differential(t, x);
    } catch (const GrazingInput&) {
      continue;
    }
    for (int ray = 0; ray <= 16; ++ray) {
      const double slope = t.k_min + (hi - t.k_min) * ray / 16.0;
      const double dr = D[0][0] + D[0][1] * slope;
      const double dphi = D[1][0] + D[1][1] * slope;
      const double out = dphi / dr;
      CHECK(out >= t.k_min - 1e-10);
      CHECK(out <= hi + 1e-10);
    }
    ++tested;
  }
  CHECK(tested >= 2000);
}

TEST_CASE("expansion of unit unstable vectors in the adapted norm") {
  // p-norm |v|_p = cos(phi) |dr|; dispersing tables expand it uniformly.
  Table t = oracle::reference_table(0.02, 0.02);
  std::mt19937_64 rng(29);
  double min_factor = std::numeric_limits<double>::infinity();
  int tested = 0;
  for (int k = 0; k < 4000 && tested < 2000; ++k) {
    PhasePoint x = oracle::random_point(t, rng, 1.4);
    try {
      auto D = differential(t, x);
      CollisionResult r = forward(t, x);
      const double slope = 0.5 * (t.k_min + t.k_max + 1.0 / t.tau_min);
      const double dr1 = D[0][0] + D[0][1] * slope;
      const double before = std::cos(x.phi) * 1.0;
      const double after = std::cos(r.next.phi) * std::abs(dr1);
      min_factor = std::min(min_factor, after / before);
      ++tested;
    } catch (const GrazingInput&) {
    }
  }
  CHECK(tested >= 2000);
  CHECK(min_factor > 1.0);
  MESSAGE("min adapted-norm expansion factor: ", min_factor);
}
