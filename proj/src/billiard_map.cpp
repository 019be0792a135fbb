#include "billiard/billiard_map.hpp"

#include <cmath>
#include <numbers>

namespace billiard {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;
}

double phase_distance(const Table& table, const PhasePoint& a, const PhasePoint& b) {
  if (a.scatterer != b.scatterer) return std::numeric_limits<double>::infinity();
  const double per = table.perimeter(a.scatterer);
  double ds = std::fmod(std::abs(a.s - b.s), per);
  ds = std::min(ds, per - ds);
  return std::hypot(ds, a.phi - b.phi);
}

Vec2 phase_position(const Table& table, const PhasePoint& x) {
  return boundary_point(table, x.scatterer, x.s).position;
}

Vec2 phase_direction(const Table& table, const PhasePoint& x) {
  return boundary_point(table, x.scatterer, x.s).normal.rotated(x.phi);
}

bool is_grazing(const PhasePoint& x, double graze_tol) {
  return std::abs(x.phi) >= kHalfPi - graze_tol;
}

CollisionResult forward(const Table& table, const PhasePoint& x,
                        const MapOptions& opts) {
  if (is_grazing(x, opts.graze_tol))
    throw GrazingInput("forward: |phi| = " + std::to_string(std::abs(x.phi)));
  return forward_unchecked(table, x, opts);
}

CollisionResult forward_unchecked(const Table& table, const PhasePoint& x,
                                  const MapOptions& opts) {
  const BoundaryPoint bp = boundary_point(table, x.scatterer, x.s);
  const Vec2 v = bp.normal.rotated(x.phi);
  RayHit hit;
  if (!first_hit(table, bp.position, v, x.scatterer, &hit))
    throw NoIntersection("forward: ray escaped the lift search ball");
  const ScattererSpec& target = table.scatterers[static_cast<std::size_t>(hit.scatterer)];
  const Vec2 center{target.center.x + hit.lift_x, target.center.y + hit.lift_y};
  const Vec2 n = (hit.point - center).normalized();

  CollisionResult res;
  res.tau = hit.t;
  res.lift_x = hit.lift_x;
  res.lift_y = hit.lift_y;
  // phi' is the signed angle from -v to the arrival normal; by elasticity this
  // is also the outgoing angle from the normal.
  const double phi1 = signed_angle(-v, n);
  res.incoming_angle = phi1;
  double theta = std::atan2(n.y, n.x);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  res.next =
      PhasePoint{hit.scatterer, theta * target.radius, phi1};
  res.tangential = std::abs(phi1) >= kHalfPi - opts.graze_tol;
  return res;
}

CollisionResult backward(const Table& table, const PhasePoint& x,
                         const MapOptions& opts) {
  CollisionResult res = forward(table, reversal(x), opts);
  res.next = reversal(res.next);
  return res;
}

std::array<std::array<double, 2>, 2> differential(const Table& table,
                                                  const PhasePoint& x,
                                                  const MapOptions& opts) {
  const CollisionResult step = forward(table, x, opts);
  if (step.tangential)
    throw GrazingInput("differential: tangential arrival");
  const double k0 = 1.0 / table.scatterers[static_cast<std::size_t>(x.scatterer)].radius;
  const double k1 =
      1.0 / table.scatterers[static_cast<std::size_t>(step.next.scatterer)].radius;
  const double c0 = std::cos(x.phi);
  const double c1 = std::cos(step.next.phi);
  const double tau = step.tau;
  // Standard dispersing-billiard derivative in (dr, dphi) coordinates.
  const double f = -1.0 / c1;
  return {{{f * (tau * k0 + c0), f * tau},
           {f * (tau * k0 * k1 + k0 * c1 + k1 * c0), f * (tau * k1 + c1)}}};
}

ConeClass cone_classify(const Table& table, const TangentVector& v) {
  if (v.dr == 0.0 && v.dphi == 0.0) throw ZeroVector("cone_classify: zero vector");
  const double hi = table.k_max + 1.0 / table.tau_min;
  if (v.dr == 0.0) return ConeClass::Neither;  // vertical: outside both cones
  const double slope = v.dphi / v.dr;
  if (slope >= table.k_min && slope <= hi) return ConeClass::Unstable;
  if (slope <= -table.k_min && slope >= -hi) return ConeClass::Stable;
  return ConeClass::Neither;
}

}  // namespace billiard
