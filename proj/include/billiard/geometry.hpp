#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "billiard/errors.hpp"
#include "billiard/vec2.hpp"

namespace billiard {

/// One circular scatterer on the unit torus. Center lives in [0,1)^2;
/// the disk itself may overhang the fundamental cell (lifts handle that).
struct ScattererSpec {
  Vec2 center;
  double radius = 0.0;
};

struct HorizonScanParams {
  double angular_step = 2e-3;  // radians, directions in [0, pi)
  double offset_step = 2e-3;   // perpendicular offset step
  double lift_radius = 6.0;    // half-length (in lattice cells) traced per ray
};

/// A sampled line, stored so the worst ray in a report can be re-examined.
struct RaySample {
  Vec2 origin;
  double theta = 0.0;
};

struct HorizonReport {
  bool pass = false;
  double tau_max = 0.0;  // longest complete free flight seen over the scan
  double tau_min_seen = std::numeric_limits<double>::infinity();
  RaySample worst;       // ray achieving tau_max, or the failing ray
  std::uint64_t rays = 0;
  std::uint64_t budget_failures = 0;  // rays with no hit within the lift budget
  HorizonScanParams params;
};

/// Validated table with derived constants. Immutable after validate_table;
/// safe to share across threads.
struct Table {
  std::vector<ScattererSpec> scatterers;
  double k_min = 0.0;    // 1 / max radius
  double k_max = 0.0;    // 1 / min radius
  double tau_min = 0.0;  // min gap between lifted disks (common-normal bound)
  double tau_max = std::numeric_limits<double>::infinity();
  HorizonReport horizon_certificate;

  // Lattice translations probed when searching for the next collision,
  // sorted by norm so the search can stop early.
  std::vector<Vec2> collision_lifts;

  double min_radius = 0.0;
  double max_radius = 0.0;

  double perimeter(int i) const;
};

struct BoundaryPoint {
  Vec2 position;   // point on the lifted (base-cell) circle, in R^2
  Vec2 normal;     // outward unit normal
  double curvature = 0.0;
};

/// Validates scatterer specs, derives curvature/flight-time constants and runs
/// the horizon scan to certify the table. Throws DegenerateRadius /
/// OverlappingScatterers; a failed horizon scan is recorded in the
/// certificate, not thrown.
Table validate_table(const std::vector<ScattererSpec>& specs,
                     const HorizonScanParams& scan = {});

/// Dense ray scan over direction x offset. Each sampled line is traced over
/// t in [-lift_radius, lift_radius]; gaps between consecutive disk hits are
/// complete free flights. A ray with no hit on either side of t=0 counts as a
/// budget failure and fails the scan (fail closed).
HorizonReport finite_horizon_check(const Table& table, double angular_step,
                                   double offset_step, double lift_radius = 6.0);

/// Arclength parametrization of scatterer i. s is taken mod the perimeter.
BoundaryPoint boundary_point(const Table& table, int i, double s);

/// First intersection of the ray p + t*v (t > t_min_cut) with a lifted disk.
/// Returns false if nothing is hit within the table's lift search radius.
/// skip_scatterer (if >= 0) excludes the base-cell copy of that scatterer
/// (the disk the ray is leaving).
struct RayHit {
  int scatterer = -1;
  int lift_x = 0, lift_y = 0;
  double t = 0.0;
  Vec2 point;
};
bool first_hit(const Table& table, const Vec2& p, const Vec2& v, int skip_scatterer,
               RayHit* hit);

}  // namespace billiard
