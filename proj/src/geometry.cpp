#include "billiard/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace billiard {

namespace {

constexpr double kPi = std::numbers::pi;

// Quadratic ray/circle intersection. Returns the interval [t0, t1] of the
// chord, or false if the line misses (tangencies count as a miss: a grazing
// ray does not enter the interior).
bool ray_circle(const Vec2& p, const Vec2& v, const Vec2& c, double r,
                double* t0, double* t1) {
  const Vec2 d = c - p;
  const double b = v.dot(d);
  const double disc = b * b - (d.norm2() - r * r);
  if (disc <= 0.0) return false;
  const double sq = std::sqrt(disc);
  *t0 = b - sq;
  *t1 = b + sq;
  return true;
}

}  // namespace

double Table::perimeter(int i) const {
  return 2.0 * kPi * scatterers[static_cast<std::size_t>(i)].radius;
}

BoundaryPoint boundary_point(const Table& table, int i, double s) {
  if (i < 0 || static_cast<std::size_t>(i) >= table.scatterers.size())
    throw IndexOutOfRange("boundary_point: scatterer index " + std::to_string(i));
  const ScattererSpec& sc = table.scatterers[static_cast<std::size_t>(i)];
  const double theta = s / sc.radius;
  BoundaryPoint bp;
  bp.normal = {std::cos(theta), std::sin(theta)};
  bp.position = sc.center + sc.radius * bp.normal;
  bp.curvature = 1.0 / sc.radius;
  return bp;
}

bool first_hit(const Table& table, const Vec2& p, const Vec2& v, int skip_scatterer,
               RayHit* hit) {
  // Phase points live on base-cell disks, so p is within ~2 of the origin and
  // the precomputed lift ball (sorted by norm) can be walked with early exit.
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const Vec2& lift : table.collision_lifts) {
    if (lift.norm() - 4.0 - table.max_radius > best) break;
    for (std::size_t j = 0; j < table.scatterers.size(); ++j) {
      if (skip_scatterer == static_cast<int>(j) && lift.x == 0.0 && lift.y == 0.0)
        continue;  // an outgoing ray cannot re-enter the convex disk it leaves
      const ScattererSpec& sc = table.scatterers[j];
      const Vec2 c = sc.center + lift;
      double t0, t1;
      if (!ray_circle(p, v, c, sc.radius, &t0, &t1)) continue;
      if (t0 <= 1e-12) continue;  // behind or at the start point
      if (t0 < best) {
        best = t0;
        found = true;
        hit->scatterer = static_cast<int>(j);
        hit->lift_x = static_cast<int>(lift.x);
        hit->lift_y = static_cast<int>(lift.y);
        hit->t = t0;
        hit->point = p + t0 * v;
      }
    }
  }
  return found;
}

namespace {

// Longest and shortest complete free flight along one line, traced over
// t in [-T, T]. Returns false when the ray has no hit on one side of t=0,
// which means the budget could not certify it.
bool scan_one_ray(const Table& table, const Vec2& origin, const Vec2& dir, double T,
                  double* longest, double* shortest) {
  // Collect chord intervals against every lifted disk whose center is within
  // T + max_r of the segment's bounding region.
  std::vector<std::pair<double, double>> chords;
  const int R = static_cast<int>(std::ceil(T + table.max_radius + 1.0));
  for (int mx = -R; mx <= R; ++mx) {
    for (int my = -R; my <= R; ++my) {
      for (const ScattererSpec& sc : table.scatterers) {
        const Vec2 c{sc.center.x + mx, sc.center.y + my};
        // distance from line: reject quickly
        const Vec2 d = c - origin;
        const double perp = std::abs(dir.cross(d));
        if (perp >= sc.radius) continue;
        const double along = dir.dot(d);
        if (along < -T - sc.radius || along > T + sc.radius) continue;
        double t0, t1;
        if (!ray_circle(origin, dir, c, sc.radius, &t0, &t1)) continue;
        if (t1 < -T || t0 > T) continue;
        chords.emplace_back(t0, t1);
      }
    }
  }
  if (chords.empty()) return false;
  std::sort(chords.begin(), chords.end());
  bool before = false, after = false;
  for (const auto& ch : chords) {
    if (ch.first <= 0.0) before = true;
    if (ch.second >= 0.0) after = true;
  }
  if (!before || !after) return false;
  double lo = 0.0, sh = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < chords.size(); ++k) {
    const double gap = chords[k].first - chords[k - 1].second;
    if (gap > lo) lo = gap;
    if (gap > 0.0 && gap < sh) sh = gap;
  }
  *longest = lo;
  *shortest = sh;
  return true;
}

}  // namespace

HorizonReport finite_horizon_check(const Table& table, double angular_step,
                                   double offset_step, double lift_radius) {
  if (angular_step <= 0.0 || offset_step <= 0.0)
    throw BadConfig("finite_horizon_check: steps must be positive");
  HorizonReport rep;
  rep.params = {angular_step, offset_step, lift_radius};
  rep.pass = true;
  const double T = lift_radius;
  for (double theta = 0.0; theta < kPi; theta += angular_step) {
    const Vec2 dir{std::cos(theta), std::sin(theta)};
    const Vec2 nrm{-dir.y, dir.x};
    // Offsets over [0, 1.5): covers all lines modulo lattice translation with
    // margin (distinct offsets modulo the lattice span at most |n_x|+|n_y| <= sqrt2).
    for (double off = 0.0; off < 1.5; off += offset_step) {
      ++rep.rays;
      const Vec2 origin = off * nrm;
      double longest = 0.0, shortest = 0.0;
      if (!scan_one_ray(table, origin, dir, T, &longest, &shortest)) {
        ++rep.budget_failures;
        if (rep.pass) rep.worst = {origin, theta};
        rep.pass = false;
        continue;
      }
      if (longest > rep.tau_max) {
        rep.tau_max = longest;
        if (rep.pass) rep.worst = {origin, theta};
      }
      if (shortest < rep.tau_min_seen) rep.tau_min_seen = shortest;
    }
  }
  return rep;
}

Table validate_table(const std::vector<ScattererSpec>& specs,
                     const HorizonScanParams& scan) {
  if (specs.empty()) throw BadConfig("validate_table: empty scatterer list");
  Table t;
  t.scatterers = specs;
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const ScattererSpec& sc = specs[i];
    if (!(sc.radius > 0.0))
      throw DegenerateRadius("scatterer " + std::to_string(i) + ": radius " +
                             std::to_string(sc.radius));
    if (sc.center.x < 0.0 || sc.center.x >= 1.0 || sc.center.y < 0.0 ||
        sc.center.y >= 1.0)
      throw BadConfig("scatterer " + std::to_string(i) + ": center outside [0,1)^2");
    rmin = std::min(rmin, sc.radius);
    rmax = std::max(rmax, sc.radius);
  }
  t.min_radius = rmin;
  t.max_radius = rmax;
  t.k_min = 1.0 / rmax;
  t.k_max = 1.0 / rmin;

  // Strict disjointness over all torus lifts, and the common-normal gap bound.
  double gap_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t j = i; j < specs.size(); ++j) {
      for (int mx = -2; mx <= 2; ++mx) {
        for (int my = -2; my <= 2; ++my) {
          if (i == j && mx == 0 && my == 0) continue;
          const Vec2 d = specs[j].center + Vec2(mx, my) - specs[i].center;
          const double gap = d.norm() - specs[i].radius - specs[j].radius;
          if (gap <= 0.0)
            throw OverlappingScatterers(
                "scatterers " + std::to_string(i) + " and " + std::to_string(j) +
                " at lift (" + std::to_string(mx) + "," + std::to_string(my) +
                "): gap " + std::to_string(gap));
          gap_min = std::min(gap_min, gap);
        }
      }
    }
  }
  t.tau_min = gap_min;

  t.horizon_certificate =
      finite_horizon_check(t, scan.angular_step, scan.offset_step, scan.lift_radius);
  t.tau_max = t.horizon_certificate.pass
                  ? t.horizon_certificate.tau_max
                  : std::numeric_limits<double>::infinity();

  // Lift ball for collision queries: the next collision lies within
  // tau_max + max radius of the source point.
  const double reach =
      (t.horizon_certificate.pass ? t.tau_max : scan.lift_radius) + t.max_radius + 1.0;
  const int R = static_cast<int>(std::ceil(reach));
  for (int mx = -R; mx <= R; ++mx)
    for (int my = -R; my <= R; ++my)
      if (Vec2(mx, my).norm() <= reach) t.collision_lifts.emplace_back(mx, my);
  std::sort(t.collision_lifts.begin(), t.collision_lifts.end(),
            [](const Vec2& a, const Vec2& b) {
              const double na = a.norm2(), nb = b.norm2();
              if (na != nb) return na < nb;
              if (a.x != b.x) return a.x < b.x;
              return a.y < b.y;
            });
  return t;
}

}  // namespace billiard
