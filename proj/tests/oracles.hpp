#pragma once

// Independent test oracles. These deliberately avoid the library's collision
// path: the tracer below marches in position space using distance functions
// only, so agreement with billiard::forward is a genuine cross-check.

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "billiard/billiard_map.hpp"
#include "billiard/geometry.hpp"

namespace oracle {

using billiard::PhasePoint;
using billiard::Table;
using billiard::Vec2;

// Distance from p to the closest lifted disk surface (positive outside).
inline double surface_distance(const Table& table, const Vec2& p, int skip, int* which,
                               int* lx, int* ly) {
  double best = std::numeric_limits<double>::infinity();
  const int R = 8;
  for (int mx = -R; mx <= R; ++mx) {
    for (int my = -R; my <= R; ++my) {
      for (std::size_t j = 0; j < table.scatterers.size(); ++j) {
        if (skip == static_cast<int>(j) && mx == 0 && my == 0) continue;
        const auto& sc = table.scatterers[j];
        const Vec2 c{sc.center.x + mx, sc.center.y + my};
        const double d = (p - c).norm() - sc.radius;
        if (d < best) {
          best = d;
          if (which) *which = static_cast<int>(j);
          if (lx) *lx = mx;
          if (ly) *ly = my;
        }
      }
    }
  }
  return best;
}

// Sphere-tracing collision oracle: march along the ray by the free distance
// until the surface is reached, then refine by bisection on the signed
// distance of the nearest disk.
inline bool trace(const Table& table, const PhasePoint& x, PhasePoint* out,
                  double* tau_out = nullptr) {
  Vec2 p = billiard::phase_position(table, x);
  const Vec2 v = billiard::phase_direction(table, x);
  double t = 0.0;
  int which = -1, lx = 0, ly = 0;
  for (int iter = 0; iter < 100000; ++iter) {
    const double d = surface_distance(table, p + t * v, x.scatterer, &which, &lx, &ly);
    if (d < 1e-13) break;
    t += std::max(d, 1e-14) * 0.999999;
    if (t > 50.0) return false;
  }
  // Polish against the identified disk.
  const auto& sc = table.scatterers[static_cast<std::size_t>(which)];
  const Vec2 c{sc.center.x + lx, sc.center.y + ly};
  auto dist = [&](double tt) { return ((p + tt * v) - c).norm() - sc.radius; };
  double hi = t, lo = t - 1e-3;
  while (dist(lo) < 0.0) lo -= 1e-3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dist(mid) > 0.0 ? lo : hi) = mid;
  }
  t = 0.5 * (lo + hi);
  const Vec2 q = p + t * v;
  const Vec2 n = (q - c).normalized();
  double theta = std::atan2(n.y, n.x);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  out->scatterer = which;
  out->s = theta * sc.radius;
  out->phi = billiard::signed_angle(-v, n);
  if (tau_out) *tau_out = t;
  return true;
}

// Uniform random non-grazing phase point, rejecting the graze band.
template <class Rng>
PhasePoint random_point(const Table& table, Rng& rng, double phi_cap = 1.45) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(table.scatterers.size()) - 1);
  const int i = pick(rng);
  std::uniform_real_distribution<double> us(0.0, table.perimeter(i));
  std::uniform_real_distribution<double> uphi(-phi_cap, phi_cap);
  return {i, us(rng), uphi(rng)};
}

// Reference two-disk table used across the test suite; the acceptance suite
// certifies its horizon before relying on it.
inline std::vector<billiard::ScattererSpec> reference_specs() {
  return {{{0.0, 0.0}, 0.42}, {{0.5, 0.5}, 0.28}};
}

inline Table reference_table(double angular_step = 2e-3, double offset_step = 2e-3) {
  billiard::HorizonScanParams scan;
  scan.angular_step = angular_step;
  scan.offset_step = offset_step;
  return billiard::validate_table(reference_specs(), scan);
}

}  // namespace oracle
