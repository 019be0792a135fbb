#pragma once

#include <array>

#include "billiard/geometry.hpp"

namespace billiard {

/// Post-collision state: scatterer index, arclength position on its boundary,
/// outgoing angle phi in [-pi/2, pi/2] measured from the outward normal
/// (counterclockwise positive, so increasing s with phi fixed moves
/// counterclockwise around the disk).
struct PhasePoint {
  int scatterer = 0;
  double s = 0.0;
  double phi = 0.0;
};

struct TangentVector {
  double dr = 0.0;
  double dphi = 0.0;
};

enum class ConeClass { Unstable, Stable, Neither };

struct CollisionResult {
  PhasePoint next;
  double tau = 0.0;             // flight time (= length; unit speed)
  int lift_x = 0, lift_y = 0;   // lattice translation of the disk that was hit
  double incoming_angle = 0.0;  // signed angle from -v to the arrival normal;
                                // equals next.phi (elastic reflection)
  bool tangential = false;      // arrival within graze_tol of +-pi/2
};

struct MapOptions {
  double graze_tol = 1e-8;  // radians; band around +-pi/2 treated as singular
};

/// Phase-space distance on one cylinder: s wraps around the perimeter.
double phase_distance(const Table& table, const PhasePoint& a, const PhasePoint& b);

/// Euclidean position and outgoing direction of a phase point.
Vec2 phase_position(const Table& table, const PhasePoint& x);
Vec2 phase_direction(const Table& table, const PhasePoint& x);

bool is_grazing(const PhasePoint& x, double graze_tol = 1e-8);

/// Time reversal (r, phi) -> (r, -phi); conjugates T to T^{-1}.
inline PhasePoint reversal(const PhasePoint& x) { return {x.scatterer, x.s, -x.phi}; }

/// One step of the collision map. Throws GrazingInput when x is inside the
/// graze band, NoIntersection when the ray escapes the lift search ball
/// (impossible on a certified finite-horizon table).
CollisionResult forward(const Table& table, const PhasePoint& x,
                        const MapOptions& opts = {});

/// forward() without the graze-band precondition. Pushes tangent rays, which
/// is how the grazing circles S0 are iterated when building singularity
/// curves; T extends continuously to each one-sided limit there.
CollisionResult forward_unchecked(const Table& table, const PhasePoint& x,
                                  const MapOptions& opts = {});

/// Inverse collision map, realized as reversal . forward . reversal.
CollisionResult backward(const Table& table, const PhasePoint& x,
                         const MapOptions& opts = {});

/// Derivative of the collision map at x, as a 2x2 matrix on (dr, dphi):
/// out[0] = (ds'/ds, ds'/dphi), out[1] = (dphi'/ds, dphi'/dphi).
std::array<std::array<double, 2>, 2> differential(const Table& table,
                                                  const PhasePoint& x,
                                                  const MapOptions& opts = {});

ConeClass cone_classify(const Table& table, const TangentVector& v);

}  // namespace billiard
