#pragma once

#include <vector>

#include "billiard/billiard_map.hpp"

namespace billiard {

/// One component curve of T^k S0 (order k > 0, a u-curve), of T^{-k} S0
/// (order k < 0, an s-curve), or one grazing circle of S0 (order 0).
/// Nodes live on a single cylinder; s values are stored unwrapped (the
/// parametrization functions are periodic, so out-of-range s is harmless).
struct SingularCurve {
  int order = 0;
  int scatterer = 0;
  std::vector<PhasePoint> nodes;
  int parent = -1;        // index into the previous generation, -1 for order 0
  int s0_component = -1;  // grazing circle it descends from (2 per scatterer)

  double length() const;  // polyline arclength in the (r, phi) metric
  const PhasePoint& front() const { return nodes.front(); }
  const PhasePoint& back() const { return nodes.back(); }
};

struct PropagateParams {
  double curve_tol = 1e-7;       // chord-to-curve deviation target
  double param_tol = 1e-12;      // parameter resolution for breakpoints
  double jump_tol = 1e-4;        // image gap treated as a discontinuity
  std::size_t max_nodes = 4000000;  // global node budget per call
  int init_samples = 64;         // initial subdivision per source curve
};

/// The 2D grazing circles phi = +-pi/2, two per scatterer.
std::vector<SingularCurve> s0_components(const Table& table);

/// Component curves of orders 1..k (images of S0 under T, fragmented at each
/// preimage of S0). Mirrored orders -1..-k are obtained via time reversal
/// when with_mirror is set. Throws RefinementBudgetExceeded past max_nodes.
std::vector<SingularCurve> propagate_singularity(const Table& table, int k,
                                                 const PropagateParams& params = {},
                                                 bool with_mirror = true);

struct MultiplicityStats {
  // max_multiplicity[k-1]: most curves of S_{-k} (orders 0..k) meeting at one
  // sampled intersection point, for k = 1..n.
  std::vector<int> max_multiplicity;
  double fitted_K = 0.0;  // least-squares slope of max_multiplicity vs k
};

MultiplicityStats multiplicity_stats(const Table& table, int n,
                                     double snap_tol = 1e-7,
                                     const PropagateParams& params = {});

/// All intersection points among the given curves (pairwise, clustered within
/// snap_tol), with the number of distinct curves at each cluster.
struct IntersectionCluster {
  PhasePoint at;
  int curves = 0;
};
std::vector<IntersectionCluster> intersect_curves(
    const Table& table, const std::vector<SingularCurve>& curves, double snap_tol);

}  // namespace billiard
