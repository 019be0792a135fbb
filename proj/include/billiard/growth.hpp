#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "billiard/alphabet.hpp"
#include "billiard/trie.hpp"

namespace billiard {

/// Piecewise-linear admissible u-curve inside one phase cylinder. Nodes carry
/// unwrapped s. `history` is the word coded so far (empty for fresh curves).
struct CurveSegment {
  int scatterer = 0;
  std::vector<PhasePoint> nodes;
  std::vector<int> history;

  double length() const;
  PhasePoint eval(double u) const;  // u in [0,1], piecewise linear
};

struct CurveIterationParams {
  double param_tol = 1e-11;       // breakpoint bisection resolution
  double quad_rel_tol = 1e-8;     // adaptive quadrature target per fragment
  int quad_max_evals = 256;       // cap per fragment
  std::size_t max_fragments = 8'000'000;
  double samples_per_unit = 400;  // child scan density along the image curve
  int min_samples = 8;
  int max_samples = 4000;
  double graze_tol = 1e-8;
  // When off, fragment lengths are chord sums from the child scan instead of
  // cocycle quadrature (an enumeration-speed mode; counts are unaffected).
  bool quadrature_lengths = true;
};

/// Follower decomposition of a u-curve, kept as a tree: a node at depth j is
/// the subcurve V_w for a word w of length j, with its parameter interval on
/// V and the length of the final image T^j V_w.
struct FragmentNode {
  std::int32_t parent = -1;
  std::int32_t first_child = -1;
  std::int32_t next_sibling = -1;
  std::int32_t symbol = -1;   // appended at this depth
  std::int32_t depth = 0;
  double u0 = 0.0, u1 = 1.0;  // interval on the root curve
  double image_length = 0.0;  // |T^depth V_w|
  PhasePoint witness;         // T^depth of the midpoint parameter
  PhasePoint entry;           // T of the midpoint: a point of Y_w^+
};

struct FragmentTree {
  CurveSegment root;
  std::vector<FragmentNode> nodes;           // nodes[0] = whole curve at depth 0
  std::vector<double> total_length;          // |T^n V|, n = 0..depth
  std::vector<std::int64_t> follower_count;  // #L_n^V, n = 0..depth
  int depth = 0;
  std::uint64_t unknown_labels = 0;  // followers dropped: label not in alphabet

  std::vector<int> word_of(int id) const;
};

/// Iterates V for n steps with fragmentation bookkeeping. Lengths of the
/// image fragments are computed by adaptive quadrature of the derivative
/// cocycle along the base curve.
FragmentTree iterate_curve_tree(const Table& table, const Alphabet& alphabet,
                                const CurveSegment& V, int n,
                                const CurveIterationParams& params = {});

/// Per-depth record of (word, image length) pairs; the spec's
/// FragmentationRecord for one curve at one depth.
struct FragmentationRecord {
  int n = 0;
  std::vector<std::pair<std::vector<int>, double>> components;
  double total = 0.0;
};
FragmentationRecord fragmentation_record(const FragmentTree& tree, int n);

struct GoodBadUgly {
  std::int64_t good = 0, bad = 0, ugly = 0;
  bool decomposition_ok = true;  // every non-ugly word has a good prefix
};

/// Good/bad/ugly counts at depth n for threshold delta (Eqs. good-bad, ugly):
/// good = final image >= delta; ugly = every proper prefix bad.
GoodBadUgly classify(const FragmentTree& tree, int n, double delta);

struct GrowthSeries {
  std::vector<double> tn_length;  // |T^n V|
  std::vector<double> ratio;      // |T^n V| e^{-n h}
  double q_hat = 0.0;             // sqrt(max/min of ratio over [n1, n_max])
  int n1 = 1;
};
GrowthSeries growth_ratio(const FragmentTree& tree, double h_est, int n1, int n_max);

/// Straight u-curve of half-width `half_len` (in the (r,phi) metric) centered
/// at x, truncated to stay inside one cell. Returns nullopt when the cell is
/// too small around x. The slope is curvature + 1, inside the unstable cone
/// but far from its near-vertical upper edge.
std::optional<CurveSegment> make_u_segment(const Table& table,
                                           const Alphabet& alphabet,
                                           const PhasePoint& x, double half_len);

/// Full-height straight u-curves tiling each cylinder at arclength spacing
/// `spacing`; the systematic probes for language enumeration.
std::vector<CurveSegment> u_curve_grid(const Table& table, double spacing);

/// Curve bank for the audits: the curves of S_1 restricted to cells (the set
/// S_1^1), plus `extra_random` straight u-curves with |V| >= delta seeded from
/// a deterministic RNG.
std::vector<CurveSegment> build_curve_bank(const Table& table,
                                           const Alphabet& alphabet, double delta,
                                           int extra_random, std::uint64_t rng_seed);

struct AuditReport {
  // Follower lower bound (Prop. LV-geq-L): min over bank of #L_n^V / #L_n.
  double b0 = 0.0;
  // Average length two-regime fit (Prop. average-length).
  double b1 = 0.0, b2 = 0.0, gamma = 0.0;
  int n1 = 1;  // smallest n with b2 e^{gamma n} delta >= b1
  // Good-word dominance (Prop. control-bad): min over bank, n >= n1.
  double b3 = 0.0;
  // Cell-level comparison (Prop. Bn-Gn): max over n of #B / #G.
  double c8 = 0.0;
  // Quasisupermultiplicativity (Prop. qsm): min over (k,n) of
  // #L_{k+n} / (#L_k #L_n).
  double b5 = 0.0;
  // Global upper bound (Prop. ucb): sup_n #L_n e^{-n h}.
  double c4 = 0.0;
  // Lower counting bound (Eq. lcb): min_n #L_n e^{-n h} (>= 1 iff lcb holds).
  double lcb_min = 0.0;
  // Uniform expansion fit (Lemma s-contr): |V| <= C2 e^{-lambda n} |T^n V|.
  double lambda = 0.0, c2 = 0.0;
  // Slow fragmentation (Lemma tempered) at rho: sup_n #U_n e^{-3hn/4}.
  double c5 = 0.0;
  double rho = 0.0;
  // Expansion-fragmentation (Lemma grow-cut): #U_n <= C6 e^{-gamma n}|T^nV|/|V|.
  double c6 = 0.0;
  double delta = 0.0;
  int depth = 0;
};

/// Runs the counting bounds of the paper's growth analysis over a curve bank
/// and an enumerated trie, reporting fitted constants.
AuditReport counting_audit(const Table& table, const Alphabet& alphabet,
                           const LanguageTrie& trie,
                           const std::vector<CurveSegment>& bank, double delta,
                           double h_est, int depth,
                           const CurveIterationParams& params = {},
                           std::vector<FragmentTree>* trees_out = nullptr);

}  // namespace billiard
