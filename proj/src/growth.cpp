#include "billiard/growth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <unordered_set>

#include "billiard/fit.hpp"
#include "billiard/singularity.hpp"

namespace billiard {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double wrap_ds(double ds, double per) {
  ds = std::fmod(ds, per);
  if (ds > per / 2) ds -= per;
  if (ds < -per / 2) ds += per;
  return ds;
}

// One collision step carrying the tangent vector through the derivative.
struct StepState {
  PhasePoint x;
  double dr, dphi;
};

bool step_once(const Table& table, StepState& st, double graze_tol,
               CollisionResult* out) {
  if (std::abs(st.x.phi) >= kHalfPi - graze_tol) return false;
  CollisionResult c;
  try {
    c = forward_unchecked(table, st.x);
  } catch (const Error&) {
    return false;
  }
  if (c.tangential) return false;
  const double k0 =
      1.0 / table.scatterers[static_cast<std::size_t>(st.x.scatterer)].radius;
  const double k1 =
      1.0 / table.scatterers[static_cast<std::size_t>(c.next.scatterer)].radius;
  const double c0 = std::cos(st.x.phi), c1 = std::cos(c.next.phi);
  const double f = -1.0 / c1, tau = c.tau;
  const double a00 = f * (tau * k0 + c0), a01 = f * tau;
  const double a10 = f * (tau * k0 * k1 + k0 * c1 + k1 * c0),
               a11 = f * (tau * k1 + c1);
  const double dr1 = a00 * st.dr + a01 * st.dphi;
  const double dphi1 = a10 * st.dr + a11 * st.dphi;
  st.x = c.next;
  st.dr = dr1;
  st.dphi = dphi1;
  if (out) *out = c;
  return true;
}

// Chain evaluation: symbols of label(T^j x) for j = 1..n and, on demand,
// tangent norms after each step.
struct Chain {
  std::vector<int> symbols;  // size n; -2 = undefined (grazing/dead)
  std::vector<double> norms; // size n+1 when tangents requested
  PhasePoint point_at_depth; // T^n x when the chain survived to depth n
  PhasePoint first_image{-1, 0, 0};  // T x
  bool alive = false;        // full chain (n+1 collisions) succeeded
};

Chain eval_chain(const Table& table, const Alphabet& alphabet, const PhasePoint& x0,
                 double dr0, double dphi0, int n, double graze_tol,
                 bool with_tangent) {
  Chain ch;
  ch.symbols.assign(static_cast<std::size_t>(n), -2);
  if (with_tangent) {
    ch.norms.assign(static_cast<std::size_t>(n) + 1, 0.0);
    ch.norms[0] = std::hypot(dr0, dphi0);
  }
  StepState st{x0, dr0, dphi0};
  int prev_src = -1, prev_lx = 0, prev_ly = 0;
  PhasePoint points_prev = x0;
  for (int step = 1; step <= n + 1; ++step) {
    CollisionResult c;
    StepState before = st;
    if (!step_once(table, st, graze_tol, &c)) return ch;
    if (with_tangent && step <= n)
      ch.norms[static_cast<std::size_t>(step)] = std::hypot(st.dr, st.dphi);
    if (step >= 2) {
      // Emit symbol step-1 = label of T^{step-1} x0.
      CellLabel l;
      l.scatterer = static_cast<std::int16_t>(points_prev.scatterer);
      l.in_sc = static_cast<std::int16_t>(prev_src);
      l.in_lx = static_cast<std::int16_t>(-prev_lx);
      l.in_ly = static_cast<std::int16_t>(-prev_ly);
      l.out_sc = static_cast<std::int16_t>(c.next.scatterer);
      l.out_lx = static_cast<std::int16_t>(c.lift_x);
      l.out_ly = static_cast<std::int16_t>(c.lift_y);
      ch.symbols[static_cast<std::size_t>(step - 2)] = alphabet.symbol(l);
    }
    prev_src = before.x.scatterer;
    prev_lx = c.lift_x;
    prev_ly = c.lift_y;
    points_prev = c.next;
    if (step == 1) ch.first_image = c.next;
    if (step == n) ch.point_at_depth = c.next;
  }
  ch.alive = true;
  return ch;
}

// Adaptive Simpson quadrature with an evaluation budget.
class Simpson {
 public:
  Simpson(std::function<double(double)> f, int max_evals)
      : f_(std::move(f)), budget_(max_evals) {}

  double integrate(double a, double b, double rel_tol) {
    const double fa = eval(a), fm = eval(0.5 * (a + b)), fb = eval(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return recurse(a, b, fa, fm, fb, whole, rel_tol * std::abs(whole) + 1e-300, 0);
  }

 private:
  double eval(double x) {
    --budget_;
    return f_(x);
  }
  double recurse(double a, double b, double fa, double fm, double fb, double whole,
                 double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double fml = eval(0.5 * (a + m)), fmr = eval(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * fml + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * fmr + fb);
    if (depth > 24 || budget_ <= 0 ||
        std::abs(left + right - whole) < 15.0 * eps)
      return left + right + (left + right - whole) / 15.0;
    return recurse(a, m, fa, fml, fm, left, eps / 2, depth + 1) +
           recurse(m, b, fm, fmr, fb, right, eps / 2, depth + 1);
  }
  std::function<double(double)> f_;
  int budget_;
};

}  // namespace

double CurveSegment::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i)
    len += std::hypot(nodes[i].s - nodes[i - 1].s, nodes[i].phi - nodes[i - 1].phi);
  return len;
}

PhasePoint CurveSegment::eval(double u) const {
  const double t = u * static_cast<double>(nodes.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(std::max(t, 0.0)),
                          nodes.size() - 2);
  const double f = t - static_cast<double>(i);
  const PhasePoint& a = nodes[i];
  const PhasePoint& b = nodes[i + 1];
  return {scatterer, a.s + f * (b.s - a.s), a.phi + f * (b.phi - a.phi)};
}

std::vector<int> FragmentTree::word_of(int id) const {
  std::vector<int> w;
  while (id > 0) {
    w.push_back(nodes[static_cast<std::size_t>(id)].symbol);
    id = nodes[static_cast<std::size_t>(id)].parent;
  }
  std::reverse(w.begin(), w.end());
  return w;
}

namespace {

struct ScanEval {
  double u;
  int sym;
  PhasePoint img;
  bool alive;
};

class TreeBuilder {
 public:
  TreeBuilder(const Table& table, const Alphabet& alphabet, const CurveSegment& V,
              const CurveIterationParams& params)
      : table_(table), alphabet_(alphabet), params_(params) {
    tree_.root = V;
    // Parametric derivative of the polyline at u (piecewise constant).
    nseg_ = static_cast<double>(V.nodes.size() - 1);
  }

  FragmentTree build(int n) {
    FragmentNode root;
    root.depth = 0;
    root.u0 = 0.0;
    root.u1 = 1.0;
    root.image_length = tree_.root.length();
    root.witness = tree_.root.eval(0.5);
    tree_.nodes.push_back(root);
    tree_.total_length.assign(static_cast<std::size_t>(n) + 1, 0.0);
    tree_.follower_count.assign(static_cast<std::size_t>(n) + 1, 0);
    tree_.total_length[0] = root.image_length;
    tree_.follower_count[0] = 1;
    tree_.depth = n;

    std::vector<int> level{0};
    for (int j = 0; j < n; ++j) {
      std::vector<int> next_level;
      for (int id : level) expand(id, &next_level);
      for (int id : next_level) {
        tree_.total_length[static_cast<std::size_t>(j) + 1] +=
            tree_.nodes[static_cast<std::size_t>(id)].image_length;
        ++tree_.follower_count[static_cast<std::size_t>(j) + 1];
      }
      level = std::move(next_level);
      if (level.empty()) break;
    }
    return std::move(tree_);
  }

 private:
  // Tangent of the root polyline at u, including the parametric scale.
  void root_tangent(double u, double* dr, double* dphi) const {
    const auto& nodes = tree_.root.nodes;
    const double t = u * nseg_;
    const auto i =
        std::min(static_cast<std::size_t>(std::max(t, 0.0)), nodes.size() - 2);
    *dr = (nodes[i + 1].s - nodes[i].s) * nseg_;
    *dphi = (nodes[i + 1].phi - nodes[i].phi) * nseg_;
  }

  ScanEval scan_eval(double u, int depth_next) {
    const PhasePoint x = tree_.root.eval(u);
    Chain ch = eval_chain(table_, alphabet_, x, 0, 0, depth_next,
                          params_.graze_tol, false);
    ScanEval e;
    e.u = u;
    e.sym = ch.symbols[static_cast<std::size_t>(depth_next) - 1];
    e.alive = ch.alive;
    e.img = ch.point_at_depth;
    return e;
  }

  double image_dist(const ScanEval& a, const ScanEval& b) const {
    if (!a.alive || !b.alive || a.img.scatterer != b.img.scatterer)
      return std::numeric_limits<double>::infinity();
    const double per = table_.perimeter(a.img.scatterer);
    return std::hypot(wrap_ds(b.img.s - a.img.s, per), b.img.phi - a.img.phi);
  }

  // Recursively ensures samples are dense along the image curve, then splits
  // runs of equal symbols; boundaries are bisected to param_tol.
  void scan(const ScanEval& a, const ScanEval& b, int depth_next, double h_img,
            std::vector<ScanEval>* out, int depth) {
    if (b.u - a.u < params_.param_tol || depth > 48) {
      out->push_back(b);
      return;
    }
    if (a.sym == b.sym) {
      // Equal dead markers need no geometric refinement; equal live symbols
      // are refined only until the image chord is resolved.
      if (a.sym < 0 || image_dist(a, b) < h_img) {
        out->push_back(b);
        return;
      }
    }
    ScanEval m = scan_eval(0.5 * (a.u + b.u), depth_next);
    scan(a, m, depth_next, h_img, out, depth + 1);
    scan(m, b, depth_next, h_img, out, depth + 1);
  }

  // Sum of image chords between consecutive same-symbol evals in [i0, i1).
  double chord_length(const std::vector<ScanEval>& evals, std::size_t i0,
                      std::size_t i1) const {
    double len = 0.0;
    for (std::size_t i = i0 + 1; i < i1; ++i) {
      const double d = image_dist(evals[i - 1], evals[i]);
      if (std::isfinite(d)) len += d;
    }
    return len;
  }

  void expand(int id, std::vector<int>* out_children) {
    const FragmentNode frag = tree_.nodes[static_cast<std::size_t>(id)];
    if (frag.u1 - frag.u0 < 4.0 * params_.param_tol) return;
    const int depth_next = frag.depth + 1;
    const double span = frag.u1 - frag.u0;
    const int init = std::clamp(
        static_cast<int>(frag.image_length * params_.samples_per_unit),
        params_.min_samples, params_.max_samples);
    const double h_img = 1.0 / params_.samples_per_unit;

    std::vector<ScanEval> evals;
    ScanEval first = scan_eval(frag.u0 + 1e-3 * span / init, depth_next);
    evals.push_back(first);
    ScanEval prev = first;
    for (int i = 1; i <= init; ++i) {
      const double u =
          (i == init) ? frag.u1 - 1e-3 * span / init
                      : frag.u0 + span * static_cast<double>(i) / init;
      ScanEval e = scan_eval(u, depth_next);
      scan(prev, e, depth_next, h_img, &evals, 0);
      prev = e;
    }

    // Split into runs of constant symbol.
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= evals.size(); ++i) {
      if (i < evals.size() && evals[i].sym == evals[run_start].sym) continue;
      const int sym = evals[run_start].sym;
      const double u0 = run_start == 0 ? frag.u0 : evals[run_start].u;
      const double u1 = i == evals.size() ? frag.u1 : evals[i - 1].u;
      if (sym >= 0 && u1 > u0) {
        if (tree_.nodes.size() > params_.max_fragments)
          throw RefinementBudgetExceeded("iterate_curve_tree: fragment budget");
        FragmentNode child;
        child.parent = id;
        child.symbol = sym;
        child.depth = depth_next;
        child.u0 = u0;
        child.u1 = u1;
        child.image_length = params_.quadrature_lengths
                                 ? fragment_length(u0, u1, depth_next)
                                 : chord_length(evals, run_start, i);
        Chain mid = eval_chain(table_, alphabet_, tree_.root.eval(0.5 * (u0 + u1)),
                               0, 0, depth_next, params_.graze_tol, false);
        child.witness = mid.alive ? mid.point_at_depth : PhasePoint{-1, 0, 0};
        child.entry = mid.first_image;
        const int cid = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back(child);
        // Maintain child links in interval order.
        auto& parent = tree_.nodes[static_cast<std::size_t>(id)];
        if (parent.first_child < 0) {
          parent.first_child = cid;
        } else {
          int c = parent.first_child;
          while (tree_.nodes[static_cast<std::size_t>(c)].next_sibling >= 0)
            c = tree_.nodes[static_cast<std::size_t>(c)].next_sibling;
          tree_.nodes[static_cast<std::size_t>(c)].next_sibling = cid;
        }
        out_children->push_back(cid);
      } else if (sym == -1) {
        ++tree_.unknown_labels;
      }
      run_start = i;
    }
  }

  double fragment_length(double u0, double u1, int depth) {
    auto f = [&](double u) -> double {
      double dr, dphi;
      root_tangent(u, &dr, &dphi);
      Chain ch = eval_chain(table_, alphabet_, tree_.root.eval(u), dr, dphi, depth,
                            params_.graze_tol, true);
      return ch.norms.size() > static_cast<std::size_t>(depth)
                 ? ch.norms[static_cast<std::size_t>(depth)]
                 : 0.0;
    };
    // Nudge off the singular endpoints.
    const double eps = std::max((u1 - u0) * 1e-9, 1e-15);
    Simpson q(f, params_.quad_max_evals);
    return q.integrate(u0 + eps, u1 - eps, params_.quad_rel_tol);
  }

  const Table& table_;
  const Alphabet& alphabet_;
  CurveIterationParams params_;
  FragmentTree tree_;
  double nseg_ = 1.0;
};

}  // namespace

FragmentTree iterate_curve_tree(const Table& table, const Alphabet& alphabet,
                                const CurveSegment& V, int n,
                                const CurveIterationParams& params) {
  if (V.nodes.size() < 2 || V.length() <= 0.0)
    throw BadConfig("iterate_curve_tree: degenerate curve");
  TreeBuilder builder(table, alphabet, V, params);
  return builder.build(n);
}

FragmentationRecord fragmentation_record(const FragmentTree& tree, int n) {
  FragmentationRecord rec;
  rec.n = n;
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const FragmentNode& f = tree.nodes[id];
    if (f.depth != n) continue;
    rec.components.emplace_back(tree.word_of(static_cast<int>(id)), f.image_length);
    rec.total += f.image_length;
  }
  return rec;
}

GoodBadUgly classify(const FragmentTree& tree, int n, double delta) {
  GoodBadUgly out;
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const FragmentNode& f = tree.nodes[id];
    if (f.depth != n) continue;
    const bool good = f.image_length >= delta;
    good ? ++out.good : ++out.bad;
    // Ugly: every proper prefix is bad.
    bool ugly = true;
    bool has_good_prefix = false;
    for (int p = f.parent; p > 0; p = tree.nodes[static_cast<std::size_t>(p)].parent) {
      if (tree.nodes[static_cast<std::size_t>(p)].image_length >= delta) {
        ugly = false;
        has_good_prefix = true;
        break;
      }
    }
    if (n == 1) ugly = true;  // no proper prefixes: vacuous condition
    if (ugly) ++out.ugly;
    // Decomposition: a non-ugly word must have a good proper prefix.
    if (!ugly && !has_good_prefix) out.decomposition_ok = false;
  }
  return out;
}

GrowthSeries growth_ratio(const FragmentTree& tree, double h_est, int n1,
                          int n_max) {
  GrowthSeries gs;
  gs.n1 = n1;
  n_max = std::min(n_max, tree.depth);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double len = tree.total_length[static_cast<std::size_t>(n)];
    gs.tn_length.push_back(len);
    const double r = len * std::exp(-h_est * n);
    gs.ratio.push_back(r);
    if (n >= n1) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  gs.q_hat = (lo > 0 && hi > 0) ? std::sqrt(hi / lo) : 0.0;
  return gs;
}

std::optional<CurveSegment> make_u_segment(const Table& table,
                                           const Alphabet& alphabet,
                                           const PhasePoint& x, double half_len) {
  int sym;
  try {
    sym = alphabet.locate(table, x);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (sym < 0) return std::nullopt;
  const double slope =
      1.0 / table.scatterers[static_cast<std::size_t>(x.scatterer)].radius + 1.0;
  const double inv = 1.0 / std::hypot(1.0, slope);
  const Vec2 dir{inv, slope * inv};  // unit speed in the (r, phi) metric

  // Largest step in each direction keeping the same cell, found by bisection.
  auto probe = [&](double t) {
    PhasePoint p{x.scatterer, x.s + t * dir.x, x.phi + t * dir.y};
    if (std::abs(p.phi) >= kHalfPi - 1e-6) return false;
    try {
      return alphabet.locate(table, p) == sym;
    } catch (const Error&) {
      return false;
    }
  };
  double span[2] = {0.0, 0.0};
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? -1.0 : 1.0;
    double lo = 0.0, hi = half_len;
    if (probe(sign * hi)) {
      span[side] = hi;
      continue;
    }
    for (int i = 0; i < 40; ++i) {
      const double mid = 0.5 * (lo + hi);
      (probe(sign * mid) ? lo : hi) = mid;
    }
    span[side] = lo * 0.98;
  }
  if (span[0] + span[1] < 1e-9) return std::nullopt;
  CurveSegment seg;
  seg.scatterer = x.scatterer;
  seg.nodes.push_back({x.scatterer, x.s - span[0] * dir.x, x.phi - span[0] * dir.y});
  seg.nodes.push_back({x.scatterer, x.s + span[1] * dir.x, x.phi + span[1] * dir.y});
  return seg;
}

std::vector<CurveSegment> u_curve_grid(const Table& table, double spacing) {
  std::vector<CurveSegment> grid;
  const double phi_max = kHalfPi - 1e-9;
  for (int i = 0; i < static_cast<int>(table.scatterers.size()); ++i) {
    const double per = table.perimeter(i);
    const double slope = 1.0 / table.scatterers[static_cast<std::size_t>(i)].radius + 1.0;
    const double ds = 2.0 * phi_max / slope;  // s travel over the full height
    const int count = std::max(1, static_cast<int>(std::ceil(per / spacing)));
    for (int k = 0; k < count; ++k) {
      const double s0 = per * k / count;
      CurveSegment seg;
      seg.scatterer = i;
      seg.nodes.push_back({i, s0, -phi_max});
      seg.nodes.push_back({i, s0 + ds, phi_max});
      grid.push_back(std::move(seg));
    }
  }
  return grid;
}

std::vector<CurveSegment> build_curve_bank(const Table& table,
                                           const Alphabet& alphabet, double delta,
                                           int extra_random,
                                           std::uint64_t rng_seed) {
  std::vector<CurveSegment> bank;
  // S_1 component curves restricted to cells.
  PropagateParams pp;
  std::vector<SingularCurve> s1 = propagate_singularity(table, 1, pp, false);
  for (const SingularCurve& c : s1) {
    CurveSegment whole;
    whole.scatterer = c.scatterer;
    whole.nodes = c.nodes;
    // Split at cell boundaries by scanning the polyline.
    const int m = std::max(64, static_cast<int>(whole.nodes.size()));
    int cur_sym = -3;
    double run_a = 0.0;
    auto flush = [&](double a, double b) {
      if (cur_sym < 0 || b - a < 1e-6) return;
      CurveSegment seg;
      seg.scatterer = whole.scatterer;
      const int nn = 32;
      for (int i = 0; i <= nn; ++i)
        seg.nodes.push_back(whole.eval(a + (b - a) * i / nn));
      if (seg.length() > 1e-7) bank.push_back(std::move(seg));
    };
    for (int i = 0; i <= m; ++i) {
      const double u = static_cast<double>(i) / m;
      int sym = -3;
      try {
        sym = alphabet.locate(table, whole.eval(u));
      } catch (const Error&) {
      }
      if (sym != cur_sym) {
        flush(run_a, static_cast<double>(i - 1) / m);
        cur_sym = sym;
        run_a = u;
      }
    }
    flush(run_a, 1.0);
  }
  // Random u-curves of length >= delta.
  std::mt19937_64 rng(rng_seed);
  int made = 0, attempts = 0;
  while (made < extra_random && attempts < extra_random * 200) {
    ++attempts;
    std::uniform_int_distribution<int> pick(
        0, static_cast<int>(table.scatterers.size()) - 1);
    const int i = pick(rng);
    std::uniform_real_distribution<double> us(0.0, table.perimeter(i));
    std::uniform_real_distribution<double> uphi(-1.2, 1.2);
    auto seg = make_u_segment(table, alphabet, {i, us(rng), uphi(rng)},
                              delta * 0.75);
    if (seg && seg->length() >= delta) {
      bank.push_back(*seg);
      ++made;
    }
  }
  return bank;
}

AuditReport counting_audit(const Table& table, const Alphabet& alphabet,
                           const LanguageTrie& trie,
                           const std::vector<CurveSegment>& bank, double delta,
                           double h_est, int depth,
                           const CurveIterationParams& params,
                           std::vector<FragmentTree>* trees_out) {
  AuditReport rep;
  rep.delta = delta;
  rep.depth = depth;
  rep.rho = delta;
  const auto counts = trie.level_counts();
  const int nmax = std::min<int>(depth, trie.depth());

  std::vector<FragmentTree> trees;
  for (const CurveSegment& V : bank)
    trees.push_back(iterate_curve_tree(table, alphabet, V, nmax, params));

  // Expansion fit (Lemma s-contr): pooled regression of log(|T^n V|/|V|) on n.
  {
    std::vector<double> xs, ys;
    for (const auto& t : trees) {
      const double v0 = t.total_length[0];
      for (int n = 1; n <= nmax; ++n) {
        const double r = t.total_length[static_cast<std::size_t>(n)] / v0;
        if (r > 0) {
          xs.push_back(n);
          ys.push_back(std::log(r));
        }
      }
    }
    LinFit fit = linear_fit(xs, ys);
    rep.lambda = fit.slope;
    double c2 = 0.0;
    for (const auto& t : trees) {
      const double v0 = t.total_length[0];
      for (int n = 1; n <= nmax; ++n) {
        const double tn = t.total_length[static_cast<std::size_t>(n)];
        if (tn > 0) c2 = std::max(c2, v0 * std::exp(rep.lambda * n) / tn);
      }
    }
    rep.c2 = c2;
  }

  // Average-length two-regime fit. The plateau b1 comes from long curves at
  // late times; the growth regime (b2, gamma) from short probe curves.
  {
    double b1 = std::numeric_limits<double>::infinity();
    for (const auto& t : trees) {
      if (t.total_length[0] < delta) continue;
      for (int n = (nmax + 1) / 2; n <= nmax; ++n) {
        if (t.follower_count[static_cast<std::size_t>(n)] == 0) continue;
        b1 = std::min(b1, t.total_length[static_cast<std::size_t>(n)] /
                              static_cast<double>(
                                  t.follower_count[static_cast<std::size_t>(n)]));
      }
    }
    rep.b1 = std::isfinite(b1) ? b1 : 0.0;

    // Short probes for the pre-plateau regime.
    std::vector<double> xs, ys;
    std::mt19937_64 rng(987654321u);
    int made = 0, attempts = 0;
    while (made < 8 && attempts < 4000) {
      ++attempts;
      std::uniform_int_distribution<int> pick(
          0, static_cast<int>(table.scatterers.size()) - 1);
      const int i = pick(rng);
      std::uniform_real_distribution<double> us(0.0, table.perimeter(i));
      std::uniform_real_distribution<double> uphi(-1.1, 1.1);
      auto seg =
          make_u_segment(table, alphabet, {i, us(rng), uphi(rng)}, delta / 8);
      if (!seg || seg->length() < delta / 16) continue;
      ++made;
      FragmentTree t = iterate_curve_tree(table, alphabet, *seg, nmax, params);
      const double v0 = t.total_length[0];
      for (int n = 1; n <= nmax; ++n) {
        if (t.follower_count[static_cast<std::size_t>(n)] == 0) continue;
        const double avg = t.total_length[static_cast<std::size_t>(n)] /
                           static_cast<double>(
                               t.follower_count[static_cast<std::size_t>(n)]);
        if (avg < 0.5 * rep.b1 && avg > 0) {
          xs.push_back(n);
          ys.push_back(std::log(avg / v0));
        }
      }
    }
    LinFit fit = linear_fit(xs, ys);
    rep.gamma = fit.slope > 0 ? fit.slope : rep.lambda / 2;
    rep.b2 = xs.empty() ? rep.b1 / delta : std::exp(fit.intercept);
    const double target = rep.b1 / (rep.b2 * delta);
    rep.n1 = target > 1.0 && rep.gamma > 0
                 ? static_cast<int>(std::ceil(std::log(target) / rep.gamma))
                 : 1;
    rep.n1 = std::clamp(rep.n1, 1, std::max(1, nmax - 2));
  }

  // Follower lower bound and good-word dominance over the bank.
  {
    double b0 = std::numeric_limits<double>::infinity();
    double b3 = std::numeric_limits<double>::infinity();
    for (const auto& t : trees) {
      if (t.total_length[0] < delta) continue;
      for (int n = 1; n <= nmax; ++n) {
        if (counts[static_cast<std::size_t>(n)] == 0) continue;
        const double lv =
            static_cast<double>(t.follower_count[static_cast<std::size_t>(n)]);
        b0 = std::min(b0, lv / static_cast<double>(counts[static_cast<std::size_t>(n)]));
        if (n >= rep.n1 && lv > 0) {
          GoodBadUgly gbu = classify(t, n, delta);
          b3 = std::min(b3, static_cast<double>(gbu.good) / lv);
        }
      }
    }
    rep.b0 = std::isfinite(b0) ? b0 : 0.0;
    rep.b3 = std::isfinite(b3) ? b3 : 0.0;
  }

  // Cell-level good words: union over the bank of final images >= delta.
  {
    double c8 = 0.0;
    for (int n = 1; n <= nmax; ++n) {
      std::unordered_set<int> good_nodes;
      for (const auto& t : trees)
        for (std::size_t id = 0; id < t.nodes.size(); ++id) {
          const FragmentNode& f = t.nodes[id];
          if (f.depth != n || f.image_length < delta) continue;
          const auto w = t.word_of(static_cast<int>(id));
          const int node = trie.find(w);
          if (node >= 0) good_nodes.insert(node);
        }
      const auto good = static_cast<double>(good_nodes.size());
      if (good == 0) continue;
      const double bad = static_cast<double>(counts[static_cast<std::size_t>(n)]) - good;
      c8 = std::max(c8, bad / good);
    }
    rep.c8 = c8;
  }

  // Trie-level counting bounds.
  {
    double b5 = std::numeric_limits<double>::infinity();
    for (int k = 1; k < nmax; ++k)
      for (int n = 1; k + n <= nmax; ++n) {
        const double denom = static_cast<double>(counts[static_cast<std::size_t>(k)]) *
                             static_cast<double>(counts[static_cast<std::size_t>(n)]);
        if (denom > 0)
          b5 = std::min(b5,
                        static_cast<double>(counts[static_cast<std::size_t>(k + n)]) /
                            denom);
      }
    rep.b5 = std::isfinite(b5) ? b5 : 0.0;
    double c4 = 0.0, lcb = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= nmax; ++n) {
      const double v = static_cast<double>(counts[static_cast<std::size_t>(n)]) *
                       std::exp(-h_est * n);
      c4 = std::max(c4, v);
      lcb = std::min(lcb, v);
    }
    rep.c4 = c4;
    rep.lcb_min = lcb;
  }

  // Tempered fragmentation at rho = delta, alpha = 3h/4, and grow-cut.
  {
    const double alpha = 0.75 * h_est;
    const double gamma_gc = rep.lambda > 0 ? rep.lambda / 2 : 0.0;
    double c5 = 0.0, c6 = 0.0;
    for (const auto& t : trees) {
      const double v0 = t.total_length[0];
      for (int n = 1; n <= nmax; ++n) {
        GoodBadUgly gbu = classify(t, n, rep.rho);
        c5 = std::max(c5, static_cast<double>(gbu.ugly) * std::exp(-alpha * n));
        const double tn = t.total_length[static_cast<std::size_t>(n)];
        if (tn > 0 && gamma_gc > 0)
          c6 = std::max(c6, static_cast<double>(gbu.ugly) *
                                std::exp(gamma_gc * n) * v0 / tn);
      }
    }
    rep.c5 = c5;
    rep.c6 = c6;
  }

  if (trees_out) *trees_out = std::move(trees);
  return rep;
}

}  // namespace billiard
