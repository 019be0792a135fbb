#include "billiard/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <unordered_map>

namespace billiard {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double wrap_ds(double ds, double per) {
  ds = std::fmod(ds, per);
  if (ds > per / 2) ds -= per;
  if (ds < -per / 2) ds += per;
  return ds;
}

struct Push {
  bool ok = false;
  int sc = -1, lx = 0, ly = 0;
  PhasePoint image;

  bool same_target(const Push& o) const {
    return ok && o.ok && sc == o.sc && lx == o.lx && ly == o.ly;
  }
};

struct Eval {
  double u = 0.0;
  Push p;
};

// Collects nodes of one image curve at a time; breaks start a fresh curve.
struct Sink {
  const Table* table;
  std::vector<SingularCurve>* out;
  int order, parent, s0c;
  SingularCurve cur;
  bool open = false;
  std::size_t* nodes_used;

  void start(const PhasePoint& first) {
    cur = SingularCurve{};
    cur.order = order;
    cur.parent = parent;
    cur.s0_component = s0c;
    cur.scatterer = first.scatterer;
    cur.nodes.push_back(first);
    open = true;
  }
  void add(const PhasePoint& p) {
    if (!open) {
      start(p);
      return;
    }
    // Unwrap s relative to the previous node.
    const double per = table->perimeter(p.scatterer);
    PhasePoint q = p;
    const PhasePoint& prev = cur.nodes.back();
    double prev_wrapped = std::fmod(prev.s, per);
    if (prev_wrapped < 0) prev_wrapped += per;
    q.s = prev.s + wrap_ds(p.s - prev_wrapped, per);
    if (std::abs(q.s - prev.s) + std::abs(q.phi - prev.phi) < 1e-15) return;
    cur.nodes.push_back(q);
    ++*nodes_used;
  }
  void finish() {
    if (open && cur.nodes.size() >= 2 && cur.length() > 0.0) out->push_back(cur);
    open = false;
  }
};

class Propagator {
 public:
  Propagator(const Table& table, const PropagateParams& params)
      : table_(table), params_(params) {}

  // Applies T with fragmentation to one source curve (exact circle for order
  // 0, polyline otherwise), appending image curves to `out`.
  void map_curve(const SingularCurve& src, int parent_index,
                 std::vector<SingularCurve>* out) {
    eval_ = [&](double u) { return evaluate(src, u); };
    Sink sink{&table_, out, std::abs(src.order) + 1, parent_index,
              src.s0_component, SingularCurve{}, false, &nodes_used_};

    const int n0 = params_.init_samples;
    Eval prev{0.0, push(eval_(0.0))};
    if (prev.p.ok) sink.start(prev.p.image);
    for (int j = 1; j <= n0; ++j) {
      Eval next{static_cast<double>(j) / n0, {}};
      next.p = push(eval_(next.u));
      refine(prev, next, sink, 0);
      prev = next;
    }
    sink.finish();
  }

  Push push(const PhasePoint& x) const {
    Push r;
    try {
      CollisionResult c = forward_unchecked(table_, x);
      r.ok = true;
      r.sc = c.next.scatterer;
      r.lx = c.lift_x;
      r.ly = c.lift_y;
      r.image = c.next;
    } catch (const Error&) {
      r.ok = false;
    }
    return r;
  }

 private:
  PhasePoint evaluate(const SingularCurve& src, double u) const {
    if (src.order == 0) {
      // Exact grazing circle.
      const double per = table_.perimeter(src.scatterer);
      return {src.scatterer, u * per, src.nodes.front().phi};
    }
    const double t = u * static_cast<double>(src.nodes.size() - 1);
    const auto i =
        std::min(static_cast<std::size_t>(t), src.nodes.size() - 2);
    const double f = t - static_cast<double>(i);
    const PhasePoint& a = src.nodes[i];
    const PhasePoint& b = src.nodes[i + 1];
    return {src.scatterer, a.s + f * (b.s - a.s), a.phi + f * (b.phi - a.phi)};
  }

  double image_gap(const Push& a, const Push& b) const {
    if (!a.same_target(b)) return std::numeric_limits<double>::infinity();
    const double per = table_.perimeter(a.image.scatterer);
    return std::hypot(wrap_ds(b.image.s - a.image.s, per), b.image.phi - a.image.phi);
  }

  // Chord deviation of the midpoint image from the segment [a, b].
  double deviation(const Push& a, const Push& m, const Push& b) const {
    const double per = table_.perimeter(a.image.scatterer);
    const double bx = wrap_ds(b.image.s - a.image.s, per);
    const double by = b.image.phi - a.image.phi;
    const double mx = wrap_ds(m.image.s - a.image.s, per);
    const double my = m.image.phi - a.image.phi;
    const double len2 = bx * bx + by * by;
    if (len2 == 0.0) return std::hypot(mx, my);
    const double t = std::clamp((mx * bx + my * by) / len2, 0.0, 1.0);
    return std::hypot(mx - t * bx, my - t * by);
  }

  void refine(const Eval& a, const Eval& b, Sink& sink, int depth) {
    if (nodes_used_ > params_.max_nodes)
      throw RefinementBudgetExceeded("propagate_singularity: node budget");
    if (!a.p.ok && !b.p.ok) {
      sink.finish();
      return;
    }
    const bool same = a.p.same_target(b.p);
    if (b.u - a.u < params_.param_tol || depth > 52) {
      // Cannot split further: either a clean continuation or a breakpoint.
      if (same && image_gap(a.p, b.p) < params_.jump_tol) {
        sink.add(b.p.image);
      } else {
        sink.finish();
        if (b.p.ok) sink.start(b.p.image);
      }
      return;
    }
    Eval m{0.5 * (a.u + b.u), {}};
    m.p = push(eval_(m.u));
    if (same && m.p.same_target(a.p)) {
      const double dev = deviation(a.p, m.p, b.p);
      if (dev < params_.curve_tol && image_gap(a.p, m.p) < params_.jump_tol &&
          image_gap(m.p, b.p) < params_.jump_tol) {
        sink.add(m.p.image);
        sink.add(b.p.image);
        return;
      }
    }
    refine(a, m, sink, depth + 1);
    refine(m, b, sink, depth + 1);
  }

  const Table& table_;
  PropagateParams params_;
  std::function<PhasePoint(double)> eval_;
  std::size_t nodes_used_ = 0;
};

}  // namespace

double SingularCurve::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i)
    len += std::hypot(nodes[i].s - nodes[i - 1].s, nodes[i].phi - nodes[i - 1].phi);
  return len;
}

std::vector<SingularCurve> s0_components(const Table& table) {
  std::vector<SingularCurve> out;
  const int D = static_cast<int>(table.scatterers.size());
  for (int i = 0; i < D; ++i) {
    for (int sign = 0; sign < 2; ++sign) {
      SingularCurve c;
      c.order = 0;
      c.scatterer = i;
      c.s0_component = 2 * i + sign;
      const double phi = sign == 0 ? kHalfPi : -kHalfPi;
      const double per = table.perimeter(i);
      const int n = 256;
      for (int j = 0; j <= n; ++j)
        c.nodes.push_back({i, per * j / n, phi});
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<SingularCurve> propagate_singularity(const Table& table, int k,
                                                 const PropagateParams& params,
                                                 bool with_mirror) {
  if (k < 1) throw BadConfig("propagate_singularity: k must be >= 1");
  std::vector<SingularCurve> result;
  Propagator prop(table, params);

  std::vector<SingularCurve> prev = s0_components(table);
  std::vector<int> prev_index(prev.size(), -1);  // index into `result`
  for (int order = 1; order <= k; ++order) {
    std::vector<SingularCurve> gen;
    for (std::size_t c = 0; c < prev.size(); ++c)
      prop.map_curve(prev[c], prev_index[c], &gen);
    prev_index.clear();
    for (auto& curve : gen) {
      result.push_back(curve);
      prev_index.push_back(static_cast<int>(result.size()) - 1);
    }
    prev = std::move(gen);
  }

  if (with_mirror) {
    // T^{-k} S0 = iota T^k S0: mirror each curve through (s, phi) -> (s, -phi).
    const std::size_t fwd = result.size();
    for (std::size_t c = 0; c < fwd; ++c) {
      SingularCurve m = result[c];
      m.order = -m.order;
      for (auto& p : m.nodes) p.phi = -p.phi;
      std::reverse(m.nodes.begin(), m.nodes.end());
      result.push_back(std::move(m));
    }
  }
  return result;
}

namespace {

struct Seg {
  Vec2 a, b;  // (s, phi) with s possibly shifted by +-per
  int curve = 0;
};

bool seg_intersect(const Seg& p, const Seg& q, Vec2* at) {
  const Vec2 r = p.b - p.a, s = q.b - q.a;
  const double denom = r.cross(s);
  if (denom == 0.0) return false;
  const Vec2 d = q.a - p.a;
  const double t = d.cross(s) / denom;
  const double u = d.cross(r) / denom;
  if (t < -1e-12 || t > 1.0 + 1e-12 || u < -1e-12 || u > 1.0 + 1e-12) return false;
  *at = p.a + t * r;
  return true;
}

}  // namespace

std::vector<IntersectionCluster> intersect_curves(
    const Table& table, const std::vector<SingularCurve>& curves, double snap_tol) {
  std::vector<IntersectionCluster> clusters;
  const int D = static_cast<int>(table.scatterers.size());
  for (int cyl = 0; cyl < D; ++cyl) {
    const double per = table.perimeter(cyl);
    // Bucket segments on a uniform grid for pair pruning.
    std::vector<Seg> segs;
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
      const SingularCurve& c = curves[ci];
      if (c.scatterer != cyl) continue;
      for (std::size_t j = 1; j < c.nodes.size(); ++j) {
        double s0 = std::fmod(c.nodes[j - 1].s, per);
        if (s0 < 0) s0 += per;
        const double ds = c.nodes[j].s - c.nodes[j - 1].s;
        Seg base{{s0, c.nodes[j - 1].phi}, {s0 + ds, c.nodes[j].phi},
                 static_cast<int>(ci)};
        segs.push_back(base);
        // Seam replicas so wrap-around intersections are found.
        if (base.a.x < 0.3 || base.b.x < 0.3)
          segs.push_back({{base.a.x + per, base.a.y}, {base.b.x + per, base.b.y},
                          base.curve});
        if (base.a.x > per - 0.3 || base.b.x > per - 0.3)
          segs.push_back({{base.a.x - per, base.a.y}, {base.b.x - per, base.b.y},
                          base.curve});
      }
    }
    const double cell = 0.02;
    std::unordered_map<std::int64_t, std::vector<int>> grid;
    auto key = [&](double x, double y) {
      return (static_cast<std::int64_t>(std::floor(x / cell)) << 24) ^
             static_cast<std::int64_t>(std::floor(y / cell) + (1 << 20));
    };
    for (std::size_t si = 0; si < segs.size(); ++si) {
      const Seg& sg = segs[si];
      const double x0 = std::min(sg.a.x, sg.b.x), x1 = std::max(sg.a.x, sg.b.x);
      const double y0 = std::min(sg.a.y, sg.b.y), y1 = std::max(sg.a.y, sg.b.y);
      for (double x = x0; x <= x1 + cell; x += cell)
        for (double y = y0; y <= y1 + cell; y += cell)
          grid[key(x, y)].push_back(static_cast<int>(si));
    }
    // Intersection points, then greedy clustering within snap_tol.
    struct Hit {
      Vec2 at;
      int ca, cb;
    };
    std::vector<Hit> hits;
    for (auto& [k2, bucket] : grid) {
      (void)k2;
      for (std::size_t a = 0; a < bucket.size(); ++a)
        for (std::size_t b = a + 1; b < bucket.size(); ++b) {
          const Seg& p = segs[static_cast<std::size_t>(bucket[a])];
          const Seg& q = segs[static_cast<std::size_t>(bucket[b])];
          if (p.curve == q.curve) continue;
          Vec2 at;
          if (seg_intersect(p, q, &at)) hits.push_back({at, p.curve, q.curve});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& h1, const Hit& h2) {
      if (h1.at.x != h2.at.x) return h1.at.x < h2.at.x;
      return h1.at.y < h2.at.y;
    });
    // Hash clusters on a snap_tol grid; a hit joins any cluster in the 3x3
    // neighborhood of its cell.
    std::vector<std::vector<int>> members;
    std::vector<Vec2> centers;
    std::unordered_map<std::int64_t, std::vector<int>> cluster_grid;
    auto ckey = [&](double x, double y) {
      return (static_cast<std::int64_t>(std::floor(x / snap_tol)) << 26) ^
             static_cast<std::int64_t>(std::floor(y / snap_tol) + (1 << 24));
    };
    for (const Hit& h : hits) {
      double wx = std::fmod(h.at.x, per);
      if (wx < 0) wx += per;
      int found = -1;
      for (int gx = -1; gx <= 1 && found < 0; ++gx)
        for (int gy = -1; gy <= 1 && found < 0; ++gy) {
          auto it = cluster_grid.find(ckey(wx + gx * snap_tol, h.at.y + gy * snap_tol));
          if (it == cluster_grid.end()) continue;
          for (int c : it->second) {
            const double dx = wrap_ds(wx - centers[static_cast<std::size_t>(c)].x, per);
            if (std::hypot(dx, h.at.y - centers[static_cast<std::size_t>(c)].y) <=
                snap_tol) {
              found = c;
              break;
            }
          }
        }
      if (found >= 0) {
        members[static_cast<std::size_t>(found)].push_back(h.ca);
        members[static_cast<std::size_t>(found)].push_back(h.cb);
      } else {
        const int c = static_cast<int>(centers.size());
        centers.push_back({wx, h.at.y});
        members.push_back({h.ca, h.cb});
        cluster_grid[ckey(wx, h.at.y)].push_back(c);
      }
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      auto& m = members[c];
      std::sort(m.begin(), m.end());
      m.erase(std::unique(m.begin(), m.end()), m.end());
      clusters.push_back(
          {{cyl, centers[c].x, centers[c].y}, static_cast<int>(m.size())});
    }
  }
  return clusters;
}

MultiplicityStats multiplicity_stats(const Table& table, int n, double snap_tol,
                                     const PropagateParams& params) {
  if (n < 1) throw BadConfig("multiplicity_stats: n must be >= 1");
  std::vector<SingularCurve> curves = s0_components(table);
  std::vector<SingularCurve> prop = propagate_singularity(table, n, params, false);
  curves.insert(curves.end(), prop.begin(), prop.end());

  MultiplicityStats stats;
  stats.max_multiplicity.assign(static_cast<std::size_t>(n), 0);
  for (int k = 1; k <= n; ++k) {
    std::vector<SingularCurve> subset;
    for (const SingularCurve& c : curves)
      if (c.order <= k) subset.push_back(c);
    auto clusters = intersect_curves(table, subset, snap_tol);
    int best = 0;
    for (const auto& cl : clusters) best = std::max(best, cl.curves);
    stats.max_multiplicity[static_cast<std::size_t>(k - 1)] = best;
  }
  double num = 0.0, den = 0.0;
  for (int k = 1; k <= n; ++k) {
    num += k * stats.max_multiplicity[static_cast<std::size_t>(k - 1)];
    den += static_cast<double>(k) * k;
  }
  stats.fitted_K = den > 0 ? num / den : 0.0;
  return stats;
}

}  // namespace billiard
