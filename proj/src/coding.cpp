#include "billiard/coding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <numbers>
#include <thread>

namespace billiard {

namespace {

// Forward chain from x: fills points p_t = T^t x for t = 0..steps and the
// symbols of p_1..p_{steps-1} (each needs the collisions on both sides).
// Returns the number of collisions that succeeded.
int chain_symbols(const Table& table, const Alphabet& alphabet, const PhasePoint& x,
                  int steps, double graze_tol, std::vector<PhasePoint>* points,
                  std::vector<int>* symbols) {
  points->clear();
  symbols->clear();
  points->push_back(x);
  PhasePoint cur = x;
  int prev_src = -1, prev_lx = 0, prev_ly = 0;
  MapOptions opts{graze_tol};
  for (int t = 1; t <= steps; ++t) {
    if (is_grazing(cur, graze_tol)) return t - 1;
    CollisionResult c;
    try {
      c = forward(table, cur, opts);
    } catch (const Error&) {
      return t - 1;
    }
    if (c.tangential) {
      points->push_back(c.next);
      return t - 1;
    }
    if (t >= 2) {
      CellLabel l;
      l.scatterer = static_cast<std::int16_t>(cur.scatterer);
      l.in_sc = static_cast<std::int16_t>(prev_src);
      l.in_lx = static_cast<std::int16_t>(-prev_lx);
      l.in_ly = static_cast<std::int16_t>(-prev_ly);
      l.out_sc = static_cast<std::int16_t>(c.next.scatterer);
      l.out_lx = static_cast<std::int16_t>(c.lift_x);
      l.out_ly = static_cast<std::int16_t>(c.lift_y);
      symbols->push_back(alphabet.symbol(l));
    }
    prev_src = cur.scatterer;
    prev_lx = c.lift_x;
    prev_ly = c.lift_y;
    cur = c.next;
    points->push_back(cur);
  }
  return steps;
}

// Re-derives the length-`len` word ending at z (a point at word position
// `len`) from a fresh orbit, so insertions into the trie are certified no
// matter how the candidate point was produced. Returns false when the orbit
// grazes or leaves the known alphabet.
bool certified_word(const Table& table, const Alphabet& alphabet,
                    const PhasePoint& z, int len, double graze_tol,
                    std::vector<int>* word, PhasePoint* witness) {
  MapOptions opts{graze_tol};
  PhasePoint start = z;
  for (int t = 0; t < len; ++t) {
    if (is_grazing(start, graze_tol)) return false;
    try {
      CollisionResult b = backward(table, start, opts);
      if (b.tangential) return false;
      start = b.next;
    } catch (const Error&) {
      return false;
    }
  }
  std::vector<PhasePoint> points;
  word->clear();
  if (chain_symbols(table, alphabet, start, len + 1, graze_tol, &points, word) <
      len + 1)
    return false;
  for (int sym : *word)
    if (sym < 0) return false;
  *witness = points[1];
  return true;
}

}  // namespace

CodedOrbit encode(const Table& table, const Alphabet& alphabet, const PhasePoint& x,
                  int back, int fwd, double graze_tol) {
  CodedOrbit orbit;
  orbit.base = x;
  MapOptions opts{graze_tol};

  // Walk backward past the window start (one extra collision is needed for
  // the in-corridor of the first symbol).
  PhasePoint start = x;
  int reached = 0;
  for (int t = 1; t <= back + 1; ++t) {
    if (is_grazing(start, graze_tol)) break;
    try {
      CollisionResult b = backward(table, start, opts);
      if (b.tangential) break;
      start = b.next;
      reached = t;
    } catch (const Error&) {
      break;
    }
  }
  if (reached < back + 1) orbit.grazing_flag = true;
  if (reached == 0) return orbit;  // not even the in-corridor of x is defined
  const int back_eff = reached - 1;

  std::vector<PhasePoint> points;
  std::vector<int> symbols;
  const int want = reached + fwd + 1;
  const int got = chain_symbols(table, alphabet, start, want, graze_tol, &points,
                                &symbols);
  // symbols[i] codes T^{i+1} start = T^{i+1-reached} x.
  orbit.first_index = -back_eff;
  const int lo = reached - back_eff - 1;  // index into symbols for j = -back_eff
  for (int i = lo; i < static_cast<int>(symbols.size()); ++i) {
    const int sym = symbols[static_cast<std::size_t>(i)];
    if (sym < 0) {
      orbit.unknown_flag = true;
      break;
    }
    orbit.symbols.push_back(sym);
  }
  if (got < want) orbit.grazing_flag = true;
  return orbit;
}

namespace {

struct WordBatch {
  // Flattened words with witnesses: (length, symbols..., witness).
  std::vector<int> data;
  std::vector<PhasePoint> witnesses;
  std::vector<std::uint32_t> offsets;  // into data; parallel to witnesses
  std::vector<std::uint16_t> lengths;
  std::uint64_t grazing = 0, unknown = 0, orbits = 0;
  bool budget_hit = false;

  void add(std::span<const int> word, const PhasePoint& wit) {
    offsets.push_back(static_cast<std::uint32_t>(data.size()));
    lengths.push_back(static_cast<std::uint16_t>(word.size()));
    data.insert(data.end(), word.begin(), word.end());
    witnesses.push_back(wit);
  }
};

// Deterministic low-discrepancy sequence for seeding.
double halton(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  for (std::uint64_t n = i + 1; n > 0; n /= static_cast<std::uint64_t>(base)) {
    f /= base;
    r += f * static_cast<double>(n % static_cast<std::uint64_t>(base));
  }
  return r;
}

// --- Marching enumerator -------------------------------------------------
//
// Iterates a u-curve forward one cell-piece at a time: a piece at level j is
// a polyline approximating a component of T^j V inside one cell. Mapping a
// piece costs O(1) collisions per sample regardless of depth, which is what
// makes systematic enumeration to depth 12+ affordable. Every discovered
// piece is certified by re-encoding a true orbit through one of its vertices
// before its word enters the trie.

struct MarchEval {
  double t = 0.0;      // parameter on the piece polyline
  PhasePoint img;      // forward image of the evaluated point
  int lift_key = 0;    // packed (target, lift) of the mapping step
  int sym = -2;        // full cell symbol of img (-2 dead, -1 unknown)
};

class Marcher {
 public:
  Marcher(const Table& table, const Alphabet& alphabet, int depth, double h_img,
          double param_tol, double graze_tol, std::size_t max_pieces)
      : table_(table), alphabet_(alphabet), depth_(depth), h_img_(h_img),
        param_tol_(param_tol), graze_tol_(graze_tol), max_pieces_(max_pieces) {}

  bool budget_hit = false;
  std::uint64_t unknown = 0;
  std::uint64_t uncertified = 0;

  void run(const CurveSegment& root, WordBatch* out) {
    out_ = out;
    pieces_used_ = 0;
    march(root, 0);
  }

 private:
  MarchEval eval(const CurveSegment& piece, double t) {
    MarchEval e;
    e.t = t;
    const PhasePoint x = piece.eval(t);
    if (is_grazing(x, graze_tol_)) return e;
    CollisionResult c1, c2;
    try {
      c1 = forward_unchecked(table_, x);
      if (c1.tangential || is_grazing(c1.next, graze_tol_)) return e;
      c2 = forward_unchecked(table_, c1.next);
      if (c2.tangential) return e;
    } catch (const Error&) {
      return e;
    }
    e.img = c1.next;
    e.lift_key = ((c1.lift_x + 32) << 12) ^ ((c1.lift_y + 32) << 4) ^
                 c1.next.scatterer;
    CellLabel l;
    l.scatterer = static_cast<std::int16_t>(c1.next.scatterer);
    l.in_sc = static_cast<std::int16_t>(x.scatterer);
    l.in_lx = static_cast<std::int16_t>(-c1.lift_x);
    l.in_ly = static_cast<std::int16_t>(-c1.lift_y);
    l.out_sc = static_cast<std::int16_t>(c2.next.scatterer);
    l.out_lx = static_cast<std::int16_t>(c2.lift_x);
    l.out_ly = static_cast<std::int16_t>(c2.lift_y);
    e.sym = alphabet_.symbol(l);
    if (e.sym == -1) ++unknown;
    return e;
  }

  static double img_dist(const Table& table, const MarchEval& a,
                         const MarchEval& b) {
    if (a.sym == -2 || b.sym == -2 || a.img.scatterer != b.img.scatterer)
      return std::numeric_limits<double>::infinity();
    const double per = table.perimeter(a.img.scatterer);
    double ds = std::fmod(b.img.s - a.img.s, per);
    if (ds > per / 2) ds -= per;
    if (ds < -per / 2) ds += per;
    return std::hypot(ds, b.img.phi - a.img.phi);
  }

  void refine(const CurveSegment& piece, const MarchEval& a, const MarchEval& b,
              std::vector<MarchEval>* out, int depth) {
    if (b.t - a.t < param_tol_ || depth > 46) {
      out->push_back(b);
      return;
    }
    const bool same = a.sym == b.sym && a.lift_key == b.lift_key;
    if (same && (a.sym == -2 || img_dist(table_, a, b) < h_img_)) {
      out->push_back(b);
      return;
    }
    MarchEval m = eval(piece, 0.5 * (a.t + b.t));
    refine(piece, a, m, out, depth + 1);
    refine(piece, m, b, out, depth + 1);
  }

  void march(const CurveSegment& piece, int level) {
    if (level >= depth_ || budget_hit) return;
    // Sample the mapping of this piece densely enough to resolve single
    // images, then split into runs of constant cell symbol.
    std::vector<MarchEval> evals;
    MarchEval prev = eval(piece, 0.0);
    evals.push_back(prev);
    const auto nseg = piece.nodes.size() - 1;
    const int per_seg = std::max<int>(
        1, static_cast<int>(8.0 / static_cast<double>(nseg)));
    for (std::size_t seg = 0; seg < nseg; ++seg)
      for (int k = 1; k <= per_seg; ++k) {
        const double t =
            (static_cast<double>(seg) + static_cast<double>(k) / per_seg) /
            static_cast<double>(nseg);
        MarchEval e = eval(piece, t);
        refine(piece, prev, e, &evals, 0);
        prev = e;
      }

    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= evals.size(); ++i) {
      if (i < evals.size() && evals[i].sym == evals[run_start].sym &&
          evals[i].lift_key == evals[run_start].lift_key)
        continue;
      const int sym = evals[run_start].sym;
      if (sym >= 0) {
        if (++pieces_used_ > max_pieces_) {
          budget_hit = true;
          return;
        }
        CurveSegment child;
        child.scatterer = evals[run_start].img.scatterer;
        child.nodes.reserve(i - run_start);
        const double per = table_.perimeter(child.scatterer);
        for (std::size_t k = run_start; k < i; ++k) {
          PhasePoint p = evals[k].img;
          if (!child.nodes.empty()) {
            double ds = std::fmod(p.s - std::fmod(child.nodes.back().s, per), per);
            if (ds > per / 2) ds -= per;
            if (ds < -per / 2) ds += per;
            if (std::abs(ds) + std::abs(p.phi - child.nodes.back().phi) < 1e-15)
              continue;
            p.s = child.nodes.back().s + ds;
          } else if (p.s < 0) {
            p.s += per;
          }
          child.nodes.push_back(p);
        }
        // Certify and record the word ending at this piece.
        std::vector<int> word;
        PhasePoint witness;
        const PhasePoint mid = child.nodes[child.nodes.size() / 2];
        if (certified_word(table_, alphabet_, mid, level + 1, graze_tol_, &word,
                           &witness)) {
          out_->add(word, witness);
        } else {
          ++uncertified;
        }
        if (child.nodes.size() >= 2) {
          march(child, level + 1);
          if (budget_hit) return;
        }
      }
      run_start = i;
    }
  }

  const Table& table_;
  const Alphabet& alphabet_;
  const int depth_;
  const double h_img_, param_tol_, graze_tol_;
  const std::size_t max_pieces_;
  std::size_t pieces_used_ = 0;
  WordBatch* out_ = nullptr;
};

void process_seed_range(const Table& table, const Alphabet& alphabet,
                        const EnumerationParams& params, std::int64_t begin,
                        std::int64_t end, WordBatch* out) {
  const int D = static_cast<int>(table.scatterers.size());
  const int extra = params.orbit_extra < 0 ? params.depth : params.orbit_extra;
  const int steps = params.depth + extra + 2;
  const double phi_lim = std::numbers::pi / 2.0 - 16.0 * params.graze_tol;
  std::vector<PhasePoint> points;
  std::vector<int> symbols;
  for (std::int64_t k = begin; k < end; ++k) {
    const int i = static_cast<int>(k % D);
    const double s = halton(static_cast<std::uint64_t>(k), 2) * table.perimeter(i);
    const double phi = (2.0 * halton(static_cast<std::uint64_t>(k), 3) - 1.0) * phi_lim;
    ++out->orbits;
    chain_symbols(table, alphabet, {i, s, phi}, steps, params.graze_tol, &points,
                  &symbols);
    // Truncate at the first unknown label; words beyond it are not certified.
    std::size_t len = symbols.size();
    for (std::size_t t = 0; t < symbols.size(); ++t)
      if (symbols[t] < 0) {
        len = t;
        ++out->unknown;
        break;
      }
    if (len + 2 < static_cast<std::size_t>(steps)) ++out->grazing;
    // Sliding windows: word starting at symbol index t has witness p_{t+1}.
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t wlen =
          std::min<std::size_t>(static_cast<std::size_t>(params.depth), len - t);
      out->add(std::span<const int>(symbols.data() + t, wlen), points[t + 1]);
    }
  }
}

}  // namespace

namespace {

// Worker pool over an ordered task list; batches are merged strictly in task
// order so the resulting trie is deterministic regardless of thread timing.
void ordered_parallel_merge(
    int threads, std::int64_t ntasks,
    const std::function<void(std::int64_t, WordBatch*)>& run,
    const std::function<bool(WordBatch&)>& merge) {
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::unique_ptr<WordBatch>> ready(static_cast<std::size_t>(ntasks));
  std::int64_t next_to_take = 0;
  std::atomic<std::int64_t> next_task{0};
  std::atomic<bool> stop{false};

  auto worker = [&]() {
    while (!stop.load()) {
      const std::int64_t c = next_task.fetch_add(1);
      if (c >= ntasks) return;
      {
        // Bounded pipeline: stay at most 4*threads tasks ahead of the merger.
        std::unique_lock lk(mu);
        cv.wait(lk, [&] {
          return stop.load() || c < next_to_take + 4 * threads;
        });
        if (stop.load()) return;
      }
      auto batch = std::make_unique<WordBatch>();
      run(c, batch.get());
      {
        std::lock_guard lk(mu);
        ready[static_cast<std::size_t>(c)] = std::move(batch);
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);

  bool keep_going = true;
  for (std::int64_t c = 0; c < ntasks && keep_going; ++c) {
    std::unique_ptr<WordBatch> batch;
    {
      std::unique_lock lk(mu);
      cv.wait(lk, [&] { return ready[static_cast<std::size_t>(c)] != nullptr; });
      batch = std::move(ready[static_cast<std::size_t>(c)]);
      next_to_take = c + 1;
    }
    cv.notify_all();
    keep_going = merge(*batch);
  }
  {
    std::lock_guard lk(mu);
    stop.store(true);
  }
  cv.notify_all();
  for (auto& t : pool) t.join();
}

}  // namespace

EnumerationResult enumerate_language(const Table& table, const Alphabet& alphabet,
                                     const EnumerationParams& params) {
  EnumerationResult res{LanguageTrie(params.depth)};
  res.trie.seed_budget = static_cast<std::uint64_t>(params.seed_budget);

  const int threads = params.threads > 0
                          ? params.threads
                          : std::max(1u, std::thread::hardware_concurrency());

  auto merge_batch = [&](WordBatch& batch) {
    res.orbits += batch.orbits;
    res.grazing_truncated += batch.grazing;
    res.unknown_label += batch.unknown;
    for (std::size_t w = 0; w < batch.witnesses.size(); ++w) {
      if (res.trie.node_count() > params.max_nodes) {
        res.budget_exceeded = true;
        return false;
      }
      const PhasePoint& wit = batch.witnesses[w];
      res.trie.insert(std::span<const int>(batch.data.data() + batch.offsets[w],
                                           batch.lengths[w]),
                      wit.scatterer >= 0 ? &wit : nullptr);
    }
    return true;
  };

  // Phase 1: point seeds with sliding windows. Cheap, and it spreads many
  // witnesses through every sizable cell.
  const std::int64_t chunk = 2048;
  const std::int64_t nchunks = (params.seed_budget + chunk - 1) / chunk;
  ordered_parallel_merge(
      threads, nchunks,
      [&](std::int64_t c, WordBatch* batch) {
        process_seed_range(table, alphabet, params, c * chunk,
                           std::min<std::int64_t>((c + 1) * chunk,
                                                  params.seed_budget),
                           batch);
      },
      merge_batch);

  // Phase 2: marching enumeration along a grid of long u-curves; the adaptive
  // scan bisects between differing itineraries, so follower cells are found
  // regardless of how thin they are transversally to the curve.
  if (params.curve_spacing > 0 && !res.budget_exceeded) {
    std::vector<CurveSegment> grid = u_curve_grid(table, params.curve_spacing);
    const double h_img = 1.0 / params.curve_params.samples_per_unit;
    ordered_parallel_merge(
        threads, static_cast<std::int64_t>(grid.size()),
        [&](std::int64_t c, WordBatch* batch) {
          Marcher m(table, alphabet, params.depth, h_img,
                    params.curve_params.param_tol, params.graze_tol,
                    params.curve_params.max_fragments);
          m.run(grid[static_cast<std::size_t>(c)], batch);
          batch->unknown += m.unknown;
          batch->budget_hit = m.budget_hit;
        },
        [&](WordBatch& batch) {
          if (batch.budget_hit) res.budget_exceeded = true;
          return merge_batch(batch);
        });
  }

  res.trie.suffix_close(&table);
  res.trie.recount();
  res.trie.budget_exceeded = res.budget_exceeded;
  return res;
}

std::vector<Follower> followers(const Table& table, const Alphabet& alphabet,
                                const CurveSegment& V, int n,
                                const CurveIterationParams& params) {
  FragmentTree tree = iterate_curve_tree(table, alphabet, V, n, params);
  std::vector<Follower> out;
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const FragmentNode& f = tree.nodes[id];
    if (f.depth != n) continue;
    Follower fol;
    fol.word = tree.word_of(static_cast<int>(id));
    fol.image_length = f.image_length;
    const int nn = 16;
    fol.subcurve.scatterer = V.scatterer;
    for (int i = 0; i <= nn; ++i)
      fol.subcurve.nodes.push_back(V.eval(f.u0 + (f.u1 - f.u0) * i / nn));
    fol.base_length = fol.subcurve.length();
    out.push_back(std::move(fol));
  }
  return out;
}

double cell_diameter_probe(const Table& table, const Alphabet& alphabet,
                           const LanguageTrie& trie, std::span<const int> v,
                           std::span<const int> w, int samples) {
  (void)alphabet;
  if (v.empty() || w.empty() || v.back() != w.front())
    throw JunctionMismatch("cell_diameter_probe: junction symbols differ");
  // Y_{v.w} = T^{k-1} Y_{v'w}^+ with v' = v minus its last symbol.
  std::vector<int> full(v.begin(), v.end() - 1);
  full.insert(full.end(), w.begin(), w.end());
  const int node = trie.find(full);
  if (node < 0) throw EmptyCell("cell_diameter_probe: word not enumerated");

  // Witnesses of the node and its descendants all lie in Y_{v'w}^+.
  std::vector<PhasePoint> pts;
  std::function<void(int)> collect = [&](int id) {
    if (static_cast<int>(pts.size()) >= samples) return;
    const auto& nd = trie.node(id);
    if (nd.witness.scatterer >= 0) pts.push_back(nd.witness);
    for (int c = nd.first_child; c >= 0; c = trie.node(c).next_sibling)
      collect(c);
  };
  collect(node);
  if (pts.empty()) throw EmptyCell("cell_diameter_probe: no witnesses");

  const int shift = static_cast<int>(v.size()) - 1;
  std::vector<PhasePoint> shifted;
  for (const PhasePoint& p : pts) {
    PhasePoint cur = p;
    bool ok = true;
    for (int t = 0; t < shift && ok; ++t) {
      try {
        cur = forward(table, cur).next;
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok) shifted.push_back(cur);
  }
  if (shifted.empty()) throw EmptyCell("cell_diameter_probe: witnesses died");
  double diam = 0.0;
  for (std::size_t a = 0; a < shifted.size(); ++a)
    for (std::size_t b = a + 1; b < shifted.size(); ++b)
      diam = std::max(diam, phase_distance(table, shifted[a], shifted[b]));
  return diam;
}

}  // namespace billiard
