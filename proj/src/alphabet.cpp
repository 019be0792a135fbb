#include "billiard/alphabet.hpp"

#include <cmath>
#include <numbers>
#include <tuple>

namespace billiard {

bool CellLabel::operator<(const CellLabel& o) const {
  auto key = [](const CellLabel& l) {
    return std::tuple(l.scatterer, l.in_sc, l.in_lx, l.in_ly, l.out_sc, l.out_lx,
                      l.out_ly);
  };
  return key(*this) < key(o);
}

std::size_t CellLabelHash::operator()(const CellLabel& l) const {
  // FNV-1a over the packed fields.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::int64_t v) {
    h ^= static_cast<std::uint64_t>(v);
    h *= 1099511628211ull;
  };
  mix(l.scatterer);
  mix(l.in_sc);
  mix((static_cast<std::int64_t>(l.in_lx) << 20) ^ l.in_ly);
  mix(l.out_sc);
  mix((static_cast<std::int64_t>(l.out_lx) << 20) ^ l.out_ly);
  return static_cast<std::size_t>(h);
}

CellLabel Alphabet::label_of(const Table& table, const PhasePoint& x,
                             double graze_tol) {
  MapOptions opts{graze_tol};
  if (is_grazing(x, graze_tol))
    throw GrazingQuery("label_of: point inside the graze band");
  CollisionResult fwd, bwd;
  try {
    fwd = forward(table, x, opts);
    bwd = backward(table, x, opts);
  } catch (const GrazingInput&) {
    throw GrazingQuery("label_of: grazing neighbor collision");
  }
  if (fwd.tangential || bwd.tangential)
    throw GrazingQuery("label_of: tangential arrival");
  CellLabel l;
  l.scatterer = static_cast<std::int16_t>(x.scatterer);
  l.in_sc = static_cast<std::int16_t>(bwd.next.scatterer);
  l.in_lx = static_cast<std::int16_t>(bwd.lift_x);
  l.in_ly = static_cast<std::int16_t>(bwd.lift_y);
  l.out_sc = static_cast<std::int16_t>(fwd.next.scatterer);
  l.out_lx = static_cast<std::int16_t>(fwd.lift_x);
  l.out_ly = static_cast<std::int16_t>(fwd.lift_y);
  return l;
}

int Alphabet::intern(const CellLabel& label) {
  auto it = index_.find(label);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(labels_.size());
  labels_.push_back(label);
  index_.emplace(label, id);
  return id;
}

namespace {

// Intern the label at x if it is well-defined.
bool try_intern(const Table& table, Alphabet& a, const PhasePoint& x,
                double graze_tol) {
  try {
    a.intern(Alphabet::label_of(table, x, graze_tol));
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

Alphabet build_alphabet(const Table& table, const AlphabetBuildParams& params) {
  Alphabet a;
  a.graze_tol_ = params.graze_tol;
  const double phi_lim = std::numbers::pi / 2.0 - 64.0 * params.graze_tol;
  const int D = static_cast<int>(table.scatterers.size());

  for (int i = 0; i < D; ++i) {
    const double per = table.perimeter(i);
    std::vector<int> prev_row(static_cast<std::size_t>(params.grid_s), -1);
    for (int q = 0; q < params.grid_phi; ++q) {
      const double phi = -phi_lim + (2.0 * phi_lim) * (q + 0.5) / params.grid_phi;
      int left = -1;
      double left_s = 0.0;
      for (int p = 0; p < params.grid_s; ++p) {
        const double s = per * (p + 0.5) / params.grid_s;
        int sym = -1;
        try {
          sym = a.intern(Alphabet::label_of(table, {i, s, phi}, params.graze_tol));
        } catch (const Error&) {
        }
        // Bisect between differing horizontal neighbors so thin cells wedged
        // between two wide ones are still discovered.
        if (sym >= 0 && left >= 0 && sym != left) {
          double lo = left_s, hi = s;
          for (int b = 0; b < params.boundary_bisections; ++b) {
            const double mid = 0.5 * (lo + hi);
            int m = -1;
            try {
              m = a.intern(Alphabet::label_of(table, {i, mid, phi}, params.graze_tol));
            } catch (const Error&) {
              break;
            }
            if (m == left)
              lo = mid;
            else
              hi = mid;
          }
        }
        const auto pidx = static_cast<std::size_t>(p);
        if (sym >= 0 && prev_row[pidx] >= 0 && sym != prev_row[pidx]) {
          const double dphi = 2.0 * phi_lim / params.grid_phi;
          for (int b = 1; b < params.boundary_bisections; ++b)
            try_intern(table, a, {i, s, phi - dphi * b / params.boundary_bisections},
                       params.graze_tol);
        }
        prev_row[pidx] = sym;
        if (sym >= 0) {
          left = sym;
          left_s = s;
        }
      }
    }
    // Coarse orbit seeds: iterates wander into cells the grid may miss.
    for (int p = 0; p < params.orbit_seeds_s; ++p) {
      for (int q = 0; q < params.orbit_seeds_phi; ++q) {
        PhasePoint x{i, per * (p + 0.5) / params.orbit_seeds_s,
                     -phi_lim + 2.0 * phi_lim * (q + 0.5) / params.orbit_seeds_phi};
        for (int step = 0; step < params.orbit_len; ++step) {
          if (!try_intern(table, a, x, params.graze_tol)) break;
          try {
            CollisionResult r = forward(table, x);
            if (r.tangential) break;
            x = r.next;
          } catch (const Error&) {
            break;
          }
        }
      }
    }
  }
  return a;
}

AlphabetReport alphabet_report(const Table& table, const Alphabet& alphabet,
                               int grid_s, int grid_phi) {
  AlphabetReport rep;
  rep.cells = alphabet.size();
  const double phi_lim = std::numbers::pi / 2.0 - 64.0 * alphabet.graze_tol();
  const int D = static_cast<int>(table.scatterers.size());

  struct DSU {
    std::vector<int> up;
    int find(int v) { return up[static_cast<std::size_t>(v)] == v
                                 ? v
                                 : up[static_cast<std::size_t>(v)] =
                                       find(up[static_cast<std::size_t>(v)]); }
    void unite(int x, int y) { up[static_cast<std::size_t>(find(x))] = find(y); }
  };

  std::vector<int> components_per_label(alphabet.size(), 0);
  for (int i = 0; i < D; ++i) {
    const double per = table.perimeter(i);
    std::vector<int> sym(static_cast<std::size_t>(grid_s * grid_phi), -1);
    for (int q = 0; q < grid_phi; ++q)
      for (int p = 0; p < grid_s; ++p) {
        ++rep.grid_points;
        const double s = per * (p + 0.5) / grid_s;
        const double phi = -phi_lim + 2.0 * phi_lim * (q + 0.5) / grid_phi;
        try {
          sym[static_cast<std::size_t>(q * grid_s + p)] =
              alphabet.locate(table, {i, s, phi});
        } catch (const Error&) {
          ++rep.grazing_skipped;
        }
      }
    DSU dsu;
    dsu.up.resize(sym.size());
    for (std::size_t v = 0; v < sym.size(); ++v) dsu.up[v] = static_cast<int>(v);
    auto at = [&](int p, int q) {
      return sym[static_cast<std::size_t>(q * grid_s + p)];
    };
    for (int q = 0; q < grid_phi; ++q)
      for (int p = 0; p < grid_s; ++p) {
        if (at(p, q) < 0) continue;
        const int pr = (p + 1) % grid_s;  // s wraps around the cylinder
        if (at(pr, q) == at(p, q)) dsu.unite(q * grid_s + p, q * grid_s + pr);
        if (q + 1 < grid_phi && at(p, q + 1) == at(p, q))
          dsu.unite(q * grid_s + p, (q + 1) * grid_s + p);
      }
    std::vector<char> seen(sym.size(), 0);
    for (std::size_t v = 0; v < sym.size(); ++v) {
      if (sym[v] < 0) continue;
      const int r = dsu.find(static_cast<int>(v));
      if (!seen[static_cast<std::size_t>(r)]) {
        seen[static_cast<std::size_t>(r)] = 1;
        ++components_per_label[static_cast<std::size_t>(sym[v])];
      }
    }
  }
  for (int c : components_per_label)
    if (c > 1) ++rep.disconnected_labels;
  return rep;
}

}  // namespace billiard
