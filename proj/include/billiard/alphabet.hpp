#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "billiard/billiard_map.hpp"

namespace billiard {

/// Cell label for the partition of M into maximal open sets on which both T
/// and T^{-1} are continuous. A cell is identified by the corridor the
/// trajectory arrived through and the corridor it leaves through, i.e. the
/// lifted scatterers of the previous and next collision.
struct CellLabel {
  std::int16_t scatterer = 0;  // cylinder the cell lives on
  std::int16_t in_sc = 0;      // previous collision: scatterer and lift
  std::int16_t in_lx = 0, in_ly = 0;
  std::int16_t out_sc = 0;     // next collision: scatterer and lift
  std::int16_t out_lx = 0, out_ly = 0;

  bool operator==(const CellLabel&) const = default;
  bool operator<(const CellLabel& o) const;
};

struct CellLabelHash {
  std::size_t operator()(const CellLabel& l) const;
};

struct AlphabetBuildParams {
  int grid_s = 360;        // samples along arclength per cylinder
  int grid_phi = 240;      // samples in phi
  int boundary_bisections = 10;  // extra probes between differing neighbors
  int orbit_seeds_s = 40;  // coarse seed grid iterated to mop up rare cells
  int orbit_seeds_phi = 24;
  int orbit_len = 24;
  double graze_tol = 1e-8;
};

/// Immutable symbol table after build; the locator answers by computing the
/// previous and next collision of the query point.
class Alphabet {
 public:
  /// Label of x. Throws GrazingQuery when x (or its arrival on either side)
  /// is inside the graze band, where the label is undefined.
  static CellLabel label_of(const Table& table, const PhasePoint& x,
                            double graze_tol = 1e-8);

  int symbol(const CellLabel& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? -1 : it->second;
  }

  /// Symbol of the cell containing x, or -1 for a label never seen during the
  /// build (reported by callers as an under-resolved alphabet).
  int locate(const Table& table, const PhasePoint& x) const {
    return symbol(label_of(table, x, graze_tol_));
  }

  int intern(const CellLabel& label);

  std::size_t size() const { return labels_.size(); }
  const CellLabel& label(int symbol) const {
    return labels_[static_cast<std::size_t>(symbol)];
  }
  double graze_tol() const { return graze_tol_; }

 private:
  friend Alphabet build_alphabet(const Table&, const AlphabetBuildParams&);
  std::vector<CellLabel> labels_;
  std::unordered_map<CellLabel, int, CellLabelHash> index_;
  double graze_tol_ = 1e-8;
};

struct AlphabetReport {
  std::size_t cells = 0;
  std::size_t grid_points = 0;
  std::size_t grazing_skipped = 0;
  std::size_t disconnected_labels = 0;  // labels whose grid support splits into
                                        // multiple components (empirical check)
};

Alphabet build_alphabet(const Table& table, const AlphabetBuildParams& params = {});

/// Empirical connectedness check of the corridor-pair labeling: counts labels
/// whose sampled support has more than one grid-adjacency component.
AlphabetReport alphabet_report(const Table& table, const Alphabet& alphabet,
                               int grid_s = 360, int grid_phi = 240);

}  // namespace billiard
