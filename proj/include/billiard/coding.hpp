#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "billiard/growth.hpp"
#include "billiard/trie.hpp"

namespace billiard {

/// Symbolic coding of the orbit window [-back, fwd] around a base point:
/// symbols[j] is the cell of T^{first_index + j} base. The window shrinks and
/// flags are set when an iterate enters the graze band or an unseen cell.
struct CodedOrbit {
  PhasePoint base;
  int first_index = 0;
  std::vector<int> symbols;
  bool grazing_flag = false;
  bool unknown_flag = false;

  int symbol_at(int j) const { return symbols[static_cast<std::size_t>(j - first_index)]; }
  int last_index() const {
    return first_index + static_cast<int>(symbols.size()) - 1;
  }
};

CodedOrbit encode(const Table& table, const Alphabet& alphabet, const PhasePoint& x,
                  int back, int fwd, double graze_tol = 1e-8);

struct EnumerationParams {
  int depth = 12;
  std::int64_t seed_budget = 200000;  // number of seed orbits
  int orbit_extra = -1;               // extra symbols per orbit; -1 means depth
  double curve_spacing = 0.05;        // u-curve grid pitch; 0 disables phase 2
  std::size_t max_nodes = 60'000'000;
  std::uint64_t rng_seed = 20240601;
  int threads = 0;  // 0 = hardware concurrency
  double graze_tol = 1e-8;
  CurveIterationParams curve_params;
};

struct EnumerationResult {
  LanguageTrie trie;
  std::uint64_t orbits = 0;
  std::uint64_t grazing_truncated = 0;
  std::uint64_t unknown_label = 0;
  bool budget_exceeded = false;
};

/// Witness-based enumeration of the language up to `depth`: dense seeding of
/// phase space with sliding-window insertion, followed by follower-tree
/// completion along S_1 cell curves and a suffix-closure pass. Counts are
/// certified lower bounds; every word carries a witness.
EnumerationResult enumerate_language(const Table& table, const Alphabet& alphabet,
                                     const EnumerationParams& params = {});

struct Follower {
  std::vector<int> word;
  CurveSegment subcurve;      // V_w as a subcurve of V
  double base_length = 0.0;   // |V_w|
  double image_length = 0.0;  // |T^n V_w|
};

/// Partition of a u-curve into follower subcurves V_w = V cap T^{-1} Y_w^+.
std::vector<Follower> followers(const Table& table, const Alphabet& alphabet,
                                const CurveSegment& V, int n,
                                const CurveIterationParams& params = {});

/// Diameter estimate of the two-sided cell Y_{v.w} from trie witnesses pushed
/// to the junction time. Throws JunctionMismatch / EmptyCell.
double cell_diameter_probe(const Table& table, const Alphabet& alphabet,
                           const LanguageTrie& trie, std::span<const int> v,
                           std::span<const int> w, int samples);

}  // namespace billiard
