#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "billiard/billiard_map.hpp"

namespace billiard {

/// Prefix tree of admissible words up to a fixed depth. Every node's word is
/// admissible and carries a witness phase point of its cell Y_w^+ when one is
/// known. ext_count(node) is the number of depth-N descendants, so counts are
/// certified lower bounds for the language and additive over children.
class LanguageTrie {
 public:
  struct Node {
    std::int32_t symbol = -1;
    std::int32_t parent = -1;
    std::int32_t first_child = -1;
    std::int32_t next_sibling = -1;  // children kept sorted by symbol
    std::int64_t ext_count = 0;
    PhasePoint witness{-1, 0.0, 0.0};  // scatterer < 0 means no witness
  };

  explicit LanguageTrie(int depth) : depth_(depth) { nodes_.emplace_back(); }

  int depth() const { return depth_; }
  static constexpr int kRoot = 0;

  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  int child(int id, int symbol) const;
  int node_depth(int id) const;

  /// Walks `word` from `from`; -1 when absent.
  int walk(int from, std::span<const int> word) const;
  int find(std::span<const int> word) const { return walk(kRoot, word); }
  bool contains(std::span<const int> word) const { return find(word) >= 0; }

  /// Inserts a word (and implicitly all its prefixes). A witness, when given,
  /// is attached to every node along the path that lacks one: a witness of w
  /// certifies every prefix.
  int insert(std::span<const int> word, const PhasePoint* witness = nullptr);

  /// Word spelled by a node, root to node.
  std::vector<int> word_of(int id) const;

  /// Recomputes ext_count for every node (depth-N descendant counts).
  void recount();

  /// #L_n for n = 1..depth (index 0 unused).
  std::vector<std::int64_t> level_counts() const;

  /// Number of descendants of `id` exactly `rel_depth` levels below.
  std::int64_t descendants_at(int id, int rel_depth) const;

  /// Count of words z of length K + |pattern| + L whose symbols at positions
  /// [K, K+|pattern|) equal `pattern`. Requires K + |pattern| + L <= depth.
  std::int64_t count_with_middle(std::span<const int> pattern, int K, int L) const;

  /// Count of words of length K + span + L matching two blocks: `a` at offset
  /// K and `b` at offset K + gap_to_b (positions may overlap; a mismatch in
  /// the overlap gives 0). span = max(|a|, gap_to_b + |b|).
  std::int64_t count_with_pattern(std::span<const int> a, int gap_to_b,
                                  std::span<const int> b, int K, int L) const;

  /// Ensures the word set is closed under suffixes (hence factorial, since it
  /// is prefix-closed by construction). Missing suffix witnesses are obtained
  /// by iterating the parent witness forward one step when a table is given.
  void suffix_close(const Table* table);

  /// Preorder traversal; f(node_id, word) for every node except the root.
  void visit(const std::function<void(int, const std::vector<int>&)>& f) const;

  /// Builds the trie of reversed words (for backward extension counts).
  LanguageTrie reversed() const;

  // Metadata carried alongside persisted tries.
  bool budget_exceeded = false;
  std::uint64_t table_hash = 0;
  std::uint64_t seed_budget = 0;

  void save(std::ostream& out) const;
  static LanguageTrie load(std::istream& in);

 private:
  int depth_;
  std::vector<Node> nodes_;
};

}  // namespace billiard
