#include "billiard/trie.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "billiard/errors.hpp"

namespace billiard {

int LanguageTrie::child(int id, int symbol) const {
  for (int c = nodes_[static_cast<std::size_t>(id)].first_child; c >= 0;
       c = nodes_[static_cast<std::size_t>(c)].next_sibling) {
    const Node& n = nodes_[static_cast<std::size_t>(c)];
    if (n.symbol == symbol) return c;
    if (n.symbol > symbol) return -1;  // sorted sibling list
  }
  return -1;
}

int LanguageTrie::node_depth(int id) const {
  int d = 0;
  while (id != kRoot) {
    id = nodes_[static_cast<std::size_t>(id)].parent;
    ++d;
  }
  return d;
}

int LanguageTrie::walk(int from, std::span<const int> word) const {
  int cur = from;
  for (int sym : word) {
    cur = child(cur, sym);
    if (cur < 0) return -1;
  }
  return cur;
}

int LanguageTrie::insert(std::span<const int> word, const PhasePoint* witness) {
  int cur = kRoot;
  for (int sym : word) {
    int prev = -1, c = nodes_[static_cast<std::size_t>(cur)].first_child;
    while (c >= 0 && nodes_[static_cast<std::size_t>(c)].symbol < sym) {
      prev = c;
      c = nodes_[static_cast<std::size_t>(c)].next_sibling;
    }
    if (c < 0 || nodes_[static_cast<std::size_t>(c)].symbol != sym) {
      Node n;
      n.symbol = sym;
      n.parent = cur;
      n.next_sibling = c;
      const int fresh = static_cast<int>(nodes_.size());
      nodes_.push_back(n);
      if (prev < 0)
        nodes_[static_cast<std::size_t>(cur)].first_child = fresh;
      else
        nodes_[static_cast<std::size_t>(prev)].next_sibling = fresh;
      c = fresh;
    }
    if (witness && nodes_[static_cast<std::size_t>(c)].witness.scatterer < 0)
      nodes_[static_cast<std::size_t>(c)].witness = *witness;
    cur = c;
  }
  return cur;
}

std::vector<int> LanguageTrie::word_of(int id) const {
  std::vector<int> w;
  while (id != kRoot) {
    w.push_back(nodes_[static_cast<std::size_t>(id)].symbol);
    id = nodes_[static_cast<std::size_t>(id)].parent;
  }
  std::reverse(w.begin(), w.end());
  return w;
}

void LanguageTrie::recount() {
  // ext_count = number of depth-N descendants; depth-N nodes count themselves.
  std::vector<int> depth_of(nodes_.size(), 0);
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    depth_of[i] = depth_of[static_cast<std::size_t>(nodes_[i].parent)] + 1;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    nodes_[i].ext_count = depth_of[i] == depth_ ? 1 : 0;
  // Children are always created after parents, so one reverse sweep suffices.
  for (std::size_t i = nodes_.size(); i-- > 1;) {
    if (depth_of[i] < depth_)
      nodes_[static_cast<std::size_t>(nodes_[i].parent)].ext_count +=
          nodes_[i].ext_count;
  }
  // Root: total number of depth-N words.
  nodes_[0].ext_count = 0;
  for (int c = nodes_[0].first_child; c >= 0;
       c = nodes_[static_cast<std::size_t>(c)].next_sibling)
    nodes_[0].ext_count += nodes_[static_cast<std::size_t>(c)].ext_count;
}

std::vector<std::int64_t> LanguageTrie::level_counts() const {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(depth_) + 1, 0);
  std::vector<int> depth_of(nodes_.size(), 0);
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    depth_of[i] = depth_of[static_cast<std::size_t>(nodes_[i].parent)] + 1;
    if (depth_of[i] <= depth_) ++counts[static_cast<std::size_t>(depth_of[i])];
  }
  return counts;
}

std::int64_t LanguageTrie::descendants_at(int id, int rel_depth) const {
  if (rel_depth == 0) return 1;
  std::int64_t total = 0;
  for (int c = nodes_[static_cast<std::size_t>(id)].first_child; c >= 0;
       c = nodes_[static_cast<std::size_t>(c)].next_sibling)
    total += descendants_at(c, rel_depth - 1);
  return total;
}

std::int64_t LanguageTrie::count_with_middle(std::span<const int> pattern, int K,
                                             int L) const {
  return count_with_pattern(pattern, 0, {}, K, L);
}

std::int64_t LanguageTrie::count_with_pattern(std::span<const int> a, int gap_to_b,
                                              std::span<const int> b, int K,
                                              int L) const {
  const int span =
      std::max(static_cast<int>(a.size()), gap_to_b + static_cast<int>(b.size()));
  if (K < 0 || L < 0) throw InsufficientDepth("count_with_pattern: negative margin");
  if (K + span + L > depth_)
    throw InsufficientDepth("count_with_pattern: needs depth " +
                            std::to_string(K + span + L) + " > " +
                            std::to_string(depth_));
  // Required symbol per position of the middle block; -1 free, -2 conflict.
  std::vector<int> req(static_cast<std::size_t>(span), -1);
  for (std::size_t i = 0; i < a.size(); ++i) req[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) {
    auto p = static_cast<std::size_t>(gap_to_b) + i;
    if (req[p] >= 0 && req[p] != b[i]) return 0;
    req[p] = b[i];
  }

  // DFS through free prefix levels, constrained middle, free suffix levels.
  const int total = K + span + L;
  std::function<std::int64_t(int, int)> go = [&](int id, int pos) -> std::int64_t {
    if (pos == total) return 1;
    const int need =
        (pos >= K && pos < K + span) ? req[static_cast<std::size_t>(pos - K)] : -1;
    std::int64_t acc = 0;
    if (need >= 0) {
      const int c = child(id, need);
      return c < 0 ? 0 : go(c, pos + 1);
    }
    for (int c = nodes_[static_cast<std::size_t>(id)].first_child; c >= 0;
         c = nodes_[static_cast<std::size_t>(c)].next_sibling)
      acc += go(c, pos + 1);
    return acc;
  };
  return go(kRoot, 0);
}

void LanguageTrie::suffix_close(const Table* table) {
  // Process by increasing depth so a word's suffix chain is handled by the
  // time its own suffix is inspected.
  bool changed = true;
  while (changed) {
    changed = false;
    const std::size_t upto = nodes_.size();
    std::vector<std::vector<int>> words;
    words.reserve(64);
    visit([&](int id, const std::vector<int>& w) {
      if (static_cast<std::size_t>(id) >= upto) return;
      if (w.size() < 2) return;
      std::span<const int> suffix(w.data() + 1, w.size() - 1);
      if (contains(suffix)) return;
      PhasePoint wit{-1, 0, 0};
      const PhasePoint& pw = nodes_[static_cast<std::size_t>(id)].witness;
      bool has = false;
      if (table && pw.scatterer >= 0) {
        try {
          wit = forward(*table, pw).next;
          has = true;
        } catch (const Error&) {
        }
      }
      insert(suffix, has ? &wit : nullptr);
      changed = true;
    });
  }
}

void LanguageTrie::visit(
    const std::function<void(int, const std::vector<int>&)>& f) const {
  std::vector<int> word;
  std::function<void(int)> go = [&](int id) {
    if (id != kRoot) f(id, word);
    for (int c = nodes_[static_cast<std::size_t>(id)].first_child; c >= 0;
         c = nodes_[static_cast<std::size_t>(c)].next_sibling) {
      word.push_back(nodes_[static_cast<std::size_t>(c)].symbol);
      go(c);
      word.pop_back();
    }
  };
  go(kRoot);
}

LanguageTrie LanguageTrie::reversed() const {
  LanguageTrie rev(depth_);
  rev.table_hash = table_hash;
  rev.budget_exceeded = budget_exceeded;
  rev.seed_budget = seed_budget;
  visit([&](int id, const std::vector<int>& w) {
    (void)id;
    std::vector<int> r(w.rbegin(), w.rend());
    rev.insert(r);
  });
  rev.recount();
  return rev;
}

namespace {
template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void LanguageTrie::save(std::ostream& out) const {
  // Header: magic, depth, table hash, budget flag, seed budget, node count.
  out.write("BLTRIE01", 8);
  put<std::int32_t>(out, depth_);
  put<std::uint64_t>(out, table_hash);
  put<std::uint8_t>(out, budget_exceeded ? 1 : 0);
  put<std::uint64_t>(out, seed_budget);
  put<std::uint64_t>(out, nodes_.size());
  for (const Node& n : nodes_) {
    put<std::int32_t>(out, n.symbol);
    put<std::int32_t>(out, n.parent);
    put<std::int32_t>(out, n.witness.scatterer);
    put<double>(out, n.witness.s);
    put<double>(out, n.witness.phi);
  }
}

LanguageTrie LanguageTrie::load(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (std::string(magic, 8) != "BLTRIE01")
    throw MissingArtifact("trie cache: bad magic");
  LanguageTrie t(get<std::int32_t>(in));
  t.table_hash = get<std::uint64_t>(in);
  t.budget_exceeded = get<std::uint8_t>(in) != 0;
  t.seed_budget = get<std::uint64_t>(in);
  const auto count = get<std::uint64_t>(in);
  t.nodes_.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Node& n = t.nodes_[i];
    n.symbol = get<std::int32_t>(in);
    n.parent = get<std::int32_t>(in);
    n.witness.scatterer = get<std::int32_t>(in);
    n.witness.s = get<double>(in);
    n.witness.phi = get<double>(in);
    n.first_child = -1;
    n.next_sibling = -1;
  }
  if (!in) throw MissingArtifact("trie cache: truncated");
  // Rebuild child links; nodes were saved in creation order (parents first),
  // and sibling lists must come out sorted by symbol.
  for (std::uint64_t i = 1; i < count; ++i) {
    Node& n = t.nodes_[i];
    auto& parent = t.nodes_[static_cast<std::size_t>(n.parent)];
    int prev = -1, c = parent.first_child;
    while (c >= 0 && t.nodes_[static_cast<std::size_t>(c)].symbol < n.symbol) {
      prev = c;
      c = t.nodes_[static_cast<std::size_t>(c)].next_sibling;
    }
    n.next_sibling = c;
    if (prev < 0)
      parent.first_child = static_cast<int>(i);
    else
      t.nodes_[static_cast<std::size_t>(prev)].next_sibling = static_cast<int>(i);
  }
  t.recount();
  return t;
}

}  // namespace billiard
