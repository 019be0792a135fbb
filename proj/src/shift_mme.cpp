#include "billiard/shift_mme.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "billiard/errors.hpp"
#include "billiard/fit.hpp"

namespace billiard {

EntropyEstimate entropy_estimate(const LanguageTrie& trie) {
  EntropyEstimate est;
  est.depth = trie.depth();
  if (est.depth < 2) throw EmptyTrie("entropy_estimate: depth < 2");
  const auto counts = trie.level_counts();
  if (counts.size() < 3 || counts[1] == 0)
    throw EmptyTrie("entropy_estimate: no words");

  est.h_n.assign(counts.size(), 0.0);
  est.h_diff.assign(counts.size(), 0.0);
  double h_min = std::numeric_limits<double>::infinity();
  int deepest = 0;
  for (int n = 1; n < static_cast<int>(counts.size()); ++n) {
    const auto c = counts[static_cast<std::size_t>(n)];
    if (c == 0) break;
    deepest = n;
    est.h_n[static_cast<std::size_t>(n)] =
        std::log(static_cast<double>(c)) / static_cast<double>(n);
    h_min = std::min(h_min, est.h_n[static_cast<std::size_t>(n)]);
    if (n >= 2)
      est.h_diff[static_cast<std::size_t>(n)] =
          std::log(static_cast<double>(c) /
                   static_cast<double>(counts[static_cast<std::size_t>(n - 1)]));
  }
  if (deepest < 2) throw EmptyTrie("entropy_estimate: needs two populated levels");

  // Tail successive-ratio estimate: median of the last few h_diff values.
  const int tail = std::min(3, deepest - 1);
  est.window_from = deepest - tail + 1;
  std::vector<double> window;
  for (int n = est.window_from; n <= deepest; ++n)
    window.push_back(est.h_diff[static_cast<std::size_t>(n)]);
  std::sort(window.begin(), window.end());
  double h_point = window[window.size() / 2];
  h_point = std::clamp(h_point, 0.0, h_min);
  est.h_point = h_point;

  // Quasisupermultiplicativity fit and the induced lower bound
  // h >= (1/(k+n)) log(b5^2 #L_k #L_n), using #L_{k+n} >= b5 #L_k #L_n and
  // Fekete on the supermultiplicative sequence b5 #L_n.
  double b5 = std::numeric_limits<double>::infinity();
  for (int k = 1; k < deepest; ++k)
    for (int n = 1; k + n <= deepest; ++n) {
      const double denom =
          static_cast<double>(counts[static_cast<std::size_t>(k)]) *
          static_cast<double>(counts[static_cast<std::size_t>(n)]);
      if (denom > 0)
        b5 = std::min(b5, static_cast<double>(counts[static_cast<std::size_t>(k + n)]) /
                              denom);
    }
  est.b5 = std::isfinite(b5) ? b5 : 0.0;
  double h_lower = 0.0;
  if (est.b5 > 0) {
    for (int k = 1; k <= deepest; ++k)
      for (int n = k; k + n <= 2 * deepest; ++n) {
        if (n > deepest) break;
        const double v =
            (2.0 * std::log(est.b5) +
             std::log(static_cast<double>(counts[static_cast<std::size_t>(k)])) +
             std::log(static_cast<double>(counts[static_cast<std::size_t>(n)]))) /
            static_cast<double>(k + n);
        h_lower = std::max(h_lower, v);
      }
  }
  est.h_lower = std::min(h_lower, est.h_point);
  return est;
}

double leaf_measure_plus(const LanguageTrie& trie, std::span<const int> w, double h) {
  const int node = trie.find(w);
  if (node < 0) throw WordNotInTrie("leaf_measure_plus");
  return std::exp(-h * trie.depth()) * static_cast<double>(trie.node(node).ext_count);
}

double leaf_measure_minus(const LanguageTrie& reversed_trie, std::span<const int> w,
                          double h) {
  std::vector<int> rev(w.rbegin(), w.rend());
  return leaf_measure_plus(reversed_trie, rev, h);
}

MuEstimate product_mu(const LanguageTrie& trie, std::span<const int> v,
                      std::span<const int> w, double h, int margin_back,
                      int margin_fwd) {
  if (v.empty() || w.empty() || v.back() != w.front())
    throw JunctionMismatch("product_mu: junction symbols differ");
  std::vector<int> middle(v.begin(), v.end());
  middle.insert(middle.end(), w.begin() + 1, w.end());
  const int m = static_cast<int>(middle.size());
  const int avail = trie.depth() - m;
  if (avail < 2) throw InsufficientDepth("product_mu: no room for margins");
  MuEstimate est;
  est.margin_back = margin_back >= 0 ? margin_back : (avail + 1) / 2;
  est.margin_fwd = margin_fwd >= 0 ? margin_fwd : avail - (avail + 1) / 2;
  est.h_used = h;
  const std::int64_t count =
      trie.count_with_middle(middle, est.margin_back, est.margin_fwd);
  // One-sided masses both carry the junction symbol, hence the +1.
  est.mass = std::exp(-h * (est.margin_back + m + 1 + est.margin_fwd)) *
             static_cast<double>(count);
  return est;
}

double mu_total(const LanguageTrie& trie, double h) {
  double total = 0.0;
  for (int c = trie.node(LanguageTrie::kRoot).first_child; c >= 0;
       c = trie.node(c).next_sibling) {
    const int a = trie.node(c).symbol;
    const int word[1] = {a};
    total += product_mu(trie, word, word, h).mass;
  }
  return total;
}

DefectReport scaling_check(const LanguageTrie& trie, int a, double h,
                           int probe_depth) {
  // m+(sigma Z) for Z = [aw] covered at depth N-1 equals e^{-(N-1)h} times the
  // extension count of aw, while e^h m+([aw]) = e^h e^{-Nh} times the same
  // count. The counts are compared through independent code paths (stored
  // ext_count vs a fresh descendant DFS).
  DefectReport rep;
  const int N = trie.depth();
  if (probe_depth < 0) probe_depth = std::min(N - 1, 6);
  const int anode = trie.child(LanguageTrie::kRoot, a);
  if (anode < 0) throw WordNotInTrie("scaling_check: symbol not in trie");
  std::function<void(int, int)> go = [&](int id, int depth) {
    if (depth > probe_depth) return;
    const double stored = static_cast<double>(trie.node(id).ext_count);
    const double recomputed =
        static_cast<double>(trie.descendants_at(id, N - depth));
    const double lhs = std::exp(-h * (N - 1)) * recomputed;
    const double rhs = std::exp(h) * std::exp(-h * N) * stored;
    if (rhs > 0) {
      rep.max_rel_defect =
          std::max(rep.max_rel_defect, std::abs(lhs - rhs) / rhs);
      ++rep.checked;
    }
    for (int c = trie.node(id).first_child; c >= 0; c = trie.node(c).next_sibling)
      go(c, depth + 1);
  };
  go(anode, 1);
  return rep;
}

DefectReport additivity_check(const LanguageTrie& trie, double h) {
  DefectReport rep;
  const int N = trie.depth();
  const double scale = std::exp(-h * N);
  std::function<void(int, int)> go = [&](int id, int depth) {
    if (depth >= N) return;
    const auto& nd = trie.node(id);
    if (id != LanguageTrie::kRoot && nd.first_child >= 0) {
      double sum = 0.0;
      for (int c = nd.first_child; c >= 0; c = trie.node(c).next_sibling)
        sum += scale * static_cast<double>(trie.node(c).ext_count);
      const double mass = scale * static_cast<double>(nd.ext_count);
      if (mass > 0) {
        rep.max_rel_defect =
            std::max(rep.max_rel_defect, std::abs(mass - sum) / mass);
        ++rep.checked;
      }
    }
    for (int c = nd.first_child; c >= 0; c = trie.node(c).next_sibling)
      go(c, depth + 1);
  };
  go(LanguageTrie::kRoot, 0);
  return rep;
}

MixingSeries mixing_probe(const LanguageTrie& trie, std::span<const int> A,
                          std::span<const int> B, int n_max, double h) {
  MixingSeries series;
  const double total = mu_total(trie, h);
  if (total <= 0) throw EmptyTrie("mixing_probe: zero total mass");
  // The forward cylinder [A] as a junction cylinder [v.w]: v is the single
  // symbol A_0 shared with w = A, so the overlap is exactly [A].
  const double muA = product_mu(trie, A.first(1), A, h).mass / total;
  const double muB = product_mu(trie, B.first(1), B, h).mass / total;
  bool any = false;
  for (int n = 0; n <= n_max; ++n) {
    const int span = std::max(static_cast<int>(A.size()),
                              n + static_cast<int>(B.size()));
    const int avail = trie.depth() - span;
    if (avail < 2) break;
    const int K = (avail + 1) / 2, L = avail - K;
    std::int64_t count;
    try {
      count = trie.count_with_pattern(A, n, B, K, L);
    } catch (const InsufficientDepth&) {
      break;
    }
    const double mass =
        std::exp(-h * (K + span + 1 + L)) * static_cast<double>(count) / total;
    series.n.push_back(n);
    series.defect.push_back(mass - muA * muB);
    any = true;
  }
  if (!any) throw InsufficientDepth("mixing_probe: depth too small");

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < series.n.size(); ++i) {
    if (series.n[i] < static_cast<int>(A.size())) continue;  // overlap regime
    const double d = std::abs(series.defect[i]);
    if (d > 1e-14) {
      xs.push_back(series.n[i]);
      ys.push_back(std::log(d));
    }
  }
  const LinFit fit = linear_fit(xs, ys);
  series.decay_ratio = xs.size() >= 2 ? std::exp(fit.slope) : 0.0;
  return series;
}

double leaf_lower_gibbs_probe(const LanguageTrie& trie,
                              const std::vector<std::vector<int>>& good_words,
                              double h) {
  double c = std::numeric_limits<double>::infinity();
  for (const auto& w : good_words) {
    const int node = trie.find(w);
    if (node < 0) continue;
    const double mass = std::exp(-h * trie.depth()) *
                        static_cast<double>(trie.node(node).ext_count);
    c = std::min(c, mass * std::exp(h * static_cast<double>(w.size())));
  }
  if (!std::isfinite(c))
    throw InsufficientData("leaf_lower_gibbs_probe: no usable words");
  return c;
}

namespace {

// Power iteration on a small nonnegative matrix.
double power_iter(const std::vector<std::vector<double>>& m, std::vector<double>* vec,
                  int iters = 20000, double tol = 1e-14) {
  const std::size_t n = m.size();
  std::vector<double> v(n, 1.0), w(n);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) w[i] += m[i][j] * v[j];
      norm = std::max(norm, std::abs(w[i]));
    }
    if (norm == 0.0) break;
    for (auto& x : w) x /= norm;
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(w[i] - v[i]));
    v = w;
    lambda = norm;
    if (resid < tol && it > 3) break;
  }
  *vec = v;
  return lambda;
}

}  // namespace

double SftOracle::parry(std::span<const int> word) const {
  if (word.empty()) return 1.0;
  const auto n = adjacency.size();
  if (static_cast<std::size_t>(word[0]) >= n) return 0.0;
  double p = pi[static_cast<std::size_t>(word[0])];
  for (std::size_t i = 1; i < word.size(); ++i) {
    const auto a = static_cast<std::size_t>(word[i - 1]);
    const auto b = static_cast<std::size_t>(word[i]);
    if (b >= n || adjacency[a][b] == 0) return 0.0;
    p *= right[b] / (lambda * right[a]);
  }
  return p;
}

double SftOracle::parry_pair(std::span<const int> a, int gap,
                             std::span<const int> b) const {
  // Stationary Markov chain: P(A at 0, B at gap). For gap < |a| the blocks
  // overlap and must agree.
  const int n_states = static_cast<int>(adjacency.size());
  if (gap < static_cast<int>(a.size())) {
    std::vector<int> merged(a.begin(), a.end());
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto p = static_cast<std::size_t>(gap) + i;
      if (p < merged.size()) {
        if (merged[p] != b[i]) return 0.0;
      } else {
        merged.push_back(b[i]);
      }
    }
    return parry(merged);
  }
  // P(B | last of A) after gap - |a| + 1 steps of the transition matrix.
  const int steps = gap - static_cast<int>(a.size()) + 1;
  std::vector<double> dist(static_cast<std::size_t>(n_states), 0.0);
  dist[static_cast<std::size_t>(a.back())] = 1.0;
  for (int t = 0; t < steps; ++t) {
    std::vector<double> nx(static_cast<std::size_t>(n_states), 0.0);
    for (int i = 0; i < n_states; ++i) {
      if (dist[static_cast<std::size_t>(i)] == 0.0) continue;
      for (int j = 0; j < n_states; ++j) {
        if (adjacency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
          const double pij = right[static_cast<std::size_t>(j)] /
                             (lambda * right[static_cast<std::size_t>(i)]);
          nx[static_cast<std::size_t>(j)] += dist[static_cast<std::size_t>(i)] * pij;
        }
      }
    }
    dist = std::move(nx);
  }
  // Conditional probability of the B block from its first symbol.
  double pb_cond = dist[static_cast<std::size_t>(b[0])];
  for (std::size_t i = 1; i < b.size(); ++i) {
    const auto x = static_cast<std::size_t>(b[i - 1]);
    const auto y = static_cast<std::size_t>(b[i]);
    if (adjacency[x][y] == 0) return 0.0;
    pb_cond *= right[y] / (lambda * right[x]);
  }
  return parry(a) * pb_cond;
}

SftOracle sft_oracle(const std::vector<std::vector<int>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw BadConfig("sft_oracle: empty matrix");
  // Irreducibility: strong connectivity of the transition graph.
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t u = 0; u < n; ++u) {
        const int edge = transpose ? adjacency[u][v] : adjacency[v][u];
        if (edge && !seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
      }
    }
    for (char c : seen)
      if (!c) return false;
    return true;
  };
  if (!reach(false) || !reach(true))
    throw ReducibleMatrix("sft_oracle: adjacency not irreducible");

  SftOracle o;
  o.adjacency = adjacency;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> at(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = adjacency[i][j];
      at[j][i] = adjacency[i][j];
    }
  o.lambda = power_iter(a, &o.right);
  power_iter(at, &o.left);
  // Normalize l^T r = 1 and pi as probabilities.
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += o.left[i] * o.right[i];
  for (std::size_t i = 0; i < n; ++i) o.left[i] /= dot;
  o.pi.resize(n);
  double pisum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    o.pi[i] = o.left[i] * o.right[i];
    pisum += o.pi[i];
  }
  for (auto& p : o.pi) p /= pisum;

  // |lambda_2| via deflation + growth-rate estimate (handles complex pairs
  // and sign oscillation).
  std::vector<std::vector<double>> b = a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      b[i][j] -= o.lambda * o.right[i] * o.left[j];
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.37 * static_cast<double>(i);
  auto norm2 = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double t : x) s += t * t;
    return std::sqrt(s);
  };
  double n_lo = 0.0, n_hi = 0.0;
  const int k_lo = 30, k_hi = 60;
  for (int it = 1; it <= k_hi; ++it) {
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i] += b[i][j] * v[j];
    v = w;
    const double nv = norm2(v);
    if (it == k_lo) n_lo = nv;
    if (it == k_hi) n_hi = nv;
    if (nv == 0.0) break;
  }
  o.lambda2 = (n_lo > 0 && n_hi > 0)
                  ? std::pow(n_hi / n_lo, 1.0 / (k_hi - k_lo))
                  : 0.0;
  return o;
}

LanguageTrie sft_language_trie(const SftOracle& oracle, int depth) {
  LanguageTrie trie(depth);
  const int n = static_cast<int>(oracle.adjacency.size());
  std::vector<int> word;
  std::function<void(int)> go = [&](int last) {
    if (static_cast<int>(word.size()) == depth) return;
    for (int next = 0; next < n; ++next) {
      if (last >= 0 &&
          oracle.adjacency[static_cast<std::size_t>(last)]
                          [static_cast<std::size_t>(next)] == 0)
        continue;
      word.push_back(next);
      trie.insert(word);
      go(next);
      word.pop_back();
    }
  };
  go(-1);
  trie.recount();
  return trie;
}

}  // namespace billiard
