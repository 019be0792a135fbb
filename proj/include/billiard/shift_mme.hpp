#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "billiard/trie.hpp"

namespace billiard {

struct EntropyEstimate {
  std::vector<double> h_n;     // (1/n) log #L_n, index n (0 unused)
  std::vector<double> h_diff;  // log(#L_n / #L_{n-1}), index n (0,1 unused)
  double h_point = 0.0;        // chosen estimate
  double h_lower = 0.0;        // supermultiplicative lower bound via fitted b5
  double b5 = 0.0;             // min #L_{k+n} / (#L_k #L_n)
  int depth = 0;
  int window_from = 0;  // first n of the tail window feeding h_point
};

/// Entropy from trie counts. h_n is the Fekete sequence; h_point is the tail
/// successive-ratio estimate clamped below min h_n, which converges far
/// faster than h_n itself and stays inside the sandwich
/// h_n >= h_point >= h_lower.
EntropyEstimate entropy_estimate(const LanguageTrie& trie);

/// Finite-depth one-sided leaf mass: m+(brackets w) = e^{-N h} (number of
/// depth-N descendants of w). Additive over extensions and exactly
/// shift-scaling by construction.
double leaf_measure_plus(const LanguageTrie& trie, std::span<const int> w, double h);

/// Mirror of leaf_measure_plus on the reversed trie (backward extensions).
double leaf_measure_minus(const LanguageTrie& reversed_trie, std::span<const int> w,
                          double h);

struct MuEstimate {
  double mass = 0.0;
  int margin_back = 0, margin_fwd = 0;
  double h_used = 0.0;
};

/// Two-sided cylinder mass mu([v.w]) by joint extension counting: words of
/// length K + |m| + L whose middle equals the overlap m = v.w, weighted
/// e^{-(K+|m|+1+L)h}. Margins default to the maximal symmetric split of the
/// remaining depth. Restriction to X is realized by full-word admissibility.
MuEstimate product_mu(const LanguageTrie& trie, std::span<const int> v,
                      std::span<const int> w, double h, int margin_back = -1,
                      int margin_fwd = -1);

/// Total mass: sum of product_mu over the one-symbol junction cylinders.
double mu_total(const LanguageTrie& trie, double h);

struct DefectReport {
  double max_rel_defect = 0.0;
  std::int64_t checked = 0;
};

/// Scaling identity (shift of a cylinder scales mass by e^h); compares the
/// stored extension counts against independently recomputed ones.
DefectReport scaling_check(const LanguageTrie& trie, int a, double h,
                           int probe_depth = -1);

/// Additivity of leaf masses over one-symbol extensions.
DefectReport additivity_check(const LanguageTrie& trie, double h);

struct MixingSeries {
  std::vector<int> n;
  std::vector<double> defect;  // normalized mu(A cap sigma^-n B) - mu(A) mu(B)
  double decay_ratio = 0.0;    // fitted geometric ratio of |defect|
};

/// Finite-depth correlation probe between two forward cylinders.
MixingSeries mixing_probe(const LanguageTrie& trie, std::span<const int> A,
                          std::span<const int> B, int n_max, double h);

/// min over the given words of m+(brackets w) e^{|w| h} (fitted c_delta).
double leaf_lower_gibbs_probe(const LanguageTrie& trie,
                              const std::vector<std::vector<int>>& good_words,
                              double h);

/// Exact subshift-of-finite-type oracle: spectral data of the adjacency
/// matrix and the Parry measure evaluator. Validation harness for the
/// estimators above.
struct SftOracle {
  std::vector<std::vector<int>> adjacency;
  double lambda = 0.0;              // spectral radius
  double lambda2 = 0.0;             // modulus of the second eigenvalue
  std::vector<double> left, right;  // eigenvectors, l^T r = 1
  std::vector<double> pi;           // stationary distribution l_i r_i

  double parry(std::span<const int> word) const;
  /// Parry measure of {x : x_{[0,|a|)} = a, x_{[n, n+|b|)} = b}.
  double parry_pair(std::span<const int> a, int gap, std::span<const int> b) const;
};

SftOracle sft_oracle(const std::vector<std::vector<int>>& adjacency);

/// Exact language of the SFT up to `depth` as a LanguageTrie (no witnesses).
LanguageTrie sft_language_trie(const SftOracle& oracle, int depth);

}  // namespace billiard
