#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "ompcert/errors.hpp"
#include "ompcert/parallel.hpp"
#include "ompcert/sensing.hpp"
#include "ompcert/types.hpp"

namespace ompcert {

/// Exact restricted isometry constant of a matrix at a given order,
/// together with the subset attaining it.
struct RipCertificate {
  int order = 0;
  double delta = 0.0;
  std::uint64_t subsets_examined = 0;
  IndexSet extremal_subset;
};

/// C(n, k) with saturation at 2^63-1 to keep budget checks overflow-safe.
inline std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr std::uint64_t cap = std::numeric_limits<std::int64_t>::max();
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > cap) return cap;
  }
  return static_cast<std::uint64_t>(result);
}

namespace detail {

/// Advances `subset` to the next K-combination of {0..n-1} in
/// lexicographic order; returns false past the last one.
inline bool next_combination(IndexSet& subset, Index n) {
  const int k = static_cast<int>(subset.size());
  int i = k - 1;
  while (i >= 0 && subset[i] == n - k + i) --i;
  if (i < 0) return false;
  ++subset[i];
  for (int j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
  return true;
}

/// The lexicographic rank-`rank` K-combination of {0..n-1}.
inline IndexSet combination_at(std::uint64_t rank, Index n, int k) {
  IndexSet subset(k);
  Index next = 0;
  for (int pos = 0; pos < k; ++pos) {
    for (Index v = next;; ++v) {
      const std::uint64_t below =
          binomial_saturating(static_cast<std::uint64_t>(n - 1 - v),
                              static_cast<std::uint64_t>(k - 1 - pos));
      if (rank < below) {
        subset[pos] = v;
        next = v + 1;
        break;
      }
      rank -= below;
    }
  }
  return subset;
}

/// Isometry defect max(lmax-1, 1-lmin) of the Gram submatrix on `subset`.
inline double subset_defect(const Matrix& gram, const IndexSet& subset,
                            Matrix& scratch) {
  const int k = static_cast<int>(subset.size());
  scratch.resize(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) scratch(i, j) = gram(subset[i], subset[j]);
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  eig.compute(scratch, Eigen::EigenvaluesOnly);
  const auto& values = eig.eigenvalues();
  return std::max(values(k - 1) - 1.0, 1.0 - values(0));
}

}  // namespace detail

/// Exact delta_K by enumerating every K-subset of columns in lexicographic
/// order and taking the extreme eigenvalues of each Gram submatrix. Ties
/// between subsets resolve to the lexicographically smallest, so the
/// certificate is deterministic under any parallel schedule. Throws
/// BudgetExceededError when C(n, K) > budget.
inline RipCertificate rip_exact(const SenseMatrix& a, int order,
                                std::uint64_t budget = 10'000'000) {
  const Index n = a.cols();
  if (order < 1 || order > n) throw Error("rip order must be in [1, n]");
  const std::uint64_t total = binomial_saturating(
      static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(order));
  if (total > budget) throw BudgetExceededError(total, budget);

  const Matrix gram = a.mat().transpose() * a.mat();

  struct Best {
    double delta = -1.0;
    IndexSet subset;
  };
  // Contiguous chunks of the lexicographic enumeration, one slot per chunk;
  // the final reduction is schedule-independent.
  const std::uint64_t chunk_size = 4096;
  const std::uint64_t chunks = (total + chunk_size - 1) / chunk_size;
  std::vector<Best> best_per_chunk(chunks);

  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t begin = c * chunk_size;
    const std::uint64_t end = std::min(begin + chunk_size, total);
    IndexSet subset = detail::combination_at(begin, n, order);
    Matrix scratch;
    Best best;
    for (std::uint64_t r = begin; r < end; ++r) {
      const double defect = detail::subset_defect(gram, subset, scratch);
      // Strictly-greater keeps the first (lexicographically smallest)
      // subset on ties within a chunk.
      if (defect > best.delta) {
        best.delta = defect;
        best.subset = subset;
      }
      if (r + 1 < end) detail::next_combination(subset, n);
    }
    best_per_chunk[c] = std::move(best);
  });

  Best overall;
  for (const auto& candidate : best_per_chunk) {
    if (candidate.delta > overall.delta ||
        (candidate.delta == overall.delta && !candidate.subset.empty() &&
         (overall.subset.empty() || candidate.subset < overall.subset))) {
      overall = candidate;
    }
  }

  RipCertificate cert;
  cert.order = order;
  cert.delta = std::max(overall.delta, 0.0);
  cert.subsets_examined = total;
  cert.extremal_subset = overall.subset;
  return cert;
}

/// The coherence-based RIP bound delta_K <= K * mu. The Gershgorin argument
/// actually gives (K-1) * mu; both are exposed, with the K*mu form as the
/// primary bound.
inline double coherence_rip_bound(const CoherenceValue& mu, int order) {
  if (order < 1) throw Error("order must be >= 1");
  return static_cast<double>(order) * mu.mu;
}

inline double coherence_rip_bound_gershgorin(const CoherenceValue& mu,
                                             int order) {
  if (order < 1) throw Error("order must be >= 1");
  return static_cast<double>(order - 1) * mu.mu;
}

}  // namespace ompcert
