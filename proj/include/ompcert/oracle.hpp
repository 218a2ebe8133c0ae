#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ompcert/guarantees.hpp"
#include "ompcert/least_squares.hpp"
#include "ompcert/omp.hpp"
#include "ompcert/parallel.hpp"
#include "ompcert/rip.hpp"
#include "ompcert/rng.hpp"
#include "ompcert/sensing.hpp"

namespace ompcert {

/// Best support of a given size found by brute force.
struct SupportFit {
  IndexSet support;   // sorted
  Vector coefficients;
  double residual_l2 = 0.0;
};

/// Result of the exhaustive size-limited support search. `best` minimizes
/// the residual over supports of size <= max_size; `best_strict` does the
/// same over sizes <= max_size - 1 (the strict-inequality reading of the
/// sparsity constraint). Rank-deficient subsets are skipped and counted.
struct ExhaustiveResult {
  SupportFit best;
  SupportFit best_strict;
  std::uint64_t subsets_examined = 0;
  std::uint64_t rank_deficient_skipped = 0;
};

/// Exact combinatorial solution of the sparse least-squares problem:
/// enumerate every support of size 0..K in lexicographic order, solve the
/// least squares on each, keep the smallest residual. Ties resolve to the
/// smaller support, then lexicographically. Throws BudgetExceededError if
/// the total subset count exceeds `budget`.
inline ExhaustiveResult exhaustive_best_support(const SenseMatrix& a,
                                                const Vector& y, int max_size,
                                                std::uint64_t budget = 10'000'000) {
  const Index n = a.cols();
  if (max_size < 0 || max_size > n) throw Error("support size out of range");
  std::uint64_t total = 0;
  for (int k = 0; k <= max_size; ++k) {
    total += binomial_saturating(static_cast<std::uint64_t>(n),
                                 static_cast<std::uint64_t>(k));
    if (total > budget) throw BudgetExceededError(total, budget);
  }

  ExhaustiveResult result;
  result.best.residual_l2 = y.norm();       // empty support
  result.best_strict.residual_l2 = y.norm();
  result.subsets_examined = 1;

  auto consider = [&](SupportFit& slot, const IndexSet& support,
                      const Vector& coeffs, double res) {
    const bool better =
        res < slot.residual_l2 ||
        (res == slot.residual_l2 &&
         (support.size() < slot.support.size() ||
          (support.size() == slot.support.size() && support < slot.support)));
    if (better) {
      slot.support = support;
      slot.coefficients = coeffs;
      slot.residual_l2 = res;
    }
  };

  for (int k = 1; k <= max_size; ++k) {
    IndexSet support(k);
    for (int i = 0; i < k; ++i) support[i] = i;
    bool more = k <= n;
    while (more) {
      ++result.subsets_examined;
      try {
        const Vector coeffs = least_squares(a, support, y);
        const double res = residual(a, y, support, coeffs).norm();
        consider(result.best, support, coeffs, res);
        if (k < max_size) consider(result.best_strict, support, coeffs, res);
      } catch (const RankDeficientError&) {
        ++result.rank_deficient_skipped;
      }
      more = detail::next_combination(support, n);
    }
  }
  return result;
}

/// One verified inequality: ok means lhs <= rhs + slack; margin is
/// lhs - rhs (positive margin above slack = violation).
struct InequalityCheck {
  bool ok = true;
  double margin = 0.0;

  static InequalityCheck of(double lhs, double rhs, double slack) {
    return InequalityCheck{lhs <= rhs + slack, lhs - rhs};
  }
};

namespace detail {

/// x restricted to the complement of T, as a dense n-vector.
inline Vector restrict_off(const Vector& x, const IndexSet& t) {
  Vector out = x;
  for (Index i : t) out(i) = 0.0;
  return out;
}

/// beta = (I - A_T^+ A) x as a dense n-vector: x minus, on T, the
/// least-squares coefficients of Ax against the T columns.
inline Vector deflate_through_support(const SenseMatrix& a, const Vector& x,
                                      const IndexSet& t) {
  Vector beta = x;
  if (t.empty()) return beta;
  const Vector coeffs = least_squares(a, t, a.mat() * x);
  for (std::size_t i = 0; i < t.size(); ++i)
    beta(t[i]) -= coeffs(static_cast<Index>(i));
  return beta;
}

}  // namespace detail

/// Checks the two cross-Gram inequalities for a K-sparse x, T a subset of
/// its support, and delta the exact constant of order K:
///   1. ||A_T^* A x_{T^c}||_2 <= delta ||x_{T^c}||_2
///   2. ||(A_T^* A_T)^{-1} v||_2 <= ||v||_2 / (1 - delta)  for v = x on T.
/// Empty index sets follow the zero-norm convention (0 <= 0 holds).
inline std::pair<InequalityCheck, InequalityCheck> verify_lemma_21(
    const SenseMatrix& a, const SparseSignal& x, const IndexSet& t,
    double delta, double slack = 1e-10) {
  const Vector dense = x.dense();
  const Vector off = detail::restrict_off(dense, t);
  InequalityCheck part1{true, 0.0};
  InequalityCheck part2{true, 0.0};
  if (!t.empty()) {
    const double lhs1 = (a.columns(t).transpose() * (a.mat() * off)).norm();
    part1 = InequalityCheck::of(lhs1, delta * off.norm(), slack);
    if (delta < 1.0) {
      Vector on_t(static_cast<Index>(t.size()));
      for (std::size_t i = 0; i < t.size(); ++i)
        on_t(static_cast<Index>(i)) = dense(t[i]);
      const Matrix gram = a.columns(t).transpose() * a.columns(t);
      const Vector solved = gram.ldlt().solve(on_t);
      part2 = InequalityCheck::of(solved.norm(), on_t.norm() / (1.0 - delta),
                                  slack);
    }
  }
  return {part1, part2};
}

/// Checks the projected-Gram sandwich (with delta_k) and the deflated
/// lower bound (with delta_kp1, the safer reading of the source's
/// ambiguous order):
///   1. (1-d_K)||x_{O\T}|| <= ||A_{O\T}^* (I-P_T) A x_{O\T}|| <= (1+d_K)||x_{O\T}||
///   2. (1-d_{K+1}) ||x_{T^c}|| <= ||A (I - A_T^+ A) x||.
/// Returned as {sandwich both sides, lower bound}; the sandwich check's
/// margin is the worse of its two sides.
inline std::pair<InequalityCheck, InequalityCheck> verify_lemma_22(
    const SenseMatrix& a, const SparseSignal& x, const IndexSet& t,
    double delta_k, double delta_kp1, double slack = 1e-10) {
  const Vector dense = x.dense();
  IndexSet omega_minus_t;
  std::set_difference(x.support.begin(), x.support.end(), t.begin(), t.end(),
                      std::back_inserter(omega_minus_t));

  InequalityCheck part1{true, 0.0};
  if (!omega_minus_t.empty()) {
    Vector rest = Vector::Zero(dense.size());
    for (Index i : omega_minus_t) rest(i) = dense(i);
    const Vector projected = project_out(a, t, a.mat() * rest);
    const double mid = (a.columns(omega_minus_t).transpose() * projected).norm();
    const double base = rest.norm();
    const InequalityCheck lower =
        InequalityCheck::of((1.0 - delta_k) * base, mid, slack);
    const InequalityCheck upper =
        InequalityCheck::of(mid, (1.0 + delta_k) * base, slack);
    part1.ok = lower.ok && upper.ok;
    part1.margin = std::max(lower.margin, upper.margin);
  }

  const Vector beta = detail::deflate_through_support(a, dense, t);
  const double lhs2 = (1.0 - delta_kp1) * detail::restrict_off(dense, t).norm();
  const InequalityCheck part2 =
      InequalityCheck::of(lhs2, (a.mat() * beta).norm(), slack);
  return {part1, part2};
}

/// Checks ||(I - A_T^+ A) x||_2 <= ||x_{T^c}||_2 / (1 - delta_K).
inline InequalityCheck verify_lemma_23(const SenseMatrix& a,
                                       const SparseSignal& x, const IndexSet& t,
                                       double delta, double slack = 1e-10) {
  if (delta >= 1.0) return InequalityCheck{true, 0.0};
  const Vector dense = x.dense();
  const Vector beta = detail::deflate_through_support(a, dense, t);
  const double rhs = detail::restrict_off(dense, t).norm() / (1.0 - delta);
  return InequalityCheck::of(beta.norm(), rhs, slack);
}

/// Checks the off-support correlation bound: for a K-sparse v and the
/// exact constant of order K+1,
///   max_{i not in supp(v)} |<A_i, A v>| <= delta_{K+1} ||v||_2.
inline InequalityCheck verify_offsupport_correlation(const SenseMatrix& a,
                                                     const SparseSignal& v,
                                                     double delta_kp1,
                                                     double slack = 1e-10) {
  const Vector image = a.mat() * v.dense();
  const Vector corr = a.mat().transpose() * image;
  double lhs = 0.0;
  std::size_t next = 0;
  for (Index i = 0; i < a.cols(); ++i) {
    if (next < v.support.size() && v.support[next] == i) {
      ++next;
      continue;
    }
    lhs = std::max(lhs, std::abs(corr(i)));
  }
  return InequalityCheck::of(lhs, delta_kp1 * v.dense().norm(), slack);
}

/// Which statement a randomized verifier suite exercises.
enum class LemmaId { lemma_21, lemma_22, lemma_23, offsupport_correlation };

inline const char* to_string(LemmaId id) {
  switch (id) {
    case LemmaId::lemma_21: return "2.1";
    case LemmaId::lemma_22: return "2.2";
    case LemmaId::lemma_23: return "2.3";
    case LemmaId::offsupport_correlation: return "offsupport";
  }
  return "unknown";
}

/// Aggregate outcome of a randomized verifier suite.
struct LemmaSuiteResult {
  std::string lemma;
  std::uint64_t checks_run = 0;
  std::uint64_t violations = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  /// Instances redrawn because the inequality was inapplicable there
  /// (the exact constant was >= 1, making 1/(1-delta) meaningless).
  std::uint64_t redraws = 0;
  /// Lemma 2.2 only: violation count of the lower bound under the
  /// stricter delta_K reading. Informational, not part of `violations`.
  std::uint64_t informational_violations = 0;
};

namespace detail {

struct LemmaInstance {
  SenseMatrix a;
  SparseSignal x;
  IndexSet t;
  double delta_k = 0.0;
  double delta_kp1 = 0.0;
  std::uint64_t redraws = 0;
};

/// Random instance with n in [8,14], m in [40,79], K in [1,4], redrawn
/// until delta_{K+1} < 0.99 so the verified bounds are applicable.
inline LemmaInstance draw_lemma_instance(std::uint64_t seed) {
  Rng rng(seed);
  const Index n = 8 + static_cast<Index>(rng.uniform_below(7));
  const Index m = 40 + static_cast<Index>(rng.uniform_below(40));
  const int sparsity = 1 + static_cast<int>(rng.uniform_below(4));

  std::uint64_t redraws = 0;
  while (true) {
    const std::uint64_t matrix_seed = rng.next_u64();
    SenseMatrix a = gen_gaussian_matrix(m, n, matrix_seed);
    const double delta_kp1 = rip_exact(a, sparsity + 1).delta;
    if (delta_kp1 >= 0.99) {
      ++redraws;
      continue;
    }
    const double delta_k = rip_exact(a, sparsity).delta;

    // random support, values with magnitude in [0.5, 2.5] and random sign
    std::vector<Index> all(n);
    for (Index i = 0; i < n; ++i) all[i] = i;
    for (int i = 0; i < sparsity; ++i) {
      const auto j = i + rng.uniform_below(static_cast<std::uint64_t>(n - i));
      std::swap(all[i], all[j]);
    }
    IndexSet support(all.begin(), all.begin() + sparsity);
    std::sort(support.begin(), support.end());
    Vector values(sparsity);
    for (int i = 0; i < sparsity; ++i) {
      const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      values(i) = sign * (0.5 + 2.0 * rng.uniform01());
    }
    SparseSignal x = SparseSignal::from_parts(n, support, values);

    const auto t_size = rng.uniform_below(static_cast<std::uint64_t>(sparsity) + 1);
    IndexSet shuffled = x.support;
    for (std::size_t i = 0; i + 1 < shuffled.size(); ++i) {
      const auto j = i + rng.uniform_below(shuffled.size() - i);
      std::swap(shuffled[i], shuffled[j]);
    }
    IndexSet t(shuffled.begin(), shuffled.begin() + t_size);
    std::sort(t.begin(), t.end());
    return LemmaInstance{std::move(a), std::move(x), std::move(t),
                         delta_k, delta_kp1, redraws};
  }
}

}  // namespace detail

/// Runs `samples` randomized instances of one lemma verifier with exact
/// restricted isometry constants. Instances are drawn from per-index seeds
/// derived from master_seed, so the aggregate is independent of the
/// parallel schedule.
inline LemmaSuiteResult run_lemma_suite(LemmaId id, std::uint64_t samples,
                                        std::uint64_t master_seed,
                                        double slack = 1e-10) {
  struct Slot {
    std::uint64_t checks = 0;
    std::uint64_t violations = 0;
    std::uint64_t informational = 0;
    std::uint64_t redraws = 0;
    double worst = -std::numeric_limits<double>::infinity();
  };
  std::vector<Slot> slots(samples);

  parallel_for(samples, [&](std::size_t i) {
    const auto inst = detail::draw_lemma_instance(derive_seed(master_seed, i));
    Slot slot;
    slot.redraws = inst.redraws;
    auto record = [&](const InequalityCheck& check) {
      ++slot.checks;
      if (!check.ok) ++slot.violations;
      slot.worst = std::max(slot.worst, check.margin);
    };
    switch (id) {
      case LemmaId::lemma_21: {
        const auto [part1, part2] =
            verify_lemma_21(inst.a, inst.x, inst.t, inst.delta_k, slack);
        record(part1);
        record(part2);
        break;
      }
      case LemmaId::lemma_22: {
        const auto [part1, part2] = verify_lemma_22(
            inst.a, inst.x, inst.t, inst.delta_k, inst.delta_kp1, slack);
        record(part1);
        record(part2);
        // stricter delta_K reading of the lower bound, tracked separately
        const auto [unused, strict] = verify_lemma_22(
            inst.a, inst.x, inst.t, inst.delta_k, inst.delta_k, slack);
        (void)unused;
        if (!strict.ok) ++slot.informational;
        break;
      }
      case LemmaId::lemma_23:
        record(verify_lemma_23(inst.a, inst.x, inst.t, inst.delta_k, slack));
        break;
      case LemmaId::offsupport_correlation:
        record(verify_offsupport_correlation(inst.a, inst.x, inst.delta_kp1,
                                             slack));
        break;
    }
    slots[i] = slot;
  });

  LemmaSuiteResult result;
  result.lemma = to_string(id);
  for (const auto& slot : slots) {
    result.checks_run += slot.checks;
    result.violations += slot.violations;
    result.informational_violations += slot.informational;
    result.redraws += slot.redraws;
    result.worst_margin = std::max(result.worst_margin, slot.worst);
  }
  return result;
}

}  // namespace ompcert
