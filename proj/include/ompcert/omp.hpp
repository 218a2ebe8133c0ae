#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ompcert/errors.hpp"
#include "ompcert/least_squares.hpp"
#include "ompcert/sensing.hpp"
#include "ompcert/types.hpp"

namespace ompcert {

/// n-vector with an explicit, strictly increasing support and the nonzero
/// values aligned with it.
struct SparseSignal {
  Index n = 0;
  IndexSet support;
  Vector values;

  static SparseSignal from_parts(Index n, IndexSet support, Vector values) {
    if (static_cast<Index>(support.size()) != values.size())
      throw Error("support/values size mismatch");
    if (!std::is_sorted(support.begin(), support.end()) ||
        std::adjacent_find(support.begin(), support.end()) != support.end())
      throw Error("support must be strictly increasing");
    if (!support.empty() && (support.front() < 0 || support.back() >= n))
      throw Error("support index out of range");
    for (Index i = 0; i < values.size(); ++i)
      if (values(i) == 0.0) throw Error("stored values must be nonzero");
    return SparseSignal{n, std::move(support), std::move(values)};
  }

  Vector dense() const {
    Vector x = Vector::Zero(n);
    for (std::size_t i = 0; i < support.size(); ++i)
      x(support[i]) = values(static_cast<Index>(i));
    return x;
  }

  int sparsity() const { return static_cast<int>(support.size()); }

  double min_abs_coeff() const {
    double m = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < values.size(); ++i)
      m = std::min(m, std::abs(values(i)));
    return m;
  }
};

/// The three halting criteria: a fixed number of selections, residual
/// l2 norm at or below a threshold, or max column correlation at or below
/// a threshold. Thresholds are checked before each selection.
struct FixedIterations {
  int count = 0;
};
struct ResidualL2 {
  double threshold = 0.0;
};
struct CorrelationLInf {
  double threshold = 0.0;
};
using StoppingRule = std::variant<FixedIterations, ResidualL2, CorrelationLInf>;

enum class HaltReason { fixed_iterations, residual_l2, correlation_linf, max_iterations };

inline const char* to_string(HaltReason reason) {
  switch (reason) {
    case HaltReason::fixed_iterations: return "fixed_iterations";
    case HaltReason::residual_l2: return "residual_l2";
    case HaltReason::correlation_linf: return "correlation_linf";
    case HaltReason::max_iterations: return "max_iterations";
  }
  return "unknown";
}

/// All column correlations with a residual, entry i = <A_i, r>.
struct CorrelationVector {
  Vector values;
};

inline CorrelationVector correlations(const SenseMatrix& a, const Vector& r) {
  if (r.size() != a.rows()) throw Error("residual length must equal row count");
  return CorrelationVector{a.mat().transpose() * r};
}

/// Argmax of |c_i| over indices not yet selected, ties to the smallest
/// index, comparisons exact. The residual is orthogonal to selected
/// columns, so the global argmax never lies on one; if a selected column
/// beats every free column by more than a small relative tolerance this
/// throws OrthogonalityViolatedError (numerical breakdown).
inline Index select_index(const CorrelationVector& c,
                          const IndexSet& already_selected) {
  const Index n = c.values.size();
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (Index i : already_selected) taken[static_cast<std::size_t>(i)] = true;

  Index best_free = -1;
  double best_free_abs = -1.0;
  double best_taken_abs = -1.0;
  Index best_taken = -1;
  for (Index i = 0; i < n; ++i) {
    const double v = std::abs(c.values(i));
    if (taken[static_cast<std::size_t>(i)]) {
      if (v > best_taken_abs) {
        best_taken_abs = v;
        best_taken = i;
      }
    } else if (v > best_free_abs) {
      best_free_abs = v;
      best_free = i;
    }
  }
  if (best_free < 0) throw AllSelectedError();
  const double tol = 1e-8 * std::max(best_free_abs, best_taken_abs);
  if (best_taken_abs > best_free_abs + tol)
    throw OrthogonalityViolatedError(best_taken);
  return best_free;
}

/// One completed OMP iteration: the index it added, the refit
/// coefficients on the support so far, and the norms of the refit
/// residual (these drive the next halting check).
struct OmpIteration {
  Index selected_index = -1;
  double residual_l2 = 0.0;
  double correlation_linf = 0.0;
  Vector coefficients;
};

/// Full record of an OMP run.
struct OmpTrace {
  std::vector<OmpIteration> iterations;
  IndexSet final_support;  // in selection order
  Vector estimate;         // dense n-vector, zero off the support
  HaltReason halt_reason = HaltReason::max_iterations;

  IndexSet sorted_support() const {
    IndexSet s = final_support;
    std::sort(s.begin(), s.end());
    return s;
  }
};

/// Orthogonal matching pursuit. Starting from an empty support, each
/// round correlates the residual with every column, adds the best index,
/// and refits all coefficients by least squares on the enlarged support.
/// The stopping rule is evaluated on the residual before each selection,
/// so a y that is already explained yields an empty support. Always halts
/// after at most max_iterations selections.
inline OmpTrace omp_run(const SenseMatrix& a, const Vector& y,
                        const StoppingRule& rule, int max_iterations,
                        const Tolerances& tols = default_tolerances()) {
  if (y.size() != a.rows()) throw Error("y length must equal row count");
  if (max_iterations < 0 || max_iterations > a.rows())
    throw Error("max_iterations must lie in [0, m]");

  OmpTrace trace;
  Vector r = y;
  Vector corr = a.mat().transpose() * r;
  Vector coeffs(0);

  for (int k = 0;; ++k) {
    const double res_norm = r.norm();
    const double corr_inf = corr.size() ? corr.cwiseAbs().maxCoeff() : 0.0;
    bool halted = false;
    if (const auto* fixed = std::get_if<FixedIterations>(&rule)) {
      if (k >= fixed->count) {
        trace.halt_reason = HaltReason::fixed_iterations;
        halted = true;
      }
    } else if (const auto* l2 = std::get_if<ResidualL2>(&rule)) {
      if (res_norm <= l2->threshold) {
        trace.halt_reason = HaltReason::residual_l2;
        halted = true;
      }
    } else if (const auto* linf = std::get_if<CorrelationLInf>(&rule)) {
      if (corr_inf <= linf->threshold) {
        trace.halt_reason = HaltReason::correlation_linf;
        halted = true;
      }
    }
    // every column selected counts as exhausting the iteration budget
    if (!halted && (k >= max_iterations ||
                    static_cast<Index>(trace.final_support.size()) == a.cols())) {
      trace.halt_reason = HaltReason::max_iterations;
      halted = true;
    }
    if (halted) break;

    const Index picked = select_index(CorrelationVector{corr}, trace.final_support);
    trace.final_support.push_back(picked);
    coeffs = least_squares(a, trace.final_support, y, tols);
    r = residual(a, y, trace.final_support, coeffs);
    corr = a.mat().transpose() * r;

    OmpIteration it;
    it.selected_index = picked;
    it.residual_l2 = r.norm();
    it.correlation_linf = corr.cwiseAbs().maxCoeff();
    it.coefficients = coeffs;
    trace.iterations.push_back(std::move(it));
  }

  trace.estimate = Vector::Zero(a.cols());
  for (std::size_t i = 0; i < trace.final_support.size(); ++i)
    trace.estimate(trace.final_support[i]) = coeffs(static_cast<Index>(i));
  return trace;
}

}  // namespace ompcert
