#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ompcert/errors.hpp"
#include "ompcert/least_squares.hpp"
#include "ompcert/omp.hpp"
#include "ompcert/sensing.hpp"

namespace ompcert {

/// Noise models the recovery guarantees speak about: an l2-norm ball, an
/// l-infinity bound on the column correlations, or white Gaussian noise.
struct L2Ball {
  double b2 = 0.0;
};
struct LInfCorrelation {
  double binf = 0.0;
};
struct GaussianNoise {
  double sigma = 0.0;
};
using NoiseSpec = std::variant<L2Ball, LInfCorrelation, GaussianNoise>;

/// The isometry-constant order every guarantee in this module reads its
/// delta argument at. The source inequalities are stated with a constant
/// one order above the sparsity (delta_{K+1}); keeping the resolution in
/// one place makes the alternative delta_K reading a one-line change.
inline int guarantee_delta_order(int sparsity) { return sparsity + 1; }

/// Threshold 1/(sqrt(K)+3): delta_{K+1} below it makes every denominator
/// gap in this module positive.
inline double delta_threshold(int sparsity) {
  if (sparsity < 1) throw Error("sparsity must be >= 1");
  return 1.0 / (std::sqrt(static_cast<double>(sparsity)) + 3.0);
}

/// The denominator gap (1-delta)^2 - delta*(1+sqrt(K)); positive whenever
/// delta < delta_threshold(K).
inline double lemma31_gap(double delta, int sparsity) {
  if (sparsity < 1) throw Error("sparsity must be >= 1");
  if (delta < 0.0 || delta >= 1.0) throw Error("delta must lie in [0, 1)");
  const double one_minus = 1.0 - delta;
  return one_minus * one_minus -
         delta * (1.0 + std::sqrt(static_cast<double>(sparsity)));
}

namespace detail {
inline double gap_or_throw(double delta, double sqrt_term) {
  const double one_minus = 1.0 - delta;
  const double gap = one_minus * one_minus - delta * (1.0 + sqrt_term);
  if (gap <= 0.0) throw DegenerateDenominatorError(delta, sqrt_term);
  return gap;
}
}  // namespace detail

/// Right-hand side of the per-iteration selection condition: with k of K
/// support indices already found and residual-projected noise correlation
/// E, OMP picks a support index next whenever the remaining signal energy
/// ||x_{off support-so-far}||_2 exceeds
///   2(1-delta) E sqrt(K-k) / ((1-delta)^2 - delta(1+sqrt(K-k))).
inline double selection_condition_rhs(double delta, int sparsity, int found,
                                      double noise_correlation) {
  if (sparsity < 1 || found < 0 || found >= sparsity)
    throw Error("need 0 <= k < K");
  if (delta < 0.0 || delta >= 1.0) throw Error("delta must lie in [0, 1)");
  if (noise_correlation < 0.0) throw Error("noise level must be >= 0");
  const double remaining = std::sqrt(static_cast<double>(sparsity - found));
  const double gap = detail::gap_or_throw(delta, remaining);
  return 2.0 * (1.0 - delta) * noise_correlation * remaining / gap;
}

/// E for the selection condition at a partially recovered support:
/// project z off span(A_support), then take the max |column correlation|.
inline double noise_projection_E(const SenseMatrix& a, const Vector& z,
                                 const IndexSet& support,
                                 const Tolerances& tols = default_tolerances()) {
  const Vector projected = project_out(a, support, z, tols);
  return (a.mat().transpose() * projected).cwiseAbs().maxCoeff();
}

/// Minimum nonzero-coefficient magnitude under which l2-bounded noise
/// (||z||_2 < B2, stopping at B2) still yields exact support recovery:
///   2(1-delta) B2 / ((1-delta)^2 - delta(1+sqrt(K))).
inline double thm_l2_min_coeff(double delta, int sparsity, double b2) {
  if (sparsity < 1) throw Error("sparsity must be >= 1");
  if (delta < 0.0 || delta >= 1.0) throw Error("delta must lie in [0, 1)");
  if (b2 < 0.0) throw Error("B2 must be >= 0");
  const double gap =
      detail::gap_or_throw(delta, std::sqrt(static_cast<double>(sparsity)));
  return 2.0 * (1.0 - delta) * b2 / gap;
}

/// Same threshold for correlation-bounded noise (||A* z||_inf < Binf,
/// stopping on max correlation): the l2 form scaled by
/// (1 + sqrt(K)/sqrt(1-delta)).
inline double thm_linf_min_coeff(double delta, int sparsity, double binf) {
  const double base = thm_l2_min_coeff(delta, sparsity, binf);
  const double root_k = std::sqrt(static_cast<double>(sparsity));
  return base * (1.0 + root_k / std::sqrt(1.0 - delta));
}

/// l2 radius sigma*sqrt(m + 2 sqrt(m ln m)) that white Gaussian noise
/// N(0, sigma^2 I_m) stays inside with probability at least 1 - 1/m.
/// The logarithm is natural.
inline double gaussian_l2_bound(int m, double sigma) {
  if (m < 2) throw Error("m must be >= 2");
  if (sigma < 0.0) throw Error("sigma must be >= 0");
  const double dm = static_cast<double>(m);
  return sigma * std::sqrt(dm + 2.0 * std::sqrt(dm * std::log(dm)));
}

/// One evaluated hypothesis: lhs > rhs strictly means satisfied, and the
/// margin is lhs - rhs. `degenerate` marks conditions whose denominator
/// gap was not positive (reported unsatisfied with margin -inf rather
/// than thrown, so sweeps can proceed).
struct GuaranteeReport {
  std::string condition_name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  double margin = 0.0;
  bool degenerate = false;
  // echo of the inputs used
  double delta = 0.0;
  int sparsity = 0;
  double noise_bound = 0.0;

  static GuaranteeReport make(std::string name, double lhs, double rhs,
                              double delta, int sparsity, double noise_bound) {
    GuaranteeReport rep;
    rep.condition_name = std::move(name);
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.margin = lhs - rhs;
    rep.satisfied = rep.margin > 0.0;
    rep.delta = delta;
    rep.sparsity = sparsity;
    rep.noise_bound = noise_bound;
    return rep;
  }

  static GuaranteeReport make_degenerate(std::string name, double delta,
                                         int sparsity, double noise_bound) {
    GuaranteeReport rep;
    rep.condition_name = std::move(name);
    rep.lhs = 0.0;
    rep.rhs = std::numeric_limits<double>::infinity();
    rep.margin = -std::numeric_limits<double>::infinity();
    rep.satisfied = false;
    rep.degenerate = true;
    rep.delta = delta;
    rep.sparsity = sparsity;
    rep.noise_bound = noise_bound;
    return rep;
  }
};

/// Evaluates every hypothesis applicable to (delta_{K+1}, signal, noise):
/// the delta-threshold condition plus the minimum-coefficient condition
/// for the matching noise model (Gaussian noise goes through the l2 form
/// with B2 = gaussian_l2_bound(m, sigma)). All inequalities are strict,
/// matching the source statements; boundary values report unsatisfied.
inline std::vector<GuaranteeReport> evaluate_guarantees(
    double delta_kp1, const SparseSignal& signal, const NoiseSpec& noise,
    int m) {
  const int sparsity = signal.sparsity();
  if (sparsity < 1) throw Error("signal must have at least one nonzero");
  std::vector<GuaranteeReport> reports;

  const double threshold = delta_threshold(sparsity);
  reports.push_back(GuaranteeReport::make("delta_below_threshold", threshold,
                                          delta_kp1, delta_kp1, sparsity, 0.0));

  const double min_coeff = signal.min_abs_coeff();
  const bool delta_valid = delta_kp1 >= 0.0 && delta_kp1 < 1.0;

  auto coeff_report = [&](const char* name, double bound, bool linf) {
    if (!delta_valid) {
      reports.push_back(
          GuaranteeReport::make_degenerate(name, delta_kp1, sparsity, bound));
      return;
    }
    try {
      const double rhs = linf ? thm_linf_min_coeff(delta_kp1, sparsity, bound)
                              : thm_l2_min_coeff(delta_kp1, sparsity, bound);
      reports.push_back(GuaranteeReport::make(name, min_coeff, rhs, delta_kp1,
                                              sparsity, bound));
    } catch (const DegenerateDenominatorError&) {
      reports.push_back(
          GuaranteeReport::make_degenerate(name, delta_kp1, sparsity, bound));
    }
  };

  if (const auto* l2 = std::get_if<L2Ball>(&noise)) {
    coeff_report("l2_min_coeff", l2->b2, false);
  } else if (const auto* linf = std::get_if<LInfCorrelation>(&noise)) {
    coeff_report("linf_min_coeff", linf->binf, true);
  } else if (const auto* gauss = std::get_if<GaussianNoise>(&noise)) {
    coeff_report("gaussian_min_coeff", gaussian_l2_bound(m, gauss->sigma),
                 false);
  }
  return reports;
}

inline bool all_satisfied(const std::vector<GuaranteeReport>& reports) {
  for (const auto& rep : reports)
    if (!rep.satisfied) return false;
  return !reports.empty();
}

}  // namespace ompcert
