#pragma once

#include <cmath>
#include <string>

#include "ompcert/errors.hpp"
#include "ompcert/sensing.hpp"
#include "ompcert/types.hpp"

namespace ompcert {

/// Least-squares coefficients on a column subset: the c minimizing
/// ||A_support c - y||_2, computed with column-pivoted Householder QR
/// (never an explicit Gram inverse). Throws RankDeficientError when the
/// smallest pivot falls below tols.rank relative to the largest.
inline Vector least_squares(const SenseMatrix& a, const IndexSet& support,
                            const Vector& y,
                            const Tolerances& tols = default_tolerances()) {
  if (y.size() != a.rows()) throw Error("y length must equal row count");
  if (support.empty()) return Vector(0);
  if (static_cast<Index>(support.size()) > a.rows())
    throw RankDeficientError("support larger than row count");
  const Matrix sub = a.columns(support);
  Eigen::ColPivHouseholderQR<Matrix> qr(sub);
  const auto& r = qr.matrixR();
  const double pivot_max = std::abs(r(0, 0));
  const Index k = static_cast<Index>(support.size());
  const double pivot_min = std::abs(r(k - 1, k - 1));
  if (pivot_max <= 0.0 || pivot_min < tols.rank * pivot_max)
    throw RankDeficientError("pivot ratio " + std::to_string(pivot_min) +
                             " / " + std::to_string(pivot_max));
  return qr.solve(y);
}

/// y minus the reconstruction A_support * coeffs; with an empty support
/// this is y itself.
inline Vector residual(const SenseMatrix& a, const Vector& y,
                       const IndexSet& support, const Vector& coeffs) {
  if (static_cast<Index>(support.size()) != coeffs.size())
    throw Error("coefficients must align with support");
  if (support.empty()) return y;
  return y - a.columns(support) * coeffs;
}

/// Orthogonal projection of z onto span(A_support)'s complement, i.e.
/// (I - A_S A_S^+) z. Empty support returns z unchanged.
inline Vector project_out(const SenseMatrix& a, const IndexSet& support,
                          const Vector& z,
                          const Tolerances& tols = default_tolerances()) {
  if (support.empty()) return z;
  return residual(a, z, support, least_squares(a, support, z, tols));
}

}  // namespace ompcert
