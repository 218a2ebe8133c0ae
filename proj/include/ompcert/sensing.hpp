#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

#include "ompcert/errors.hpp"
#include "ompcert/rng.hpp"
#include "ompcert/types.hpp"

namespace ompcert {

/// Dense m x n measurement matrix with unit l2-norm columns. Construction
/// goes through normalize_columns / the generators / from_unit_columns, all
/// of which enforce the column-norm invariant.
class SenseMatrix {
 public:
  Index rows() const { return mat_.rows(); }
  Index cols() const { return mat_.cols(); }
  const Matrix& mat() const { return mat_; }
  auto column(Index i) const { return mat_.col(i); }

  /// Gathers the submatrix of the columns listed in `support`.
  Matrix columns(const IndexSet& support) const {
    Matrix sub(mat_.rows(), static_cast<Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j)
      sub.col(static_cast<Index>(j)) = mat_.col(support[j]);
    return sub;
  }

  /// Wraps a matrix whose columns are already unit-norm; throws
  /// ZeroColumnError if any column norm strays beyond the tolerance.
  static SenseMatrix from_unit_columns(
      Matrix a, const Tolerances& tols = default_tolerances()) {
    if (a.rows() < 1 || a.cols() < 1) throw Error("matrix must be nonempty");
    for (Index j = 0; j < a.cols(); ++j) {
      if (std::abs(a.col(j).norm() - 1.0) > tols.column_norm)
        throw ZeroColumnError(j);
    }
    return SenseMatrix(std::move(a));
  }

 private:
  explicit SenseMatrix(Matrix a) : mat_(std::move(a)) {}
  friend SenseMatrix normalize_columns(const Matrix&, const Tolerances&);
  Matrix mat_;
};

/// Rescales every column of `raw` to unit l2 norm. Throws ZeroColumnError
/// for columns whose norm is below tols.zero_column.
inline SenseMatrix normalize_columns(
    const Matrix& raw, const Tolerances& tols = default_tolerances()) {
  if (raw.rows() < 1 || raw.cols() < 1) throw Error("matrix must be nonempty");
  Matrix a = raw;
  for (Index j = 0; j < a.cols(); ++j) {
    const double norm = a.col(j).norm();
    if (norm < tols.zero_column) throw ZeroColumnError(j);
    a.col(j) /= norm;
  }
  return SenseMatrix(std::move(a));
}

/// i.i.d. standard-normal entries, columns rescaled to unit norm.
/// Entries are drawn column by column (column-major), so the matrix is a
/// pure function of (m, n, seed). A column that lands at exactly zero norm
/// is redrawn; with double-precision normals this never fires in practice.
inline SenseMatrix gen_gaussian_matrix(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw Error("dimensions must be positive");
  Rng rng(seed);
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j) {
    do {
      for (Index i = 0; i < m; ++i) a(i, j) = rng.normal();
    } while (a.col(j).norm() < default_tolerances().zero_column);
  }
  return normalize_columns(a);
}

/// Largest absolute inner product between distinct columns.
struct CoherenceValue {
  double mu = 0.0;
};

inline CoherenceValue mutual_incoherence(const SenseMatrix& a) {
  if (a.cols() < 2) throw Error("mutual incoherence needs n >= 2");
  const Matrix gram = a.mat().transpose() * a.mat();
  double mu = 0.0;
  for (Index i = 0; i < gram.rows(); ++i)
    for (Index j = i + 1; j < gram.cols(); ++j)
      mu = std::max(mu, std::abs(gram(i, j)));
  return CoherenceValue{mu};
}

/// Unit-norm frame with far lower coherence than an i.i.d. Gaussian draw of
/// the same shape, built by alternating projection: clip the Gram
/// off-diagonals toward the Welch bound, project back to the set of rank-m
/// PSD matrices with unit diagonal, re-factor. Deterministic for a fixed
/// seed. Useful when an experiment needs certifiably small restricted
/// isometry constants at sizes where Gaussian matrices cannot deliver them.
inline SenseMatrix gen_low_coherence_matrix(Index m, Index n,
                                            std::uint64_t seed,
                                            int sweeps = 60,
                                            double shrink = 0.9) {
  if (m < 1 || n < 1) throw Error("dimensions must be positive");
  if (n <= m) return gen_gaussian_matrix(m, n, seed);
  Matrix a = gen_gaussian_matrix(m, n, seed).mat();
  const double welch =
      std::sqrt(static_cast<double>(n - m) /
                (static_cast<double>(m) * static_cast<double>(n - 1)));
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    Matrix gram = a.transpose() * a;
    double max_off = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        max_off = std::max(max_off, std::abs(gram(i, j)));
    const double clip = std::max(welch, shrink * max_off);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (i == j)
          gram(i, j) = 1.0;
        else
          gram(i, j) = std::clamp(gram(i, j), -clip, clip);
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    // Keep the m largest eigenpairs (eigenvalues ascend in Eigen).
    const auto values = eig.eigenvalues();
    const auto vectors = eig.eigenvectors();
    Matrix next(m, n);
    for (Index r = 0; r < m; ++r) {
      const Index k = n - m + r;
      const double scale = std::sqrt(std::max(values(k), 0.0));
      next.row(r) = scale * vectors.col(k).transpose();
    }
    for (Index j = 0; j < n; ++j) {
      const double norm = next.col(j).norm();
      if (norm < default_tolerances().zero_column)
        return normalize_columns(a);  // degenerate sweep; keep previous
      next.col(j) /= norm;
    }
    a = std::move(next);
  }
  return normalize_columns(a);
}

}  // namespace ompcert
