#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace ompcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column indices are 0-based throughout the library; file formats and
/// logs also use 0-based indices.
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/// Library-wide numeric tolerances. The defaults are fixed constants;
/// callers that need different thresholds pass their own instance.
struct Tolerances {
  /// Max allowed deviation of a column norm from 1.
  double column_norm = 1e-10;
  /// Relative pivot threshold below which a least-squares system is
  /// declared rank deficient.
  double rank = 1e-12;
  /// Column norms below this are treated as zero in normalize_columns.
  double zero_column = 1e-14;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tols{};
  return tols;
}

}  // namespace ompcert
