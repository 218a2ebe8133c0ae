#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ompcert {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// normalize_columns met a column with norm below the zero tolerance.
struct ZeroColumnError : Error {
  explicit ZeroColumnError(std::int64_t column)
      : Error("column " + std::to_string(column) + " has (near-)zero norm"),
        column(column) {}
  std::int64_t column;
};

/// A least-squares solve hit a (numerically) singular system.
struct RankDeficientError : Error {
  explicit RankDeficientError(const std::string& detail)
      : Error("rank-deficient support: " + detail) {}
};

/// Exact subset enumeration would exceed the caller's budget.
struct BudgetExceededError : Error {
  BudgetExceededError(std::uint64_t required, std::uint64_t budget)
      : Error("subset enumeration needs " + std::to_string(required) +
              " subsets, budget is " + std::to_string(budget)),
        required(required),
        budget(budget) {}
  std::uint64_t required;
  std::uint64_t budget;
};

/// select_index was called with every index already selected.
struct AllSelectedError : Error {
  AllSelectedError() : Error("no unselected candidate index remains") {}
};

/// The correlation argmax fell on an already-selected column by more than
/// tolerance; the residual should be orthogonal to selected columns, so
/// this signals numerical breakdown.
struct OrthogonalityViolatedError : Error {
  explicit OrthogonalityViolatedError(std::int64_t index)
      : Error("correlation argmax lies on selected column " +
              std::to_string(index)),
        index(index) {}
  std::int64_t index;
};

/// A guarantee formula was evaluated where its denominator gap
/// (1-delta)^2 - delta*(1+sqrt(K)) is not positive.
struct DegenerateDenominatorError : Error {
  DegenerateDenominatorError(double delta, double sqrt_term)
      : Error("(1-delta)^2 - delta*(1+sqrt_term) <= 0 for delta=" +
              std::to_string(delta)) {}
};

/// File or parse failure; message carries the path.
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace ompcert
