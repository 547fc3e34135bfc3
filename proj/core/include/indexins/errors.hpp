#ifndef INDEXINS_ERRORS_HPP
#define INDEXINS_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace indexins {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration: hyperparameters, grids, scenario knobs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Anything wrong with input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  SchemaError(const std::string& column, const std::string& what)
      : DataError(what), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class RowError : public DataError {
 public:
  RowError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}
  // 1-based index of the data row (header excluded).
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class EmptyDatasetError : public DataError {
 public:
  using DataError::DataError;
};

class EmptySelectionError : public DataError {
 public:
  using DataError::DataError;
};

class UndefinedCorrelationError : public DataError {
 public:
  using DataError::DataError;
};

class OverflowError : public DataError {
 public:
  OverflowError(std::size_t record, const std::string& what)
      : DataError(what), record_(record) {}
  std::size_t record() const noexcept { return record_; }

 private:
  std::size_t record_;
};

class DegenerateFitError : public DataError {
 public:
  using DataError::DataError;
};

// Risk aversion beyond the exp() overflow guard for a given sample.
class AlphaTooLargeError : public DomainError {
 public:
  AlphaTooLargeError(double alpha, double max_admissible)
      : DomainError("risk aversion " + std::to_string(alpha) +
                    " exceeds the overflow guard; admissible range is (0, " +
                    std::to_string(max_admissible) + "]"),
        max_admissible_(max_admissible) {}
  double max_admissible() const noexcept { return max_admissible_; }

 private:
  double max_admissible_;
};

class BracketError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class NoRootError : public Error {
 public:
  using Error::Error;
};

// Operation on a model that was never fitted.
class StateError : public Error {
 public:
  using Error::Error;
};

// A requested configuration cannot satisfy its constraints. Reported by the
// CLI as a result rather than a crash.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class DegenerateDemandError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

class EmptyIndexSetError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

}  // namespace indexins

#endif  // INDEXINS_ERRORS_HPP
