#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace landmix {

// Base of every error the toolkit raises. exit_code() maps onto the CLI
// contract: 1 for bad input, 2 for numerical failure.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what, 1) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what, 2) {}
};

// ---- ingestion ----

class MissingColumn : public InputError {
 public:
  explicit MissingColumn(std::string column)
      : InputError("missing column '" + column + "'"), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

// Row indices are 1-based data rows (the header is not counted).
class ParseError : public InputError {
 public:
  ParseError(std::size_t row, std::string column, const std::string& text)
      : InputError("row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + text + "'"),
        row_(row),
        column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class InvariantViolation : public InputError {
 public:
  InvariantViolation(std::size_t row, std::string field, const std::string& detail)
      : InputError("row " + std::to_string(row) + ", field '" + field + "': " + detail),
        row_(row),
        field_(std::move(field)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::string field_;
};

class UnknownFacilityKind : public InputError {
 public:
  UnknownFacilityKind(std::size_t row, std::string value)
      : InputError("row " + std::to_string(row) + ": unknown facility kind '" + value + "'"),
        row_(row),
        value_(std::move(value)) {}
  explicit UnknownFacilityKind(std::string value)
      : InputError("unknown facility kind '" + value + "'"), value_(std::move(value)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& value() const noexcept { return value_; }

 private:
  std::size_t row_ = 0;
  std::string value_;
};

// ---- grading / design ----

class ConstantColumn : public NumericalError {
 public:
  explicit ConstantColumn(std::string column)
      : NumericalError("column '" + column + "' is constant"), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class EmptyAfterExclusion : public InputError {
 public:
  EmptyAfterExclusion() : InputError("no cells left after excluding zero price/population") {}
};

class NonFinite : public NumericalError {
 public:
  NonFinite(std::size_t row, std::string column)
      : NumericalError("non-finite value at row " + std::to_string(row) + ", column '" + column + "'"),
        row_(row),
        column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// ---- estimation ----

class DimensionMismatch : public NumericalError {
 public:
  explicit DimensionMismatch(const std::string& what) : NumericalError("dimension mismatch: " + what) {}
};

class DegenerateComponent : public NumericalError {
 public:
  DegenerateComponent(int component, double effective_weight)
      : NumericalError("component " + std::to_string(component) + " is degenerate (effective weight " +
                       std::to_string(effective_weight) + ")"),
        component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

// component < 0 means the pooled (unweighted) design.
class SingularDesign : public NumericalError {
 public:
  explicit SingularDesign(int component)
      : NumericalError(component < 0 ? std::string("design matrix is rank deficient")
                                     : "design matrix is rank deficient for component " + std::to_string(component)),
        component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

class TooFewRows : public NumericalError {
 public:
  TooFewRows(std::size_t rows, std::size_t needed)
      : NumericalError("too few rows: " + std::to_string(rows) + " (need more than " + std::to_string(needed) + ")") {}
};

class AllRestartsDegenerate : public NumericalError {
 public:
  explicit AllRestartsDegenerate(int restarts)
      : NumericalError("all " + std::to_string(restarts) + " EM restarts ended degenerate") {}
};

// ---- selection / reporting ----

class UndefinedForK1 : public NumericalError {
 public:
  UndefinedForK1() : NumericalError("NEC is undefined for a single component") {}
};

class NonPositiveLikelihoodGain : public NumericalError {
 public:
  explicit NonPositiveLikelihoodGain(double gain)
      : NumericalError("log-likelihood gain over K=1 is not positive (" + std::to_string(gain) + ")") {}
};

class EmptyReport : public InputError {
 public:
  EmptyReport() : InputError("selection report has no usable rows for the criterion") {}
};

class LabelMismatch : public InputError {
 public:
  explicit LabelMismatch(const std::string& what) : InputError("label mismatch: " + what) {}
};

class MissingFit : public InputError {
 public:
  explicit MissingFit(const std::string& path) : InputError("no serialized fit at '" + path + "'") {}
};

class InvalidSpec : public InputError {
 public:
  explicit InvalidSpec(const std::string& what) : InputError("invalid synth spec: " + what) {}
};

}  // namespace landmix
