#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anukf {

/// Base class for every error raised by the toolkit. `kind()` is a stable
/// machine-readable tag used by the CLI error report.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("invalid_input", what) {}
};

/// Cholesky factorization failed; `pivot()` is the zero-based failing column.
class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(int pivot)
      : Error("not_positive_definite",
              "covariance is not positive definite (Cholesky pivot " + std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  int pivot() const noexcept { return pivot_; }

 private:
  int pivot_;
};

/// A sigma point became non-finite after the process mapping.
class PropagationDivergence : public Error {
 public:
  explicit PropagationDivergence(int sigma_index)
      : Error("propagation_divergence",
              "non-finite propagated sigma point " + std::to_string(sigma_index)),
        sigma_index_(sigma_index) {}
  int sigma_index() const noexcept { return sigma_index_; }

 private:
  int sigma_index_;
};

class SingularInnovation : public Error {
 public:
  SingularInnovation() : Error("singular_innovation", "innovation covariance is not invertible") {}
};

/// Posterior covariance lost positive definiteness.
class ConditioningError : public Error {
 public:
  explicit ConditioningError(double min_eigenvalue)
      : Error("conditioning",
              "posterior covariance is not positive definite (min eigenvalue " +
                  std::to_string(min_eigenvalue) + ")"),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class ImplausibleCorrection : public Error {
 public:
  explicit ImplausibleCorrection(double angle)
      : Error("implausible_correction",
              "misalignment correction of " + std::to_string(angle) + " rad exceeds 0.5 rad"),
        angle_(angle) {}
  double angle() const noexcept { return angle_; }

 private:
  double angle_;
};

/// Non-finite activation inside ProcessNet.
class NumericFault : public Error {
 public:
  explicit NumericFault(std::string layer)
      : Error("numeric_fault", "non-finite activation in layer " + layer), layer_(std::move(layer)) {}
  const std::string& layer() const noexcept { return layer_; }

 private:
  std::string layer_;
};

class TrainingFault : public Error {
 public:
  explicit TrainingFault(int epoch)
      : Error("training_fault", "training loss became non-finite at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Weight file rejected; `tensor()` is empty for document-level problems.
class WeightFormatError : public Error {
 public:
  WeightFormatError(std::string tensor, const std::string& what)
      : Error("weight_format", tensor.empty() ? what : "tensor '" + tensor + "': " + what),
        tensor_(std::move(tensor)) {}
  const std::string& tensor() const noexcept { return tensor_; }

 private:
  std::string tensor_;
};

/// CSV ingestion failure. `row()` is the 1-based data row (0 for header/file problems).
class IngestError : public Error {
 public:
  IngestError(std::string file, std::size_t row, const std::string& what)
      : Error("ingest", file + (row ? ":" + std::to_string(row) : std::string()) + ": " + what),
        file_(std::move(file)),
        row_(row) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t row() const noexcept { return row_; }

 private:
  std::string file_;
  std::size_t row_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace anukf
