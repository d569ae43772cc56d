#pragma once

#include <stdexcept>
#include <string>

namespace ocl {

// Failure categories double as CLI exit codes.
enum class ErrorCategory : int {
  config = 2,   // bad configuration or unsupported combination
  io = 3,       // file access / format problems
  numeric = 4,  // numerical breakdown (factorization failure, ...)
  logic = 5,    // contract violation (shape, state, range)
};

class OclError : public std::runtime_error {
 public:
  OclError(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// --- linear algebra ---
struct NotSquare final : OclError {
  explicit NotSquare(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};
struct ShapeMismatch final : OclError {
  explicit ShapeMismatch(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};
// Cholesky pivot failed: the matrix is not (numerically) positive definite.
// For damped curvature factors this means the damping is too small.
struct NotPositiveDefinite final : OclError {
  explicit NotPositiveDefinite(const std::string& m) : OclError(ErrorCategory::numeric, m) {}
};

// --- network ---
struct LabelOutOfRange final : OclError {
  explicit LabelOutOfRange(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};
struct CacheMissing final : OclError {
  explicit CacheMissing(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};
struct EmptyPrototypes final : OclError {
  explicit EmptyPrototypes(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};

// --- optimizer ---
struct StateMissing final : OclError {
  explicit StateMissing(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};
struct TooLarge final : OclError {
  explicit TooLarge(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};

// --- replay ---
struct EmptyBuffer final : OclError {
  explicit EmptyBuffer(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};

// --- tricks ---
struct LabelNotInCur final : OclError {
  explicit LabelNotInCur(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};
struct LabelUnpartitioned final : OclError {
  explicit LabelUnpartitioned(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};

// --- stream ---
struct BadMagic final : OclError {
  explicit BadMagic(const std::string& m) : OclError(ErrorCategory::io, m) {}
};
struct TruncatedFile final : OclError {
  explicit TruncatedFile(const std::string& m) : OclError(ErrorCategory::io, m) {}
};
struct GeometryUnknown final : OclError {
  explicit GeometryUnknown(const std::string& m) : OclError(ErrorCategory::config, m) {}
};
struct UnknownKind final : OclError {
  explicit UnknownKind(const std::string& m) : OclError(ErrorCategory::config, m) {}
};
struct TooManyTasks final : OclError {
  explicit TooManyTasks(const std::string& m) : OclError(ErrorCategory::config, m) {}
};
struct SpecMismatch final : OclError {
  explicit SpecMismatch(const std::string& m) : OclError(ErrorCategory::config, m) {}
};

// --- harness ---
struct MissingSplit final : OclError {
  explicit MissingSplit(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};
struct IncompleteRow final : OclError {
  explicit IncompleteRow(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};
struct TooFewTasks final : OclError {
  explicit TooFewTasks(const std::string& m) : OclError(ErrorCategory::logic, m) {}
};
struct DuplicateCell final : OclError {
  explicit DuplicateCell(const std::string& m) : OclError(ErrorCategory::config, m) {}
};
struct IoError final : OclError {
  explicit IoError(const std::string& m) : OclError(ErrorCategory::io, m) {}
};
struct ConfigError final : OclError {
  explicit ConfigError(const std::string& m) : OclError(ErrorCategory::config, m) {}
};

}  // namespace ocl
