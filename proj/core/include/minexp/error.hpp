#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace minexp {

/// Machine-readable failure classes. The CLI maps these onto exit codes and
/// prints `error_class_name()` so scripts can branch on them.
enum class ErrorKind {
  kInvalidArgument,
  kInvalidBasis,
  kDegenerateModel,
  kSingularMatrix,
  kRankDeficient,
  kPencilDegenerate,
  kSparsityUndetected,
  kRankMismatch,
  kInvalidNode,
  kCollisionDetected,
  kCancellationSuspected,
  kDisentangleFailed,
  kMissingSample,
  kBudgetExceeded,
  kGenerationFailed,
  kParseError,
};

std::string_view error_class_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace minexp
