#include "minexp/error.hpp"

namespace minexp {

std::string_view error_class_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kInvalidBasis: return "invalid-basis";
    case ErrorKind::kDegenerateModel: return "degenerate-model";
    case ErrorKind::kSingularMatrix: return "singular-matrix";
    case ErrorKind::kRankDeficient: return "rank-deficient";
    case ErrorKind::kPencilDegenerate: return "pencil-degenerate";
    case ErrorKind::kSparsityUndetected: return "sparsity-undetected";
    case ErrorKind::kRankMismatch: return "rank-mismatch";
    case ErrorKind::kInvalidNode: return "invalid-node";
    case ErrorKind::kCollisionDetected: return "collision-detected";
    case ErrorKind::kCancellationSuspected: return "cancellation-suspected";
    case ErrorKind::kDisentangleFailed: return "disentangle-failed";
    case ErrorKind::kMissingSample: return "missing-sample";
    case ErrorKind::kBudgetExceeded: return "budget-exceeded";
    case ErrorKind::kGenerationFailed: return "generation-failed";
    case ErrorKind::kParseError: return "parse-error";
  }
  return "unknown";
}

}  // namespace minexp
