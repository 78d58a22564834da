#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minexp/linalg.hpp"
#include "minexp/model.hpp"

namespace minexp {

/// Samples F_s = f(origin + s * step_direction), s = 0, 1, ...
struct EquidistantSequence {
  std::vector<Complex> values;
  Point step_direction;
  Point origin;
};

enum class NodeMethod {
  kGeneralizedEig,    // pencil of the shifted and unshifted Hankel matrices
  kHankelPolynomial,  // Hankel solve for the monic polynomial, companion roots
};

enum class CoefficientMode {
  kLeastSquares,  // Vandermonde over every available sample
  kSquare,        // square Vandermonde on samples k .. k+nu-1
};

struct CoefficientFit {
  std::vector<Complex> coefficients;
  double condition_estimate = 1.0;
  bool ill_conditioned = false;  // condition estimate above 1e12
};

struct UnivariateFit {
  std::vector<Complex> nodes;  // exp(Phi_j)
  std::vector<Complex> logs;   // Phi_j inside the phase window
  std::vector<Complex> coefficients;
  RankDecision rank_decision;
  std::vector<std::string> warnings;
};

/// Yields F_s for s = 0, 1, 2, ... (requested in increasing order).
using SampleSupplier = std::function<Complex(std::size_t s)>;

/// Checks the t x t Hankel matrix of `values` (size 2t-1). Returns the
/// decision when that matrix is rank deficient, which certifies that the
/// sequence carries exactly `rank` terms.
std::optional<RankDecision> certify_rank(std::span<const Complex> values,
                                         const RankOptions& options = {});

/// Grows the square Hankel matrix one size at a time (two new samples per
/// step, starting from F_0..F_2) until it becomes rank deficient; a nu-term
/// sequence is certified after 2*nu + 1 samples.
/// Throws kSparsityUndetected when the (max_terms+1)-sized matrix is still
/// regular.
RankDecision detect_sparsity(const SampleSupplier& supplier, std::size_t max_terms,
                             const RankOptions& options = {});

/// The nu nodes exp(Phi_j) from the first 2*nu samples.
/// Throws kRankMismatch when the Hankel matrices are singular (nu too large).
std::vector<Complex> fit_nodes(std::span<const Complex> values, std::size_t nu,
                               NodeMethod method = NodeMethod::kGeneralizedEig);
inline std::vector<Complex> fit_nodes(const EquidistantSequence& sequence, std::size_t nu,
                                      NodeMethod method = NodeMethod::kGeneralizedEig) {
  return fit_nodes(sequence.values, nu, method);
}

/// Logarithms with imaginary part in the window (principal branch by default,
/// so -1 maps to i*pi). Never unwraps. Throws kInvalidNode for a zero node.
std::vector<Complex> take_logs(std::span<const Complex> nodes, PhaseWindow window = {});

/// Coefficients of sum_j c_j exp(s Phi_j) = F_s given the logs Phi_j.
CoefficientFit fit_coefficients(std::span<const Complex> logs, std::span<const Complex> values,
                                CoefficientMode mode = CoefficientMode::kLeastSquares,
                                std::size_t offset = 0);

UnivariateFit fit_univariate(std::span<const Complex> values, std::size_t nu,
                             NodeMethod method = NodeMethod::kGeneralizedEig,
                             CoefficientMode mode = CoefficientMode::kLeastSquares,
                             PhaseWindow window = {});

/// Groups node indices whose pairwise distance is at most
/// node_tol * max|node| (single linkage). Groups come out in first-index order.
std::vector<std::vector<std::size_t>> cluster_nodes(std::span<const Complex> nodes,
                                                    double node_tol);

}  // namespace minexp
