#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "minexp/error.hpp"

namespace minexp {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Outcome of a singular-value based rank decision.
struct RankDecision {
  std::size_t rank = 0;
  std::vector<double> singular_values;  // descending
  double tolerance_used = 0.0;          // absolute threshold rel_tol * sigma_max
  bool confident = true;
};

struct RankOptions {
  double rel_tol = 1e-8;
  double gap_factor = 1e3;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& message, double rcond)
      : Error(ErrorKind::kSingularMatrix, message), rcond_(rcond) {}
  /// Reciprocal condition estimate of the rejected matrix.
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& message, RankDecision decision)
      : Error(ErrorKind::kRankDeficient, message), decision_(std::move(decision)) {}
  const RankDecision& decision() const noexcept { return decision_; }

 private:
  RankDecision decision_;
};

/// Entry (r, c) = sequence[r + c].
ComplexMatrix hankel(std::span<const Complex> sequence, std::size_t rows,
                     std::size_t cols);

/// Entry (r, c) = exp(exponents[r] * logs[c]). Nodes are passed as their
/// logarithms so non-integer powers carry no branch ambiguity.
ComplexMatrix vandermonde(std::span<const Complex> logs,
                          std::span<const double> exponents);

/// Square solve with partial pivoting. Throws SingularMatrixError when the
/// reciprocal condition estimate falls below rows * machine epsilon.
ComplexVector solve(const ComplexMatrix& a, const ComplexVector& b);

/// Least-squares solve via column-pivoted Householder QR (never the normal
/// equations). Throws RankDeficientError when A lacks full column rank.
ComplexVector solve_least_squares(const ComplexMatrix& a, const ComplexVector& b);

RankDecision numerical_rank(const ComplexMatrix& a, double rel_tol = 1e-8,
                            double gap_factor = 1e3);
inline RankDecision numerical_rank(const ComplexMatrix& a, const RankOptions& options) {
  return numerical_rank(a, options.rel_tol, options.gap_factor);
}

/// 1-norm reciprocal condition estimate from an LU factorization; 0 for
/// exactly singular input.
double reciprocal_condition(const ComplexMatrix& a);

struct GeneralizedEigen {
  std::vector<Complex> values;
  ComplexMatrix vectors;  // column k pairs with values[k]
  bool used_qz = false;
};

/// Eigenpairs of the pencil (A, B): A v = lambda B v.
///
/// When B is well conditioned (estimate <= 1e8) the pencil is reduced to the
/// standard problem B^{-1} A; otherwise LAPACK's complex QZ (zggev) is used.
/// If B is singular to working precision, or QZ reports an infinite or
/// indeterminate eigenvalue, the pencil is degenerate and an Error of kind
/// kPencilDegenerate is thrown: the caller over-estimated the rank.
GeneralizedEigen generalized_eigen(const ComplexMatrix& a, const ComplexMatrix& b);
std::vector<Complex> generalized_eigenvalues(const ComplexMatrix& a,
                                             const ComplexMatrix& b);

std::vector<Complex> eigenvalues(const ComplexMatrix& a);

/// Roots of z^n + c[n-1] z^{n-1} + ... + c[0] from the companion matrix.
std::vector<Complex> monic_polynomial_roots(std::span<const Complex> lower_coefficients);

inline std::span<const Complex> as_span(const ComplexVector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline ComplexVector to_eigen(std::span<const Complex> v) {
  return Eigen::Map<const ComplexVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}
inline std::vector<Complex> to_std(const ComplexVector& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace minexp
