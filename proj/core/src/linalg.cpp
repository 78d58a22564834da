#include "minexp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace minexp {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Condition bound above which the pencil is handed to QZ instead of B^{-1}A.
constexpr double kReductionConditionLimit = 1e8;

void require(bool condition, const char* message) {
  if (!condition) throw Error(ErrorKind::kInvalidArgument, message);
}

std::vector<double> singular_values(const ComplexMatrix& a) {
  if (a.size() == 0) return {};
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};  // Eigen returns them descending
}

GeneralizedEigen qz_eigen(const ComplexMatrix& a, const ComplexMatrix& b) {
  const auto n = static_cast<lapack_int>(a.rows());
  ComplexMatrix aa = a;
  ComplexMatrix bb = b;
  ComplexVector alpha(n);
  ComplexVector beta(n);
  ComplexMatrix vr(n, n);
  Complex dummy_vl{};
  const lapack_int info =
      LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', 'V', n, aa.data(), n, bb.data(), n,
                    alpha.data(), beta.data(), &dummy_vl, 1, vr.data(), n);
  if (info != 0) {
    throw Error(ErrorKind::kPencilDegenerate,
                "QZ iteration failed (zggev info=" + std::to_string(info) + ")");
  }
  const double b_norm = b.cwiseAbs().colwise().sum().maxCoeff();
  const double a_norm = a.cwiseAbs().colwise().sum().maxCoeff();
  GeneralizedEigen out;
  out.used_qz = true;
  out.vectors = vr;
  for (lapack_int k = 0; k < n; ++k) {
    const bool beta_small = std::abs(beta[k]) <= 1e3 * kEps * std::max(b_norm, 1.0) * n;
    const bool alpha_small = std::abs(alpha[k]) <= 1e3 * kEps * std::max(a_norm, 1.0) * n;
    if (beta_small) {
      throw Error(ErrorKind::kPencilDegenerate,
                  alpha_small ? "pencil has an indeterminate eigenvalue; re-detect rank"
                              : "pencil has an infinite eigenvalue; re-detect rank");
    }
    out.values.push_back(alpha[k] / beta[k]);
  }
  return out;
}

}  // namespace

ComplexMatrix hankel(std::span<const Complex> sequence, std::size_t rows,
                     std::size_t cols) {
  require(rows > 0 && cols > 0, "hankel: rows and cols must be positive");
  require(sequence.size() >= rows + cols - 1, "hankel: sequence too short");
  ComplexMatrix h(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) h(r, c) = sequence[r + c];
  return h;
}

ComplexMatrix vandermonde(std::span<const Complex> logs,
                          std::span<const double> exponents) {
  require(!logs.empty(), "vandermonde: no nodes");
  require(!exponents.empty(), "vandermonde: no rows");
  ComplexMatrix v(exponents.size(), logs.size());
  for (std::size_t r = 0; r < exponents.size(); ++r)
    for (std::size_t c = 0; c < logs.size(); ++c) v(r, c) = std::exp(exponents[r] * logs[c]);
  return v;
}

double reciprocal_condition(const ComplexMatrix& a) {
  require(a.rows() == a.cols(), "reciprocal_condition: matrix must be square");
  if (a.size() == 0) return 0.0;
  Eigen::PartialPivLU<ComplexMatrix> lu(a);
  const double rc = lu.rcond();
  return std::isfinite(rc) ? rc : 0.0;
}

ComplexVector solve(const ComplexMatrix& a, const ComplexVector& b) {
  require(a.rows() == a.cols(), "solve: matrix must be square");
  require(a.rows() == b.size(), "solve: right-hand side length mismatch");
  require(a.rows() > 0, "solve: empty system");
  Eigen::PartialPivLU<ComplexMatrix> lu(a);
  double rc = lu.rcond();
  if (!std::isfinite(rc)) rc = 0.0;
  if (rc < static_cast<double>(a.rows()) * kEps) {
    std::ostringstream msg;
    msg << "solve: matrix is singular to working precision (rcond=" << rc << ")";
    throw SingularMatrixError(msg.str(), rc);
  }
  ComplexVector x = lu.solve(b);
  if (!x.allFinite()) throw SingularMatrixError("solve: non-finite solution", rc);
  return x;
}

ComplexVector solve_least_squares(const ComplexMatrix& a, const ComplexVector& b) {
  require(a.rows() >= a.cols(), "solve_least_squares: need rows >= cols");
  require(a.rows() == b.size(), "solve_least_squares: right-hand side length mismatch");
  require(a.cols() > 0, "solve_least_squares: empty system");
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(a);
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) * kEps;
  qr.setThreshold(tol);
  if (qr.rank() < a.cols()) {
    throw RankDeficientError("solve_least_squares: matrix lacks full column rank",
                             numerical_rank(a, tol, 1e3));
  }
  return qr.solve(b);
}

RankDecision numerical_rank(const ComplexMatrix& a, double rel_tol, double gap_factor) {
  require(rel_tol > 0.0 && rel_tol < 1.0, "numerical_rank: rel_tol must lie in (0,1)");
  require(gap_factor > 1.0, "numerical_rank: gap_factor must exceed 1");
  RankDecision d;
  d.singular_values = singular_values(a);
  const std::size_t full = d.singular_values.size();
  const double sigma_max = full ? d.singular_values.front() : 0.0;
  d.tolerance_used = rel_tol * sigma_max;
  if (sigma_max == 0.0) {
    d.rank = 0;
    d.confident = true;
    return d;
  }
  d.rank = static_cast<std::size_t>(std::count_if(
      d.singular_values.begin(), d.singular_values.end(),
      [&](double s) { return s > d.tolerance_used; }));
  if (d.rank == full) {
    d.confident = true;
  } else {
    const double next = d.singular_values[d.rank];
    d.confident = next == 0.0 || d.singular_values[d.rank - 1] / next >= gap_factor;
  }
  return d;
}

GeneralizedEigen generalized_eigen(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
          "generalized_eigen: A and B must be square of equal size");
  require(a.rows() > 0, "generalized_eigen: empty pencil");
  const auto sv = singular_values(b);
  const double ratio = sv.front() > 0.0 ? sv.back() / sv.front() : 0.0;
  if (ratio <= 16.0 * kEps * static_cast<double>(b.rows())) {
    std::ostringstream msg;
    msg << "pencil right-hand matrix is singular (sigma_min/sigma_max=" << ratio
        << "); re-detect rank";
    throw Error(ErrorKind::kPencilDegenerate, msg.str());
  }
  if (ratio < 1.0 / kReductionConditionLimit) return qz_eigen(a, b);

  const ComplexMatrix reduced = b.partialPivLu().solve(a);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(reduced, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kPencilDegenerate, "eigenvalue iteration did not converge");
  }
  GeneralizedEigen out;
  out.values = to_std(es.eigenvalues());
  out.vectors = es.eigenvectors();
  return out;
}

std::vector<Complex> generalized_eigenvalues(const ComplexMatrix& a,
                                             const ComplexMatrix& b) {
  return generalized_eigen(a, b).values;
}

std::vector<Complex> eigenvalues(const ComplexMatrix& a) {
  require(a.rows() == a.cols(), "eigenvalues: matrix must be square");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kSingularMatrix, "eigenvalue iteration did not converge");
  }
  return to_std(es.eigenvalues());
}

std::vector<Complex> monic_polynomial_roots(std::span<const Complex> lower_coefficients) {
  const auto n = static_cast<Eigen::Index>(lower_coefficients.size());
  require(n > 0, "monic_polynomial_roots: degree must be positive");
  ComplexMatrix companion = ComplexMatrix::Zero(n, n);
  for (Eigen::Index r = 1; r < n; ++r) companion(r, r - 1) = 1.0;
  for (Eigen::Index r = 0; r < n; ++r) companion(r, n - 1) = -lower_coefficients[r];
  return eigenvalues(companion);
}

}  // namespace minexp
