#include "minexp/prony.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace minexp {
namespace {

constexpr double kIllConditioned = 1e12;

}  // namespace

std::optional<RankDecision> certify_rank(std::span<const Complex> values,
                                         const RankOptions& options) {
  if (values.empty() || values.size() % 2 == 0)
    throw Error(ErrorKind::kInvalidArgument, "certify_rank: need an odd number of values");
  const std::size_t t = (values.size() + 1) / 2;
  auto decision = numerical_rank(hankel(values, t, t), options);
  if (decision.rank < t) return decision;
  return std::nullopt;
}

RankDecision detect_sparsity(const SampleSupplier& supplier, std::size_t max_terms,
                             const RankOptions& options) {
  if (max_terms == 0) throw Error(ErrorKind::kInvalidArgument, "detect_sparsity: max_terms must be >= 1");
  std::vector<Complex> values;
  for (std::size_t s = 0; s < 3; ++s) values.push_back(supplier(s));
  for (std::size_t size = 2;; ++size) {
    if (auto decision = certify_rank(values, options)) return *decision;
    if (size > max_terms) break;
    values.push_back(supplier(values.size()));
    values.push_back(supplier(values.size()));
  }
  throw Error(ErrorKind::kSparsityUndetected,
              "Hankel matrix still regular beyond max_terms=" + std::to_string(max_terms));
}

std::vector<Complex> fit_nodes(std::span<const Complex> values, std::size_t nu,
                               NodeMethod method) {
  if (nu == 0) throw Error(ErrorKind::kInvalidArgument, "fit_nodes: nu must be >= 1");
  if (values.size() < 2 * nu) throw Error(ErrorKind::kInvalidArgument, "fit_nodes: need 2*nu samples");
  const ComplexMatrix h0 = hankel(values, nu, nu);
  try {
    if (method == NodeMethod::kGeneralizedEig) {
      const ComplexMatrix h1 = hankel(values.subspan(1), nu, nu);
      return generalized_eigenvalues(h1, h0);
    }
    ComplexVector rhs(nu);
    for (std::size_t r = 0; r < nu; ++r) rhs(r) = -values[nu + r];
    const ComplexVector beta = solve(h0, rhs);
    return monic_polynomial_roots(as_span(beta));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kPencilDegenerate || e.kind() == ErrorKind::kSingularMatrix)
      throw Error(ErrorKind::kRankMismatch,
                  "nu=" + std::to_string(nu) + " exceeds the sequence rank: " + e.what());
    throw;
  }
}

std::vector<Complex> take_logs(std::span<const Complex> nodes, PhaseWindow window) {
  std::vector<Complex> out;
  out.reserve(nodes.size());
  for (Complex z : nodes) {
    if (z == Complex{}) throw Error(ErrorKind::kInvalidNode, "take_logs: node at zero");
    out.emplace_back(std::log(std::abs(z)), window.wrap(std::arg(z)));
  }
  return out;
}

CoefficientFit fit_coefficients(std::span<const Complex> logs, std::span<const Complex> values,
                                CoefficientMode mode, std::size_t offset) {
  const std::size_t nu = logs.size();
  if (nu == 0) throw Error(ErrorKind::kInvalidArgument, "fit_coefficients: no nodes");
  std::vector<double> rows;
  if (mode == CoefficientMode::kSquare) {
    if (offset > nu || values.size() < offset + nu)
      throw Error(ErrorKind::kInvalidArgument, "fit_coefficients: need samples k..k+nu-1, 0<=k<=nu");
    for (std::size_t r = 0; r < nu; ++r) rows.push_back(static_cast<double>(offset + r));
  } else {
    if (values.size() < nu)
      throw Error(ErrorKind::kInvalidArgument, "fit_coefficients: fewer samples than nodes");
    for (std::size_t r = 0; r < values.size(); ++r) rows.push_back(static_cast<double>(r));
  }
  const ComplexMatrix v = vandermonde(logs, rows);
  ComplexVector rhs(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) rhs(r) = values[static_cast<std::size_t>(rows[r])];

  CoefficientFit fit;
  if (mode == CoefficientMode::kSquare) {
    const double rc = reciprocal_condition(v);
    fit.condition_estimate = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    fit.coefficients = to_std(solve(v, rhs));
  } else {
    Eigen::JacobiSVD<ComplexMatrix> svd(v);
    const auto& s = svd.singularValues();
    fit.condition_estimate = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1)
                                                   : std::numeric_limits<double>::infinity();
    fit.coefficients = to_std(solve_least_squares(v, rhs));
  }
  fit.ill_conditioned = fit.condition_estimate > kIllConditioned;
  return fit;
}

UnivariateFit fit_univariate(std::span<const Complex> values, std::size_t nu, NodeMethod method,
                             CoefficientMode mode, PhaseWindow window) {
  UnivariateFit fit;
  fit.nodes = fit_nodes(values, nu, method);
  fit.logs = take_logs(fit.nodes, window);
  auto coeffs = fit_coefficients(fit.logs, values, mode);
  fit.coefficients = std::move(coeffs.coefficients);
  if (coeffs.ill_conditioned)
    fit.warnings.push_back("ill-conditioned Vandermonde (condition estimate " +
                           std::to_string(coeffs.condition_estimate) + ")");
  const std::size_t t = nu;
  fit.rank_decision = numerical_rank(hankel(values, t, t));
  return fit;
}

std::vector<std::vector<std::size_t>> cluster_nodes(std::span<const Complex> nodes,
                                                    double node_tol) {
  const std::size_t n = nodes.size();
  double scale = 0.0;
  for (Complex z : nodes) scale = std::max(scale, std::abs(z));
  const double threshold = node_tol * scale;

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (std::abs(nodes[a] - nodes[b]) <= threshold) parent[find(b)] = find(a);

  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::ptrdiff_t> group_of(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (group_of[root] < 0) {
      group_of[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of[root])].push_back(i);
  }
  return groups;
}

}  // namespace minexp
