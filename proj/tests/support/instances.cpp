#include "support/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace minexp::testing {
namespace {

constexpr double kHalf = 0.85 * std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// `count` imaginary parts on a jittered grid over (-kHalf, kHalf), shuffled.
std::vector<double> grid_phases(std::size_t count, std::mt19937_64& rng) {
  const double width = 2.0 * kHalf / static_cast<double>(count);
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(-kHalf + (static_cast<double>(k) + uniform(rng, 0.25, 0.75)) * width);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

Complex grid_log(double phase, std::mt19937_64& rng) {
  return {uniform(rng, -0.05, 0.05), phase};
}

Complex random_log(std::mt19937_64& rng) {
  return {uniform(rng, -0.05, 0.05), uniform(rng, -kHalf, kHalf)};
}

Complex random_coefficient(std::mt19937_64& rng) {
  return std::polar(std::exp(uniform(rng, std::log(0.5), std::log(2.0))),
                    uniform(rng, -std::numbers::pi, std::numbers::pi));
}

/// Builds the model from per-term inner products with the basis directions.
ExponentialModel from_projections(const DirectionBasis& basis,
                                  const std::vector<std::vector<Complex>>& projections,
                                  const std::vector<Complex>& coefficients) {
  const auto lu = basis.direction_matrix().cast<Complex>().eval().partialPivLu();
  std::vector<Term> terms;
  for (std::size_t j = 0; j < projections.size(); ++j)
    terms.push_back({coefficients[j], to_std(lu.solve(to_eigen(projections[j])))});
  return ExponentialModel(basis.dimension(), std::move(terms));
}

double min_node_gap(const std::vector<Complex>& logs) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < logs.size(); ++a)
    for (std::size_t b = a + 1; b < logs.size(); ++b)
      gap = std::min(gap, std::abs(std::exp(logs[a]) - std::exp(logs[b])));
  return gap;
}

/// Random composition of n into `parts` positive sizes.
std::vector<std::size_t> composition(std::size_t n, std::size_t parts, std::mt19937_64& rng) {
  std::vector<std::size_t> sizes(parts, 1);
  for (std::size_t k = parts; k < n; ++k)
    ++sizes[std::uniform_int_distribution<std::size_t>(0, parts - 1)(rng)];
  return sizes;
}

}  // namespace

DirectionBasis random_basis(std::size_t d, std::mt19937_64& rng, double step) {
  for (;;) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                  static_cast<Eigen::Index>(d));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) += 0.3 * uniform(rng, -1.0, 1.0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s(0) / s(s.size() - 1) > 10.0) continue;
    std::vector<Point> dirs;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      Point p;
      for (Eigen::Index c = 0; c < m.cols(); ++c) p.push_back(step * m(r, c));
      dirs.push_back(std::move(p));
    }
    return DirectionBasis(std::move(dirs));
  }
}

Instance admissible_instance(std::size_t d, std::size_t n, std::uint64_t seed,
                             double separation) {
  std::mt19937_64 rng(seed);
  auto basis = random_basis(d, rng);
  GenerationOptions options;
  options.min_separation = separation;
  auto model = generate_admissible_model(basis, n, seed ^ 0x9e3779b97f4a7c15ULL, options);
  std::vector<std::vector<std::size_t>> piles;
  for (std::size_t j = 0; j < n; ++j) piles.push_back({j});
  return {std::move(model), std::move(basis), std::move(piles)};
}

Instance collision_instance(std::size_t d, std::size_t n, std::uint64_t seed) {
  if (d < 2 || n < 2) throw Error(ErrorKind::kInvalidArgument, "collision_instance: d, n >= 2");
  std::mt19937_64 rng(seed);
  for (;;) {
    auto basis = random_basis(d, rng);
    const std::size_t nu0 = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
    auto sizes = composition(n, nu0, rng);
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    const auto base_phases = grid_phases(nu0, rng);

    std::vector<std::vector<Complex>> proj;
    std::vector<std::vector<std::size_t>> piles;
    for (std::size_t p = 0; p < nu0; ++p) {
      const Complex phi0 = grid_log(base_phases[p], rng);
      const bool nested = d >= 3 && p == 0;  // pile 0 has >= 2 members
      const std::size_t distinct1 = nested ? sizes[p] - 1 : sizes[p];
      const auto phases1 = grid_phases(std::max<std::size_t>(distinct1, 1), rng);
      std::vector<std::size_t> members;
      for (std::size_t m = 0; m < sizes[p]; ++m) {
        std::vector<Complex> row(d);
        row[0] = phi0;
        const std::size_t slot = nested && m > 0 ? m - 1 : m;
        row[1] = nested && m == 1 ? proj.back()[1] : grid_log(phases1[slot], rng);
        for (std::size_t i = 2; i < d; ++i) row[i] = random_log(rng);
        if (nested && m == 1) {
          const auto phases2 = grid_phases(2, rng);
          proj.back()[2] = grid_log(phases2[0], rng);
          row[2] = grid_log(phases2[1], rng);
        }
        members.push_back(proj.size());
        proj.push_back(std::move(row));
      }
      piles.push_back(std::move(members));
    }

    // Level-1 piles (distinct (Phi_0, Phi_1)) must stay apart on the
    // accumulated direction too, or level 2 is needlessly ill-conditioned.
    std::vector<Complex> level1_omegas;
    for (const auto& row : proj) {
      const Complex omega = row[0] + row[1];
      if (std::none_of(level1_omegas.begin(), level1_omegas.end(),
                       [&](Complex o) { return std::abs(o - omega) < 1e-12; }))
        level1_omegas.push_back(omega);
    }
    if (d >= 3 && min_node_gap(level1_omegas) < 0.05) continue;

    std::vector<Complex> coefficients;
    for (std::size_t j = 0; j < n; ++j) coefficients.push_back(random_coefficient(rng));
    bool separated = true;
    for (const auto& pile : piles) {
      Complex sum{};
      for (auto j : pile) sum += coefficients[j];
      separated = separated && std::abs(sum) > 0.1;
    }
    if (d >= 3 && sizes[0] >= 2)
      separated = separated && std::abs(coefficients[piles[0][0]] + coefficients[piles[0][1]]) > 0.1;
    if (!separated) continue;

    auto model = from_projections(basis, proj, coefficients);
    return {std::move(model), std::move(basis), std::move(piles)};
  }
}

Instance cancellation_instance(std::size_t d, std::size_t n, std::uint64_t seed) {
  if (d < 2 || n < 3) throw Error(ErrorKind::kInvalidArgument, "cancellation_instance: d >= 2, n >= 3");
  std::mt19937_64 rng(seed);
  auto basis = random_basis(d, rng);
  const std::size_t nu0 = n - 1;
  const auto base_phases = grid_phases(nu0, rng);
  std::vector<std::vector<Complex>> proj;
  std::vector<Complex> coefficients;
  std::vector<std::vector<std::size_t>> piles;
  for (std::size_t p = 0; p < nu0; ++p) {
    const Complex phi0 = grid_log(base_phases[p], rng);
    const std::size_t members = p == 0 ? 2 : 1;
    const auto phases1 = grid_phases(members, rng);
    std::vector<std::size_t> idx;
    for (std::size_t m = 0; m < members; ++m) {
      std::vector<Complex> row(d);
      row[0] = phi0;
      row[1] = grid_log(phases1[m], rng);
      for (std::size_t i = 2; i < d; ++i) row[i] = random_log(rng);
      idx.push_back(proj.size());
      proj.push_back(std::move(row));
    }
    piles.push_back(std::move(idx));
  }
  for (std::size_t j = 0; j < n; ++j) coefficients.push_back(random_coefficient(rng));
  coefficients[1] = -coefficients[0];
  auto model = from_projections(basis, proj, coefficients);
  return {std::move(model), std::move(basis), std::move(piles)};
}

UnivariateInstance univariate_instance(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  UnivariateInstance inst;
  for (double phase : grid_phases(n, rng)) inst.nodes.push_back(std::exp(grid_log(phase, rng)));
  for (std::size_t j = 0; j < n; ++j) inst.coefficients.push_back(random_coefficient(rng));
  for (std::size_t s = 0; s < 2 * n + 1; ++s) {
    Complex v{};
    for (std::size_t j = 0; j < n; ++j)
      v += inst.coefficients[j] * std::pow(inst.nodes[j], static_cast<double>(s));
    inst.samples.push_back(v);
  }
  return inst;
}

double conservation_error(const RecoveryReport& report) {
  double worst = 0.0;
  if (report.levels.empty()) return worst;
  Complex total{};
  for (const auto& p : report.levels[0].piles) total += p.coefficient_sum;
  worst = std::abs(total - report.reference_sample) / std::abs(report.reference_sample);
  for (std::size_t l = 1; l < report.levels.size(); ++l) {
    const auto& parents = report.levels[l - 1].piles;
    std::vector<Complex> sums(parents.size());
    for (const auto& child : report.levels[l].piles) sums.at(child.parent.value()) += child.coefficient_sum;
    for (std::size_t p = 0; p < parents.size(); ++p) {
      if (parents[p].member_count == std::size_t{0}) continue;
      const double ref = std::abs(parents[p].coefficient_sum);
      worst = std::max(worst, std::abs(sums[p] - parents[p].coefficient_sum) / ref);
    }
  }
  return worst;
}

double consumed_residual(const RecoveryReport& report, const Oracle& oracle) {
  const auto& calls = oracle.ledger().calls();
  const std::span<const SampleRecord> consumed(calls.end() - static_cast<std::ptrdiff_t>(report.samples_used),
                                               calls.end());
  return max_relative_residual(*report.model, consumed);
}

}  // namespace minexp::testing
