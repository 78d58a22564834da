#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "minexp/multivar.hpp"

namespace minexp::testing {

struct Instance {
  ExponentialModel model;
  DirectionBasis basis;
  /// Terms grouped by the pile they share on the base line.
  std::vector<std::vector<std::size_t>> base_piles;
};

/// Random basis step * (I + 0.3 R), re-drawn until well conditioned.
DirectionBasis random_basis(std::size_t d, std::mt19937_64& rng, double step = 0.5);

/// Random admissible instance; base nodes at least `separation` apart.
Instance admissible_instance(std::size_t d, std::size_t n, std::uint64_t seed,
                             double separation = 1e-3);

/// Planted collisions: at least one base pile holds two or more terms
/// (exponent differences orthogonal to Delta). For d >= 3 one pair also
/// shares its inner product with delta_1 and only separates at level 2.
Instance collision_instance(std::size_t d, std::size_t n, std::uint64_t seed);

/// A two-term base pile whose coefficients cancel exactly (A_j = 0); the
/// remaining terms are collision free. Requires d >= 2 and n >= 3.
Instance cancellation_instance(std::size_t d, std::size_t n, std::uint64_t seed);

/// Random univariate exponential sum sampled at s = 0 .. 2n-1.
struct UnivariateInstance {
  std::vector<Complex> nodes;
  std::vector<Complex> coefficients;
  std::vector<Complex> samples;
};
UnivariateInstance univariate_instance(std::size_t n, std::uint64_t seed);

/// Sum of the level-0 pile coefficients against F_0, and per-level sums of
/// split piles against their parents; largest relative violation.
double conservation_error(const RecoveryReport& report);

/// max relative residual of the recovered model over the samples the run
/// consumed (the last `report.samples_used` ledger entries).
double consumed_residual(const RecoveryReport& report, const Oracle& oracle);

}  // namespace minexp::testing
