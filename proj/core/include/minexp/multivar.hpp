#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minexp/linalg.hpp"
#include "minexp/model.hpp"
#include "minexp/oracle.hpp"
#include "minexp/prony.hpp"

namespace minexp {

/// Knobs shared by both recovery drivers.
struct RecoveryConfig {
  RankOptions rank;
  /// Nodes closer than node_tol * max|node| are treated as one pile.
  double node_tol = 1e-6;
  std::size_t max_terms = 32;
  /// Abort once this many samples were drawn. Defaults to
  /// budget_bound(d, max_terms).
  std::optional<std::size_t> budget_cap;
  NodeMethod node_method = NodeMethod::kGeneralizedEig;
  CoefficientMode coefficient_mode = CoefficientMode::kLeastSquares;
  PhaseWindow window;
  /// Number of parallel base-line shifts probed for hidden (cancelled) piles;
  /// 0 disables the rescue.
  std::size_t rescue_shifts = 0;
  /// Shift vector for the rescue; default_rescue_shift(Delta, seed) if unset.
  std::optional<Point> rescue_epsilon;
  /// Seeds multiplier re-draws, weight perturbations and the rescue shift.
  std::uint64_t seed = 0;
  /// Disentangle the piles of one level concurrently.
  bool parallel_piles = false;
  /// Known-n: |alpha_j| below this fraction of max|alpha| is reported as a
  /// suspected cancellation.
  double cancellation_floor = 1e-12;
};

/// A group of terms whose inner products with delta_0..delta_level coincide.
struct PileState {
  std::size_t level = 0;
  std::size_t pile_index = 0;
  /// Common inner products with delta_0, ..., delta_level.
  std::vector<Complex> inner_products;
  /// Sum of the member coefficients (A_j).
  Complex coefficient_sum{};
  /// Number of terms the next level separated this pile into.
  std::optional<std::size_t> member_count;
  /// Index of the pile of the previous level this one was split from.
  std::optional<std::size_t> parent;
};

struct LevelState {
  std::size_t level = 0;
  /// Distinct inner products after this level (nu_level).
  std::size_t pile_count = 0;
  /// Accumulated exponents Omega used as the Vandermonde nodes at this level
  /// (level 0: the base logs Phi_j).
  std::vector<Complex> omegas;
  /// Ranks r_j found for the piles of the previous level (empty at level 0).
  std::vector<std::size_t> pile_ranks;
  std::vector<double> multipliers;
  std::vector<double> weights;
  std::size_t samples_drawn = 0;
  std::vector<PileState> piles;
};

struct RecoveryReport {
  std::optional<ExponentialModel> model;
  /// inner_products[j][i] = <phi_j, delta_i>, aligned with model->terms().
  std::vector<std::vector<Complex>> inner_products;
  std::size_t samples_used = 0;
  std::vector<LevelState> levels;
  std::vector<RankDecision> rank_decisions;
  std::vector<std::string> warnings;
  /// F_0 of the base line the level-0 fit used.
  Complex reference_sample{};
  /// Origin of that base line (nonzero after a cancellation rescue).
  Point base_origin;
};

class CollisionDetectedError : public Error {
 public:
  CollisionDetectedError(const std::string& message, std::size_t nu)
      : Error(ErrorKind::kCollisionDetected, message), nu_(nu) {}
  /// Number of distinguishable base nodes.
  std::size_t nu() const noexcept { return nu_; }

 private:
  std::size_t nu_;
};

class BudgetExceededError : public Error {
 public:
  BudgetExceededError(const std::string& message, RecoveryReport partial)
      : Error(ErrorKind::kBudgetExceeded, message), partial_(std::move(partial)) {}
  const RecoveryReport& partial() const noexcept { return partial_; }

 private:
  RecoveryReport partial_;
};

/// Minimal-budget recovery for a known number of terms whose base nodes do not
/// collide: 2n samples along Delta, n samples per identification shift,
/// (d+1)n in total. Throws CollisionDetectedError when the base Hankel matrix
/// is rank deficient.
RecoveryReport recover_known_n(Oracle& oracle, const DirectionBasis& basis, std::size_t n,
                               const RecoveryConfig& config = {});

/// Solves sum_j exp(kappa_l * log_j) A_j = samples_l for A.
/// Throws SingularMatrixError when the system is singular (re-draw kappa).
std::vector<Complex> solve_shift_system(std::span<const Complex> base_logs,
                                        std::span<const double> kappas,
                                        std::span<const Complex> shift_samples);

/// Per term, solves D phi = (<phi, delta_0>, ..., <phi, delta_{d-1}>) where D
/// stacks the basis directions row-wise.
std::vector<std::vector<Complex>> assemble_exponents(
    const std::vector<std::vector<Complex>>& inner_products, const DirectionBasis& basis);

/// Sparsity-agnostic recovery with collision disentanglement across the
/// identification levels and, optionally, cancellation rescue on the base
/// line. Final coefficients are a least-squares fit over every consumed sample.
RecoveryReport recover_unknown_n(Oracle& oracle, const DirectionBasis& basis,
                                 const RecoveryConfig& config = {});

struct PileSplit {
  std::vector<Complex> sub_nodes;
  std::vector<Complex> sub_logs;
  std::vector<Complex> sub_coefficients;
  std::size_t rank_used = 0;
  /// The requested rank gave a degenerate pencil and was lowered.
  bool rank_reduced = false;
};

/// Splits a pile from its samples A_0, A_1, ... along the level's shift
/// direction. Requires at least 2r values.
PileSplit disentangle_pile(std::span<const Complex> pile_sequence, std::size_t r,
                           PhaseWindow window = {},
                           NodeMethod method = NodeMethod::kGeneralizedEig);

struct RescueOutcome {
  /// Largest confident rank seen over the shifted lines (confident=false if
  /// none of them was conclusive).
  RankDecision decision;
  /// Shift index k whose line revealed decision.rank > nu_prev, else 0.
  std::size_t best_shift = 0;
  /// lines[k-1] holds the samples drawn along origin + k*epsilon + s*direction
  /// (lines[0] is the unshifted line when k_max == 0).
  std::vector<EquidistantSequence> lines;
};

/// Probes lines parallel to `direction` through origin + k*epsilon,
/// k = 1..k_max, re-detecting the sparsity on each. With k_max == 0 the
/// unshifted line is examined instead, reproducing the original detection.
RescueOutcome cancellation_rescue(Oracle& oracle, const Point& direction, const Point& epsilon,
                                  std::size_t k_max, std::size_t nu_prev,
                                  const RankOptions& options = {},
                                  std::size_t max_terms = 32, const Point& origin = {});

/// Seeded pseudo-random shift with norm 1e-2 * ||direction||.
Point default_rescue_shift(const Point& direction, std::uint64_t seed);

/// Engineering constant of budget_bound.
inline constexpr std::size_t kBudgetConstant = 4;

/// C * (d+1) * max_{1<=nu<=n} nu*(n-nu+1).
std::size_t budget_bound(std::size_t d, std::size_t n, std::size_t constant = kBudgetConstant);

/// max_p |model(x_p) - F_p| / max_p |F_p| over the recorded samples.
double max_relative_residual(const ExponentialModel& model, std::span<const SampleRecord> samples);

}  // namespace minexp
