#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "minexp/linalg.hpp"

namespace minexp {

/// Sample locations are real d-vectors.
using Point = std::vector<double>;

struct Term {
  Complex coefficient;
  std::vector<Complex> exponent;
  friend bool operator==(const Term&, const Term&) = default;
};

/// f(x) = sum_j coefficient_j * exp(<exponent_j, x>), with the bilinear
/// (non-conjugated) inner product <phi, x> = sum_i phi_i x_i.
class ExponentialModel {
 public:
  ExponentialModel(std::size_t dimension, std::vector<Term> terms);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  const Term& term(std::size_t j) const { return terms_.at(j); }

  friend bool operator==(const ExponentialModel&, const ExponentialModel&) = default;

 private:
  std::size_t dimension_;
  std::vector<Term> terms_;
};

/// The window (floor, floor + 2*pi] in which imaginary parts of recovered
/// inner products are taken. The default is the principal branch.
struct PhaseWindow {
  double floor = -std::numbers::pi;

  double centre() const noexcept { return floor + std::numbers::pi; }
  /// Maps an angle into the window.
  double wrap(double angle) const;
};

/// Sampling geometry: delta_0 (= Delta), delta_1, ..., delta_{d-1}, the shift
/// multipliers kappa per identification level, and the weights used to form
/// the accumulated base direction at levels >= 1.
class DirectionBasis {
 public:
  /// `multipliers[i-1]` is the kappa schedule of level i; an empty or short
  /// schedule is completed with consecutive values (the default is l-1).
  /// `combination_weights[i-1]` holds the i weights of delta_0..delta_{i-1}
  /// for level i; missing entries default to 1.
  explicit DirectionBasis(std::vector<Point> directions,
                          std::vector<std::vector<double>> multipliers = {},
                          std::vector<std::vector<double>> combination_weights = {});

  /// e_1, ..., e_d scaled by `step`.
  static DirectionBasis standard(std::size_t dimension, double step = 1.0);

  std::size_t dimension() const noexcept { return directions_.size(); }
  const std::vector<Point>& directions() const noexcept { return directions_; }
  const Point& direction(std::size_t i) const { return directions_.at(i); }

  const std::vector<std::vector<double>>& multiplier_schedules() const noexcept {
    return multipliers_;
  }
  const std::vector<std::vector<double>>& weight_schedules() const noexcept {
    return weights_;
  }

  /// First `count` multipliers of level `level` (>= 1).
  std::vector<double> multipliers(std::size_t level, std::size_t count) const;
  /// Weights of delta_0..delta_{level-1} at `level` (>= 1).
  std::vector<double> weights(std::size_t level) const;
  /// sum_t weights[t] * delta_t for t < level.
  Point accumulated_direction(std::size_t level, std::span<const double> weights) const;

  /// Directions stacked row-wise.
  Eigen::MatrixXd direction_matrix() const;

  DirectionBasis with_multipliers(std::size_t level, std::vector<double> schedule) const;
  DirectionBasis with_weights(std::size_t level, std::vector<double> weights) const;

 private:
  std::vector<Point> directions_;
  std::vector<std::vector<double>> multipliers_;
  std::vector<std::vector<double>> weights_;
};

/// margins[j][i] = (pi - |Im<phi_j, delta_i> - centre|) / ||delta_i||, i.e. the
/// slack pi/||delta|| - |Im<phi, delta/||delta||>| measured about the window
/// centre. All margins must be strictly positive for the instance to be
/// admissible.
struct NyquistCertificate {
  std::vector<std::vector<double>> margins;
  PhaseWindow window;
  bool valid = false;

  double min_margin() const;
};

Complex inner_product(std::span<const Complex> exponent, std::span<const double> point);

Complex evaluate(const ExponentialModel& model, std::span<const double> point);

NyquistCertificate validate_nyquist(const ExponentialModel& model,
                                    const DirectionBasis& basis,
                                    PhaseWindow window = {});

/// Merges terms whose exponents agree componentwise within `merge_tol`, drops
/// coefficients with magnitude <= merge_tol and sorts by the key
/// (Re phi_1, Im phi_1, ..., Re phi_d, Im phi_d).
/// Throws kDegenerateModel when nothing survives.
ExponentialModel canonicalize(const ExponentialModel& model, double merge_tol = 0.0);

/// Term-by-term comparison after optimal assignment on exponent distance.
struct ModelComparison {
  bool same_size = false;
  /// assignment[j] = index into `actual` matched with expected term j.
  std::vector<std::size_t> assignment;
  double max_exponent_error = 0.0;     // ||phi_a - phi_e|| / ||phi_e||
  double max_coefficient_error = 0.0;  // |alpha_a - alpha_e| / |alpha_e|

  double max_error() const { return std::max(max_exponent_error, max_coefficient_error); }
};

ModelComparison compare_models(const ExponentialModel& expected,
                               const ExponentialModel& actual);

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method).
std::vector<std::size_t> optimal_assignment(const Eigen::MatrixXd& cost);

}  // namespace minexp
