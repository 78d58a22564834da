#include "minexp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace minexp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

bool canonical_less(const Term& a, const Term& b) {
  for (std::size_t i = 0; i < a.exponent.size(); ++i) {
    if (a.exponent[i].real() != b.exponent[i].real())
      return a.exponent[i].real() < b.exponent[i].real();
    if (a.exponent[i].imag() != b.exponent[i].imag())
      return a.exponent[i].imag() < b.exponent[i].imag();
  }
  return false;
}

bool exponents_close(const Term& a, const Term& b, double tol) {
  for (std::size_t i = 0; i < a.exponent.size(); ++i) {
    if (std::abs(a.exponent[i].real() - b.exponent[i].real()) > tol) return false;
    if (std::abs(a.exponent[i].imag() - b.exponent[i].imag()) > tol) return false;
  }
  return true;
}

double vector_distance(std::span<const Complex> a, std::span<const Complex> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

double vector_norm(std::span<const Complex> a) {
  double s = 0.0;
  for (auto z : a) s += std::norm(z);
  return std::sqrt(s);
}

}  // namespace

ExponentialModel::ExponentialModel(std::size_t dimension, std::vector<Term> terms)
    : dimension_(dimension), terms_(std::move(terms)) {
  if (dimension_ == 0) throw Error(ErrorKind::kInvalidArgument, "model dimension must be >= 1");
  if (terms_.empty()) throw Error(ErrorKind::kInvalidArgument, "model needs at least one term");
  for (const auto& t : terms_) {
    if (t.exponent.size() != dimension_)
      throw Error(ErrorKind::kInvalidArgument, "exponent length differs from model dimension");
    if (!is_finite(t.coefficient) || !std::all_of(t.exponent.begin(), t.exponent.end(), is_finite))
      throw Error(ErrorKind::kInvalidArgument, "model entries must be finite");
  }
}

double PhaseWindow::wrap(double angle) const {
  if (angle > floor && angle <= floor + kTwoPi) return angle;
  double shifted = std::fmod(angle - floor, kTwoPi);
  if (shifted <= 0.0) shifted += kTwoPi;
  return floor + shifted;
}

DirectionBasis::DirectionBasis(std::vector<Point> directions,
                               std::vector<std::vector<double>> multipliers,
                               std::vector<std::vector<double>> combination_weights)
    : directions_(std::move(directions)),
      multipliers_(std::move(multipliers)),
      weights_(std::move(combination_weights)) {
  const std::size_t d = directions_.size();
  if (d == 0) throw Error(ErrorKind::kInvalidBasis, "basis needs at least one direction");
  for (const auto& dir : directions_) {
    if (dir.size() != d)
      throw Error(ErrorKind::kInvalidBasis, "every direction must have length d");
    if (!all_finite(dir)) throw Error(ErrorKind::kInvalidBasis, "directions must be finite");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(direction_matrix());
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) >= 1e-10 * s(0)) || s(0) == 0.0) {
    throw Error(ErrorKind::kInvalidBasis, "directions are not linearly independent");
  }
  for (const auto& schedule : multipliers_) {
    if (!all_finite(schedule)) throw Error(ErrorKind::kInvalidBasis, "multipliers must be finite");
    std::vector<double> sorted = schedule;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorKind::kInvalidBasis, "multipliers within a level must be distinct");
  }
  for (std::size_t level = 1; level <= weights_.size(); ++level) {
    const auto& w = weights_[level - 1];
    if (w.size() > level)
      throw Error(ErrorKind::kInvalidBasis, "level i takes at most i combination weights");
    for (double x : w) {
      if (!std::isfinite(x) || x == 0.0)
        throw Error(ErrorKind::kInvalidBasis, "combination weights must be finite and nonzero");
    }
  }
}

DirectionBasis DirectionBasis::standard(std::size_t dimension, double step) {
  std::vector<Point> dirs(dimension, Point(dimension, 0.0));
  for (std::size_t i = 0; i < dimension; ++i) dirs[i][i] = step;
  return DirectionBasis(std::move(dirs));
}

std::vector<double> DirectionBasis::multipliers(std::size_t level, std::size_t count) const {
  if (level == 0) throw Error(ErrorKind::kInvalidArgument, "multipliers start at level 1");
  std::vector<double> out;
  if (level - 1 < multipliers_.size()) {
    const auto& schedule = multipliers_[level - 1];
    out.assign(schedule.begin(), schedule.begin() + std::min(count, schedule.size()));
  }
  double next = out.empty() ? 0.0 : *std::max_element(out.begin(), out.end()) + 1.0;
  while (out.size() < count) out.push_back(next++);
  return out;
}

std::vector<double> DirectionBasis::weights(std::size_t level) const {
  std::vector<double> out(level, 1.0);
  if (level >= 1 && level - 1 < weights_.size()) {
    const auto& w = weights_[level - 1];
    std::copy(w.begin(), w.end(), out.begin());
  }
  return out;
}

Point DirectionBasis::accumulated_direction(std::size_t level,
                                            std::span<const double> weights) const {
  if (level > dimension() || weights.size() != level)
    throw Error(ErrorKind::kInvalidArgument, "accumulated_direction: bad level or weights");
  Point out(dimension(), 0.0);
  for (std::size_t t = 0; t < level; ++t)
    for (std::size_t k = 0; k < dimension(); ++k) out[k] += weights[t] * directions_[t][k];
  return out;
}

Eigen::MatrixXd DirectionBasis::direction_matrix() const {
  const auto d = static_cast<Eigen::Index>(directions_.size());
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = directions_[r][c];
  return m;
}

DirectionBasis DirectionBasis::with_multipliers(std::size_t level,
                                                std::vector<double> schedule) const {
  auto m = multipliers_;
  if (m.size() < level) m.resize(level);
  m[level - 1] = std::move(schedule);
  return DirectionBasis(directions_, std::move(m), weights_);
}

DirectionBasis DirectionBasis::with_weights(std::size_t level, std::vector<double> weights) const {
  auto w = weights_;
  if (w.size() < level) w.resize(level);
  w[level - 1] = std::move(weights);
  return DirectionBasis(directions_, multipliers_, std::move(w));
}

double NyquistCertificate::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& row : margins)
    for (double x : row) m = std::min(m, x);
  return m;
}

Complex inner_product(std::span<const Complex> exponent, std::span<const double> point) {
  Complex s{};
  for (std::size_t i = 0; i < exponent.size(); ++i) s += exponent[i] * point[i];
  return s;
}

Complex evaluate(const ExponentialModel& model, std::span<const double> point) {
  if (point.size() != model.dimension())
    throw Error(ErrorKind::kInvalidArgument, "evaluate: point dimension mismatch");
  Complex sum{};
  for (const auto& t : model.terms())
    sum += t.coefficient * std::exp(inner_product(t.exponent, point));
  return sum;
}

NyquistCertificate validate_nyquist(const ExponentialModel& model,
                                    const DirectionBasis& basis, PhaseWindow window) {
  if (model.dimension() != basis.dimension())
    throw Error(ErrorKind::kInvalidArgument, "validate_nyquist: dimension mismatch");
  NyquistCertificate cert;
  cert.window = window;
  cert.valid = true;
  for (const auto& t : model.terms()) {
    std::vector<double> row;
    for (const auto& dir : basis.directions()) {
      double norm = 0.0;
      for (double x : dir) norm += x * x;
      norm = std::sqrt(norm);
      const double im = inner_product(t.exponent, dir).imag();
      const double margin = (std::numbers::pi - std::abs(im - window.centre())) / norm;
      row.push_back(margin);
      if (!(margin > 0.0)) cert.valid = false;
    }
    cert.margins.push_back(std::move(row));
  }
  return cert;
}

ExponentialModel canonicalize(const ExponentialModel& model, double merge_tol) {
  if (!(merge_tol >= 0.0))
    throw Error(ErrorKind::kInvalidArgument, "canonicalize: merge_tol must be >= 0");
  std::vector<Term> sorted = model.terms();
  std::stable_sort(sorted.begin(), sorted.end(), canonical_less);

  std::vector<Term> merged;
  for (const auto& t : sorted) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const Term& m) { return exponents_close(m, t, merge_tol); });
    if (it == merged.end()) {
      merged.push_back(t);
    } else {
      it->coefficient += t.coefficient;
    }
  }
  std::erase_if(merged, [&](const Term& t) { return std::abs(t.coefficient) <= merge_tol; });
  if (merged.empty())
    throw Error(ErrorKind::kDegenerateModel, "all terms cancel; model is identically zero");
  return ExponentialModel(model.dimension(), std::move(merged));
}

std::vector<std::size_t> optimal_assignment(const Eigen::MatrixXd& cost) {
  // Shortest augmenting path with row/column potentials, 1-based internally.
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows())
    throw Error(ErrorKind::kInvalidArgument, "optimal_assignment: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1),
                                static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

ModelComparison compare_models(const ExponentialModel& expected,
                               const ExponentialModel& actual) {
  if (expected.dimension() != actual.dimension())
    throw Error(ErrorKind::kInvalidArgument, "compare_models: dimension mismatch");
  ModelComparison out;
  if (expected.size() != actual.size()) {
    out.max_exponent_error = std::numeric_limits<double>::infinity();
    out.max_coefficient_error = std::numeric_limits<double>::infinity();
    return out;
  }
  out.same_size = true;
  const auto n = static_cast<Eigen::Index>(expected.size());
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      cost(r, c) = vector_distance(expected.term(r).exponent, actual.term(c).exponent);
  out.assignment = optimal_assignment(cost);
  for (std::size_t j = 0; j < expected.size(); ++j) {
    const auto& e = expected.term(j);
    const auto& a = actual.term(out.assignment[j]);
    const double en = vector_norm(e.exponent);
    const double ed = vector_distance(e.exponent, a.exponent);
    out.max_exponent_error = std::max(out.max_exponent_error, en > 0.0 ? ed / en : ed);
    const double cn = std::abs(e.coefficient);
    const double cd = std::abs(e.coefficient - a.coefficient);
    out.max_coefficient_error = std::max(out.max_coefficient_error, cn > 0.0 ? cd / cn : cd);
  }
  return out;
}

}  // namespace minexp
