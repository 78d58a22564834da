#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "minexp/model.hpp"

namespace minexp {

struct SampleRecord {
  Point point;
  Complex value;
};

/// Append-only log of every oracle evaluation.
class SampleLedger {
 public:
  void append(Point point, Complex value) { calls_.push_back({std::move(point), value}); }
  std::size_t count() const noexcept { return calls_.size(); }
  const std::vector<SampleRecord>& calls() const noexcept { return calls_; }

 private:
  std::vector<SampleRecord> calls_;
};

class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t dimension() const = 0;
  virtual Complex value_at(std::span<const double> point) = 0;
};

/// Closed-form values of a known model.
class SyntheticSource final : public SampleSource {
 public:
  explicit SyntheticSource(ExponentialModel model) : model_(std::move(model)) {}
  std::size_t dimension() const override { return model_.dimension(); }
  Complex value_at(std::span<const double> point) override { return evaluate(model_, point); }
  const ExponentialModel& model() const noexcept { return model_; }

 private:
  ExponentialModel model_;
};

/// Adds circular complex Gaussian noise of total variance sigma^2
/// (sigma^2/2 in each of the real and imaginary parts).
class NoisySource final : public SampleSource {
 public:
  NoisySource(std::shared_ptr<SampleSource> inner, double sigma, std::uint64_t seed);
  std::size_t dimension() const override { return inner_->dimension(); }
  Complex value_at(std::span<const double> point) override;

 private:
  std::shared_ptr<SampleSource> inner_;
  double sigma_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Pre-recorded samples keyed by the point rounded to 12 decimals. A lookup
/// succeeds when every coordinate lies within `match_tol` of a stored point.
class TabulatedSource final : public SampleSource {
 public:
  static constexpr double kDefaultMatchTol = 1e-9;

  explicit TabulatedSource(std::size_t dimension, double match_tol = kDefaultMatchTol);

  /// Throws kInvalidArgument when a point already present carries a value
  /// more than match_tol away.
  void insert(Point point, Complex value);

  std::size_t dimension() const override { return dimension_; }
  std::size_t size() const noexcept { return entries_.size(); }
  /// Throws kMissingSample naming the point when nothing matches.
  Complex value_at(std::span<const double> point) override;

  /// Sample file: a `dim=<d>` header, then one `x_1 ... x_d re im` row per
  /// sample; `#` starts a comment.
  static TabulatedSource read(std::istream& in, double match_tol = kDefaultMatchTol);
  static TabulatedSource load(const std::string& path, double match_tol = kDefaultMatchTol);
  void write(std::ostream& out) const;

 private:
  using Key = std::vector<long long>;
  Key quantize(std::span<const double> point) const;

  std::size_t dimension_;
  double match_tol_;
  std::map<Key, SampleRecord> entries_;
};

/// The sampling front door: forwards to a source and records every call.
class Oracle {
 public:
  explicit Oracle(std::shared_ptr<SampleSource> source);

  Complex sample(std::span<const double> point);
  std::size_t dimension() const { return source_->dimension(); }
  std::size_t count() const noexcept { return ledger_.count(); }
  const SampleLedger& ledger() const noexcept { return ledger_; }

 private:
  std::shared_ptr<SampleSource> source_;
  SampleLedger ledger_;
};

void write_sample_file(std::ostream& out, std::size_t dimension,
                       std::span<const SampleRecord> samples);

enum class PlanMode { kKnownN, kUnknownNWorstCase };

/// Points the recovery drivers will request. kKnownN lists the (d+1)n points
/// of the minimal-budget pipeline in request order. kUnknownNWorstCase lists
/// budget_bound(d, n_hint) points: the base line s = 0..2n, then the level
/// grids kappa_l * (accumulated direction) + s * delta_i, s = 1, 2, ...,
/// for up to n_hint piles. Multiplier re-draws and cancellation-rescue
/// shifts are not covered.
std::vector<Point> plan_points(const DirectionBasis& basis, std::size_t n_hint, PlanMode mode);

struct GenerationOptions {
  /// Required Nyquist slack as a fraction of pi (0 < margin < 1).
  double margin = 0.1;
  /// Minimum pairwise distance of the base nodes exp(<phi_j, Delta>).
  double min_separation = 1e-3;
  /// Real parts of <phi_j, delta_i> are drawn from [-spread, spread].
  double real_spread = 0.05;
  PhaseWindow window;
};

/// Random admissible n-term model for `basis`: |alpha| log-uniform in
/// [0.1, 10], inner products with every basis direction inside the shrunk
/// phase window, base-node imaginary parts on a jittered grid.
/// Throws kGenerationFailed when the constraints cannot be met.
ExponentialModel generate_admissible_model(const DirectionBasis& basis, std::size_t n,
                                           std::uint64_t seed,
                                           const GenerationOptions& options = {});

}  // namespace minexp
