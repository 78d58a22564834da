#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "minexp/multivar.hpp"

namespace minexp::cli {

using Json = nlohmann::ordered_json;

/// {"dimension": d, "terms": [{"coeff": [re, im], "exponent": [[re, im], ...]}]}
Json model_to_json(const ExponentialModel& model);
ExponentialModel model_from_json(const Json& doc);
ExponentialModel read_model(const std::string& path);
void write_model(const std::string& path, const ExponentialModel& model);

struct RunConfig {
  /// Basis directions delta_0..delta_{d-1}; empty means step * identity.
  std::vector<Point> directions;
  double step = 1.0;
  std::vector<std::vector<double>> multipliers;
  std::vector<std::vector<double>> weights;
  double phase_floor = -std::numbers::pi;

  double rel_tol = 1e-8;
  double gap_factor = 1e3;
  double node_tol = 1e-6;
  std::size_t max_terms = 32;
  std::optional<std::size_t> budget_cap;
  std::uint64_t seed = 0;
  /// Set: recover_known_n with this n. Unset: recover_unknown_n.
  std::optional<std::size_t> known_n;

  NodeMethod node_method = NodeMethod::kGeneralizedEig;
  CoefficientMode coefficient_mode = CoefficientMode::kLeastSquares;
  std::size_t rescue_shifts = 0;
  std::optional<Point> rescue_epsilon;
  bool parallel_piles = false;
  /// Relative noise level added to synthetic sources (times sum |alpha|).
  double noise = 0.0;

  std::optional<std::string> model_path;
  std::optional<std::string> samples_path;
  std::optional<std::string> out_dir;

  bool operator==(const RunConfig&) const = default;
};

/// Unknown keys and non-positive tolerances are rejected with kParseError.
RunConfig config_from_json(const Json& doc);
Json config_to_json(const RunConfig& config);
RunConfig read_config(const std::string& path);

DirectionBasis make_basis(const RunConfig& config, std::size_t dimension);
RecoveryConfig make_recovery_config(const RunConfig& config);

Json report_to_json(const RecoveryReport& report, std::span<const SampleRecord> consumed);

Json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace minexp::cli
