#pragma once

#include <string>
#include <vector>

#include "minexp/model.hpp"

namespace minexp::cli {

/// The four-term bivariate reference sum used by the demo and the
/// acceptance suite.
ExponentialModel reference_model();

/// Phase window used by the demo runs: (-pi/4, 7pi/4].
PhaseWindow reference_window();

struct DemoResult {
  std::string transcript;
  /// Quantities outside 5e-4 (componentwise relative) of the published
  /// 4-digit values.
  std::vector<std::string> deviations;
};

/// Runs the known-n scenario (Delta = (0.01, 0.01), delta_1 = (-0.01, 0.01))
/// and the collision scenario (Delta = (0.03, 0), delta_1 = (0, 0.01)).
DemoResult run_demo();

}  // namespace minexp::cli
