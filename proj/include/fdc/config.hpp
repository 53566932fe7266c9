#pragma once

#include <optional>
#include <string>

#include "fdc/fracops.hpp"

namespace fdc {

/// Tolerances used by the CLI pipelines.
struct Tolerances {
  double ml = 1e-12;              ///< special-function absolute tolerance
  double residual = 5e-2;         ///< steering verification gate
  double controllability = 1e-10; ///< relative spectral-gap threshold
};

/// A fully validated experiment description loaded from a JSON document.
/// Unknown keys anywhere in the document are rejected.
struct ExperimentConfig {
  FracParams params{0.5, 1.0, 0.0, 0.0};
  bool eps_given = false;  ///< eps defaults to 0.05 (tau - h) when absent
  int modes = 25;
  int steps = 200;
  Actuator actuator = Actuator::zonal(0.0, 1.0);
  Region region{0.0, 1.0};
  Vec z0;             ///< length == modes
  Vec zd;             ///< length == modes
  History history;    ///< parsed from "phi"
  Vec u;              ///< simulate-only control samples, length == steps+1
  double reg = -1.0;  ///< < 0 selects the solver default
  Tolerances tol;
  bool emit_matrix = false;
  int spatial_points = 0;  ///< > 0 adds a spatial-grid CSV to simulate

  /// Parse + validate; throws ConfigError with a message naming the failed
  /// invariant (the CLI maps it to exit code 2).
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);

  void validate() const;
};

/// Serialize a double with 17 significant digits (%.17g), locale-independent.
std::string format_g17(double v);

}  // namespace fdc
