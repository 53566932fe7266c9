#pragma once

#include <stdexcept>
#include <string>

namespace fdc {

/// A special-function evaluation could not reach the requested tolerance.
/// Carries the best partial result and the estimated error actually attained.
class EvalFailure : public std::runtime_error {
public:
  EvalFailure(const std::string& msg, double partial_sum, double est_error)
      : std::runtime_error(msg), partial(partial_sum), estimated_error(est_error) {}
  double partial;
  double estimated_error;
};

/// Invalid configuration or parameter combination (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The Gramian integrand is non-integrable for the requested parameters
/// (CLI exit code 3). Requires a strictly positive cutoff eps when r <= 1/2.
class IntegrabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An unregularized solve hit a numerically singular operator.
class RankDeficiencyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace fdc
