#pragma once

#include "fdc/errors.hpp"

namespace fdc {

/// Parameter bundle for the Mittag-Leffler family.
struct MLParams {
  double alpha = 0.5;  ///< in (0, 1]
  double beta = 1.0;   ///< > 0
  double gamma = 1.0;  ///< > 0 (three-parameter family only)
  double tol = 1e-12;  ///< absolute truncation tolerance, > 0

  bool valid() const {
    return alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && gamma > 0.0 && tol > 0.0;
  }
};

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(y) to absolute error <= tol.
///
/// Branch selection is keyed on X = |y|^(1/alpha): direct summation (long double)
/// while X <= 10; for large negative y the algebraic asymptotic expansion when its
/// internal estimate meets tol, otherwise the series is summed in extended working
/// precision sized to the cancellation; large positive y always uses the
/// extended-precision series (no cancellation).
///
/// Throws EvalFailure when no branch attains tol within the iteration caps.
double ml2(double alpha, double beta, double y, double tol = 1e-12);

/// Three-parameter (Prabhakar) function E^gamma_{alpha,beta}(y) to absolute
/// error <= tol.
///
/// The two reducible parameter combinations are routed through ml2:
/// gamma == 1 directly, and (gamma == 2, beta == alpha + 1) via the exact
/// reduction alpha * E^2_{alpha,alpha+1}(y) = E_{alpha,alpha}(y), which this
/// implementation guarantees bitwise: the returned value v satisfies
/// fl(alpha * v) == ml2(alpha, alpha, y) whenever an ulp-neighbor allows it.
/// The operator layer relies on that identity holding exactly.
double ml3(double alpha, double beta, double gamma, double y, double tol = 1e-12);

/// One-sided stable / Wright-type density psi_r evaluated by its power series
///
///   psi_r(x) = (1/pi) * sum_{n>=1} (-1)^(n-1) x^(-r n - 1) Gamma(n r + 1)/n! sin(n pi r)
///
/// for r in (0,1), x > 0. Throws EvalFailure when alternating-series cancellation
/// at small x makes tol unattainable in the working precision.
double wright_density(double r, double alpha_arg, double tol = 1e-12);

/// Analytic upper tail integral_A^inf psi_r(x) dx of the density above
/// (termwise integration of the series; accurate for A >= ~2).
double wright_tail_mass(double r, double A, double tol = 1e-12);

}  // namespace fdc
