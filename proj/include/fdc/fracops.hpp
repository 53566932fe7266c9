#pragma once

#include <vector>

#include "fdc/spectral_model.hpp"

namespace fdc {

/// Fractional system parameters.
struct FracParams {
  double r;          ///< fractional order, in (0,1) for configurations
  double tau;        ///< horizon, > h
  double h;          ///< control delay, >= 0
  double eps = 0.0;  ///< synthesis/Gramian cutoff near the kernel singularity

  /// Configuration-level validation (strict r in (0,1)); operator-level entry
  /// points additionally accept r == 1 for classical-limit checks.
  void validate() const;
};

/// Scalar control history on [-h, 0], piecewise linear between samples.
struct History {
  Vec grid;  ///< increasing, grid(0) = -h, grid(last) = 0; empty when h == 0
  Vec vals;

  static History zero() { return {}; }
  static History constant(double h, double value);
  bool empty() const { return grid.size() == 0; }
};

/// Piecewise-linear control on a strictly increasing grid over [0, tau-h],
/// together with the history segment.
struct ControlSignal {
  Vec grid;  ///< size M+1, grid(0) = 0, grid(M) = tau - h
  Vec u;     ///< size M+1
  History history;

  static ControlSignal constant(const FracParams& p, int M, double uval,
                                double phival = 0.0);
  void validate(const FracParams& p) const;
};

/// Sampled trajectory: one modal state column per output instant.
struct Trajectory {
  std::vector<double> times;
  Mat states;  ///< N x times.size()
};

// --- exact kernel primitives -------------------------------------------------
// All convolution quadrature in this library reduces to the closed primitive
//   integral (c0 + c1 s) s^(r-1) E_{r,r}(ups s^r) ds
//     = [ (c0 + c1 s) E_{r,1}(ups s^r) - c1 s E_{r,2}(ups s^r) ] / ups,
// with a direct term-series fallback when |ups| s^r is tiny (cancellation
// guard). Piecewise-linear inputs are therefore integrated exactly.

/// Kernel value k(s) = s^(r-1) E_{r,r}(ups s^r), s > 0.
double ml_kernel(double r, double ups, double s, double tol = 1e-12);

/// Exact integral of (c0 + c1 s) * k(s) over [s_lo, s_hi], 0 <= s_lo <= s_hi.
double kernel_bracket(double r, double ups, double s_lo, double s_hi, double c0,
                      double c1, double tol = 1e-12);

/// Exact integral of u(s) * k(s) over [s_lo, s_hi] where u is linear with
/// endpoint values u_lo at s_lo and u_hi at s_hi.
double conv_pwlinear(double r, double ups, double s_lo, double s_hi, double u_lo,
                     double u_hi, double tol = 1e-12);

/// Exact window mass integral_0^eps k(s) ds = (E_{r,1}(ups eps^r) - 1)/ups.
double window_mass(double r, double ups, double eps, double tol = 1e-12);

// --- solution operators -------------------------------------------------------

/// R_r(t): multiplies coefficient i by E_{r,1}(ups_i t^r).
Vec rr_apply(const FracParams& p, double t, const Eigen::Ref<const Vec>& z0,
             double tol = 1e-12);

/// S_r(t): multiplies coefficient i by r E^2_{r,r+1}(ups_i t^r).
Vec sr_apply(const FracParams& p, double t, const Eigen::Ref<const Vec>& v,
             double tol = 1e-12);

/// Mild solution of the delayed system: free term rr_apply(t, z0) plus the
/// control and history convolutions, each integrated exactly over the
/// piecewise-linear segments of the signal. out_times must lie in [0, tau].
Trajectory mild_solution(const FracParams& p, const Eigen::Ref<const Vec>& z0,
                         const Actuator& act, const ControlSignal& sig,
                         const std::vector<double>& out_times, double tol = 1e-12);

}  // namespace fdc
