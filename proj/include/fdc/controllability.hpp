#pragma once

#include <vector>

#include "fdc/fracops.hpp"

namespace fdc {

/// Result of a Gramian assembly.
struct GramianReport {
  Mat lambda;                          ///< N x N, symmetric PSD
  double smin = 0.0;                   ///< smallest eigenvalue
  double smax = 0.0;                   ///< largest eigenvalue
  std::vector<int> unreachable_modes;  ///< 1-based indices with b_i == 0
  double eps_used = 0.0;               ///< cutoff actually applied
};

/// Quadrature rule used for the Gramian time integral: graded geometric
/// Gauss-Legendre panels on [max(eps, s_head), tau-h]. When eps == 0 the
/// remaining head [0, s_head] is integrated analytically (s_head > 0 chosen so
/// |ups_i| s_head^r <= 1/2 for every retained mode).
struct QuadRule {
  Vec nodes;
  Vec weights;
  double s_head = 0.0;  ///< 0 when eps > 0
};

QuadRule gram_quadrature(const FracParams& p, int n_modes);

/// Kernel cross-correlation matrix on n_modes modes:
///   W[i][j] = b_i b_j integral k_i(s) k_j(s) ds
/// over [eps, tau-h] (plus the analytic head when eps == 0).
/// Throws IntegrabilityError when r <= 1/2 and eps == 0.
Mat assemble_w(const FracParams& p, const Actuator& act, int n_modes,
               double tol = 1e-12);

/// Row of the adjoint kernel at time sigma in [0, tau-h):
/// entry i = b_i (tau-sigma-h)^(r-1) r E^2_{r,r+1}(ups_i (tau-sigma-h)^r).
/// Throws std::domain_error at or beyond sigma = tau-h.
Vec adjoint_kernel_row(const FracParams& p, const Actuator& act, double sigma,
                       int N, double tol = 1e-12);

/// Assemble the regional Gramian. W is built on an enriched mode set
/// (3N modes) and compressed through the rectangular region Gram block:
/// Lambda = G W G^T with G the first N rows of region_gram(3N).
GramianReport gramian(const FracParams& p, const Actuator& act,
                      const Region& region, int N, double tol = 1e-12);

/// Relative spectral-gap test: smin > tol * smax.
bool is_region_controllable(const GramianReport& report, double tol);

}  // namespace fdc
