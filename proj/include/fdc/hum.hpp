#pragma once

#include <vector>

#include "fdc/controllability.hpp"

namespace fdc {

/// Discrete control-to-terminal-state model on the uniform control grid.
/// A[i][k] is the exact kernel integral of the k-th piecewise-linear hat
/// (column K additionally carries the eps-window mass of the constant
/// extrapolation), d holds the lumped trapezoid weights of the energy metric,
/// B = G A, and rhs-related terms are the free/history contributions at tau.
struct HumSystem {
  Mat A;            ///< N x (K+1)
  Vec d;            ///< K+1 quadrature weights (d_K includes the eps window)
  Mat B;            ///< G * A
  Mat G;            ///< region Gram, N x N
  Vec b;            ///< actuator coefficients, N
  double dt = 0.0;  ///< control grid step
  int K = 0;        ///< last directly controlled node index
  int M = 0;        ///< grid size (M+1 samples on [0, tau-h])
  double eps_used = 0.0;
  Vec phi_free;  ///< rr_apply(tau, z0)
  Vec phi_hist;  ///< history contribution to z(tau)
};

/// Minimum-energy solve result.
struct HumSolution {
  Vec psi0;
  ControlSignal control;           ///< u* on [0, tau-h]; history echoed from input
  double energy = 0.0;             ///< J(u*)
  double residual = 0.0;           ///< relative omega-restricted terminal error
  double regularization = 0.0;     ///< Tikhonov parameter actually used
  double condition = 0.0;          ///< cond of the regularized operator
  double eps_window_fraction = 0.0;  ///< share of energy inside the eps window
};

struct PerturbationDraw {
  double margin = 0.0;       ///< energy(u*+v) - energy(u*)
  double feasibility = 0.0;  ///< ||B v||, smallness certifies the draw stayed feasible
};

struct VerificationRecord {
  double residual = 0.0;
  std::vector<PerturbationDraw> draws;
  double worst_margin = 0.0;
  bool violation = false;  ///< some feasible perturbation beat u* beyond 1e-8
};

/// phi_1(tau): free final state rr_apply(p, tau, z0).
Vec free_final_state(const FracParams& p, const Eigen::Ref<const Vec>& z0,
                     double tol = 1e-12);

/// Build the discrete model shared by solve_hum and verify.
HumSystem build_hum_system(const FracParams& p, const Actuator& act,
                           const Region& region, const Eigen::Ref<const Vec>& z0,
                           const History& history, int N, int M,
                           double tol = 1e-12);

/// Solve the regularized normal equations (B D^-1 B^T + reg I) psi0 = c with
/// c = G (zd - phi_free - phi_hist), and synthesize u* = D^-1 A^T (G psi0)
/// (the exact discrete minimizer; samples past the eps window extend the last
/// admissible node). reg < 0 selects the default 1e-8 tr(Lambda)/N; reg == 0
/// requires a numerically nonsingular operator (RankDeficiencyError otherwise).
HumSolution solve_hum(const FracParams& p, const Actuator& act,
                      const Region& region, const Eigen::Ref<const Vec>& z0,
                      const Eigen::Ref<const Vec>& zd_on_omega, int N, int M,
                      double reg = -1.0, const History& history = History::zero(),
                      double tol = 1e-12);

/// Control energy: trapezoid of u^2/2 over [0, tau-h] plus the history
/// segment's trapezoid over its own grid.
double energy(const ControlSignal& sig);

/// Re-simulate the solution, report the relative terminal error on omega, and
/// run the perturbed-feasible energy suite (fixed-seed draws projected onto the
/// discrete feasible set; violation when any margin < -1e-8).
VerificationRecord verify(const FracParams& p, const Actuator& act,
                          const Region& region, const Eigen::Ref<const Vec>& z0,
                          const HumSolution& sol,
                          const Eigen::Ref<const Vec>& zd_on_omega,
                          double tol = 1e-12);

}  // namespace fdc
