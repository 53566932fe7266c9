#include "fdc/hum.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fdc/controllability.hpp"
#include "fdc/errors.hpp"
#include "fdc/mittag_leffler.hpp"
#include "fdc/spectral_model.hpp"

namespace fdc {

namespace {

void check_params_light(const FracParams& p) {
  if (!(p.r > 0.0) || !(p.r < 1.0)) throw ConfigError("params: r in (0,1) required");
  if (!(p.h >= 0.0) || !(p.tau > p.h)) throw ConfigError("params: tau > h >= 0 required");
  if (!(p.eps >= 0.0) || !(p.eps < p.tau - p.h)) {
    throw ConfigError("params: 0 <= eps < tau - h required");
  }
}

Mat hum_lambda(const HumSystem& sys) {
  Mat lam = sys.B * sys.d.cwiseInverse().asDiagonal() * sys.B.transpose();
  return 0.5 * (lam + lam.transpose());
}

double omega_norm_sq(const Mat& G, const Vec& v) { return v.dot(G * v); }

double residual_on_region(const FracParams& p, const Actuator& act,
                          const Mat& G, const Eigen::Ref<const Vec>& z0,
                          const ControlSignal& sig,
                          const Eigen::Ref<const Vec>& zd, double tol) {
  const Trajectory traj = mild_solution(p, z0, act, sig, {p.tau}, tol);
  const Vec e = traj.states.col(0) - zd;
  const double num = std::sqrt(std::max(0.0, omega_norm_sq(G, e)));
  const double den = std::sqrt(std::max(0.0, omega_norm_sq(G, zd)));
  return den > 0.0 ? num / den : num;
}

}  // namespace

Vec free_final_state(const FracParams& p, const Eigen::Ref<const Vec>& z0,
                     double tol) {
  check_params_light(p);
  return rr_apply(p, p.tau, z0, tol);
}

HumSystem build_hum_system(const FracParams& p, const Actuator& act,
                           const Region& region,
                           const Eigen::Ref<const Vec>& z0,
                           const History& history, int N, int M, double tol) {
  check_params_light(p);
  if (N < 1 || M < 1) throw ConfigError("hum: modes >= 1 and steps >= 1 required");
  if (z0.size() != N) throw ConfigError("hum: z0 must carry exactly N modes");
  if (!region.valid()) throw ConfigError("region: a < b required");
  if (p.eps == 0.0 && p.r <= 0.5) {
    throw IntegrabilityError(
        "hum: the synthesized control kernel is not square-integrable for "
        "r <= 1/2 (2(r-1) > -1 fails); set eps > 0");
  }

  const double span = p.tau - p.h;
  const double dt = span / M;
  const int keps =
      p.eps <= 0.0 ? 0
                   : std::max(1L, std::lround(p.eps / dt));
  if (M - keps < 1) {
    throw ConfigError("hum: steps too few to resolve the eps window");
  }
  const int K = M - keps;
  const double eps_used = keps * dt;

  HumSystem sys;
  sys.dt = dt;
  sys.K = K;
  sys.M = M;
  sys.eps_used = eps_used;
  sys.b = actuator_coeffs(act, N);
  sys.G = region_gram(region, N);

  // A(i,k) = b_i * integral over [0, span] of hat_k(sigma) K_i(span - sigma),
  // where K_i(s) = s^(r-1) E_{r,r}(ups_i s^r); the last node's hat extends as
  // the constant 1 across the eps window.
  sys.A = Mat::Zero(N, K + 1);
  for (int i = 0; i < N; ++i) {
    if (sys.b[i] == 0.0) continue;
    const double ups = eigenvalue(i + 1);
    for (int k = 0; k <= K; ++k) {
      // Node coordinates as integer multiples of dt: exact, nonnegative, and
      // the k == K hat edge lands on eps_used = keps * dt bit for bit.
      const double s_k = (M - k) * dt;
      double acc = 0.0;
      if (k >= 1) {
        const double s_prev = (M - k + 1) * dt;
        acc += conv_pwlinear(p.r, ups, s_k, s_prev, 1.0, 0.0, tol);
      }
      if (k < K) {
        const double s_next = (M - k - 1) * dt;
        acc += conv_pwlinear(p.r, ups, s_next, s_k, 0.0, 1.0, tol);
      } else {
        acc += window_mass(p.r, ups, eps_used, tol);
      }
      sys.A(i, k) = sys.b[i] * acc;
    }
  }

  sys.d = Vec::Constant(K + 1, dt);
  sys.d[0] = 0.5 * dt;
  sys.d[K] = 0.5 * dt + eps_used;

  sys.B = sys.G * sys.A;
  sys.phi_free = rr_apply(p, p.tau, z0, tol);

  sys.phi_hist = Vec::Zero(N);
  if (p.h > 0.0 && !history.empty()) {
    ControlSignal hist_only;
    hist_only.grid = Vec::LinSpaced(2, 0.0, span);
    hist_only.u = Vec::Zero(2);
    hist_only.history = history;
    const Trajectory traj =
        mild_solution(p, Vec::Zero(N), act, hist_only, {p.tau}, tol);
    sys.phi_hist = traj.states.col(0);
  }
  return sys;
}

HumSolution solve_hum(const FracParams& p, const Actuator& act,
                      const Region& region, const Eigen::Ref<const Vec>& z0,
                      const Eigen::Ref<const Vec>& zd_on_omega, int N, int M,
                      double reg, const History& history, double tol) {
  if (zd_on_omega.size() != N) {
    throw ConfigError("hum: target must carry exactly N modes");
  }
  const HumSystem sys = build_hum_system(p, act, region, z0, history, N, M, tol);
  const Mat lam = hum_lambda(sys);

  double reg_used;
  if (reg < 0.0) {
    reg_used = 1e-8 * lam.trace() / N;
  } else if (reg == 0.0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(lam, Eigen::EigenvaluesOnly);
    const double smin = es.eigenvalues().minCoeff();
    const double smax = es.eigenvalues().maxCoeff();
    if (smin <= 1e-14 * smax) {
      throw RankDeficiencyError(
          "hum: the controllability operator is numerically singular at this "
          "truncation; pass a positive regularization");
    }
    reg_used = 0.0;
  } else {
    reg_used = reg;
  }

  const Mat lam_reg = lam + reg_used * Mat::Identity(N, N);
  const Vec c = sys.G * (zd_on_omega - sys.phi_free - sys.phi_hist);
  const Vec psi0 = lam_reg.ldlt().solve(c);
  const Vec gpsi = sys.G * psi0;

  Vec u_nodes = (sys.A.transpose() * gpsi).cwiseQuotient(sys.d);
  Vec u_full(sys.M + 1);
  u_full.head(sys.K + 1) = u_nodes;
  for (int k = sys.K + 1; k <= sys.M; ++k) u_full[k] = u_nodes[sys.K];

  HumSolution sol;
  sol.psi0 = psi0;
  sol.control.grid = Vec::LinSpaced(sys.M + 1, 0.0, p.tau - p.h);
  sol.control.u = u_full;
  sol.control.history = history;
  sol.regularization = reg_used;
  sol.energy = energy(sol.control);
  sol.eps_window_fraction =
      sol.energy > 0.0
          ? (0.5 * u_nodes[sys.K] * u_nodes[sys.K] * sys.eps_used) / sol.energy
          : 0.0;

  Eigen::SelfAdjointEigenSolver<Mat> es(lam_reg, Eigen::EigenvaluesOnly);
  const double emin = es.eigenvalues().minCoeff();
  const double emax = es.eigenvalues().maxCoeff();
  sol.condition = emin > 0.0 ? emax / emin
                             : std::numeric_limits<double>::infinity();

  sol.residual = residual_on_region(p, act, sys.G, z0, sol.control,
                                    zd_on_omega, tol);
  return sol;
}

double energy(const ControlSignal& sig) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k + 1 < sig.grid.size(); ++k) {
    const double w = sig.grid[k + 1] - sig.grid[k];
    acc += 0.25 * w * (sig.u[k] * sig.u[k] + sig.u[k + 1] * sig.u[k + 1]);
  }
  if (!sig.history.empty()) {
    for (Eigen::Index k = 0; k + 1 < sig.history.grid.size(); ++k) {
      const double w = sig.history.grid[k + 1] - sig.history.grid[k];
      acc += 0.25 * w *
             (sig.history.vals[k] * sig.history.vals[k] +
              sig.history.vals[k + 1] * sig.history.vals[k + 1]);
    }
  }
  return acc;
}

VerificationRecord verify(const FracParams& p, const Actuator& act,
                          const Region& region,
                          const Eigen::Ref<const Vec>& z0,
                          const HumSolution& sol,
                          const Eigen::Ref<const Vec>& zd_on_omega,
                          double tol) {
  const int N = static_cast<int>(sol.psi0.size());
  const int M = static_cast<int>(sol.control.grid.size()) - 1;
  const HumSystem sys =
      build_hum_system(p, act, region, z0, sol.control.history, N, M, tol);

  VerificationRecord rec;
  rec.residual = residual_on_region(p, act, sys.G, z0, sol.control,
                                    zd_on_omega, tol);

  // Whitened map X = B D^{-1/2}; its right singular vectors span everything
  // the control-to-region map can see.  Removing all of them from a draw
  // leaves a perturbation that provably cannot change the terminal state, so
  // the energy comparison below is between controls solving the same problem.
  const Vec dsqrt = sys.d.cwiseSqrt();
  const Vec dinvsqrt = dsqrt.cwiseInverse();
  const Mat X = sys.B * dinvsqrt.asDiagonal();
  Eigen::JacobiSVD<Mat> svd(X, Eigen::ComputeThinV);
  const Mat V = svd.matrixV();  // (K+1) x N

  const double base_energy = energy(sol.control);
  std::mt19937 rng(12345u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  rec.worst_margin = std::numeric_limits<double>::infinity();
  rec.violation = false;
  for (int draw = 0; draw < 20; ++draw) {
    Vec w(sys.K + 1);
    for (int k = 0; k <= sys.K; ++k) w[k] = gauss(rng);
    for (int pass = 0; pass < 2; ++pass) w -= V * (V.transpose() * w);
    Vec v = dinvsqrt.cwiseProduct(w);
    const double nrm = w.norm();  // equals the D-norm of v
    if (!(nrm > 1e-300)) continue;
    v /= nrm;

    ControlSignal pert = sol.control;
    for (int k = 0; k <= sys.K; ++k) pert.u[k] += v[k];
    for (int k = sys.K + 1; k <= sys.M; ++k) pert.u[k] = pert.u[sys.K];
    PerturbationDraw pd;
    pd.feasibility = (sys.B * v).norm();
    pd.margin = energy(pert) - base_energy;
    rec.draws.push_back(pd);
    rec.worst_margin = std::min(rec.worst_margin, pd.margin);
    if (pd.margin < -1e-8) rec.violation = true;
  }
  if (rec.draws.empty()) rec.worst_margin = 0.0;
  return rec;
}

}  // namespace fdc
