#include "fdc/controllability.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fdc/errors.hpp"
#include "fdc/fracops.hpp"
#include "fdc/mittag_leffler.hpp"
#include "fdc/spectral_model.hpp"

namespace fdc {

namespace {

// 12-point Gauss-Legendre rule on [-1, 1].
constexpr int kGL = 12;
constexpr double kGLx[kGL] = {
    -0.98156063424671924, -0.9041172563704748,  -0.76990267419430469,
    -0.58731795428661748, -0.36783149899818018, -0.12523340851146891,
    0.12523340851146891,  0.36783149899818018,  0.58731795428661748,
    0.76990267419430469,  0.9041172563704748,   0.98156063424671924};
constexpr double kGLw[kGL] = {
    0.047175336386512022, 0.10693932599531888, 0.16007832854334611,
    0.20316742672306565,  0.23349253653835464, 0.24914704581340269,
    0.24914704581340269,  0.23349253653835464, 0.20316742672306565,
    0.16007832854334611,  0.10693932599531888, 0.047175336386512022};

void check_params_light(const FracParams& p) {
  if (!(p.r > 0.0) || !(p.r < 1.0)) throw ConfigError("params: r in (0,1) required");
  if (!(p.h >= 0.0) || !(p.tau > p.h)) throw ConfigError("params: tau > h >= 0 required");
  if (!(p.eps >= 0.0) || !(p.eps < p.tau - p.h)) {
    throw ConfigError("params: 0 <= eps < tau - h required");
  }
}

}  // namespace

QuadRule gram_quadrature(const FracParams& p, int n_modes) {
  check_params_light(p);
  if (n_modes < 1) throw std::domain_error("gram_quadrature: n_modes >= 1");
  const double s_max = p.tau - p.h;
  double s_min;
  double s_head = 0.0;
  if (p.eps > 0.0) {
    s_min = p.eps;
  } else {
    if (p.r <= 0.5) {
      throw IntegrabilityError(
          "gramian: the squared kernel behaves like s^(2(r-1)) near s=0, and "
          "2(r-1) > -1 fails for r <= 1/2; set eps > 0 to cut off the window");
    }
    // choose the analytic-head edge so |ups_i| * s^r <= 1/2 for every mode in
    // play, keeping the head product series rapidly convergent
    const double ups_max = std::fabs(eigenvalue(n_modes));
    s_head = std::min(std::pow(0.5 / ups_max, 1.0 / p.r), 0.25 * s_max);
    s_min = s_head;
  }

  std::vector<double> edges;  // descending
  edges.push_back(s_max);
  double hi = s_max;
  while (hi > s_min * (1.0 + 1e-12)) {
    const double lo = std::max(s_min, 0.5 * hi);
    edges.push_back(lo);
    hi = lo;
    if (edges.size() > 2048) {
      throw std::domain_error("gram_quadrature: cutoff too small to grade");
    }
  }

  const int panels = static_cast<int>(edges.size()) - 1;
  QuadRule rule;
  rule.s_head = s_head;
  rule.nodes = Vec(panels * kGL);
  rule.weights = Vec(panels * kGL);
  int q = 0;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double b = edges[pnl];      // upper edge
    const double a = edges[pnl + 1];  // lower edge
    const double mid = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    for (int g = 0; g < kGL; ++g) {
      rule.nodes[q] = mid + hw * kGLx[g];
      rule.weights[q] = hw * kGLw[g];
      ++q;
    }
  }
  return rule;
}

namespace {

// Analytic integral of k_i(s) k_j(s) over [0, a] by the product power series,
// valid when |ups| a^r <= 1/2 for both modes (guaranteed by gram_quadrature).
double head_integral(double r, double ups_i, double ups_j, double a,
                     const std::vector<double>& xi,
                     const std::vector<double>& xj) {
  // xi[m] = ups_i^m a^(rm) / Gamma(rm + r), likewise xj.
  const int Mh = static_cast<int>(xi.size());
  double acc = 0.0;
  for (int m = 0; m < Mh; ++m) {
    for (int n = 0; n < Mh; ++n) {
      const double denom = r * (m + n + 2) - 1.0;
      acc += xi[m] * xj[n] / denom;
    }
  }
  (void)ups_i;
  (void)ups_j;
  return acc * std::pow(a, 2.0 * r - 1.0);
}

}  // namespace

Mat assemble_w(const FracParams& p, const Actuator& act, int n_modes,
               double tol) {
  check_params_light(p);
  const QuadRule rule = gram_quadrature(p, n_modes);
  const Vec b = actuator_coeffs(act, n_modes);
  const Eigen::Index Q = rule.nodes.size();

  Mat K(n_modes, Q);
  for (int i = 0; i < n_modes; ++i) {
    const double ups = eigenvalue(i + 1);
    if (b[i] == 0.0) {
      K.row(i).setZero();
      continue;
    }
    for (Eigen::Index q = 0; q < Q; ++q) {
      K(i, q) = ml_kernel(p.r, ups, rule.nodes[q], tol);
    }
  }
  Mat W = K * rule.weights.asDiagonal() * K.transpose();

  if (rule.s_head > 0.0) {
    const double a = rule.s_head;
    const double ar = std::pow(a, p.r);
    constexpr int Mh = 26;
    std::vector<std::vector<double>> coef(n_modes, std::vector<double>(Mh));
    for (int i = 0; i < n_modes; ++i) {
      const double x = eigenvalue(i + 1) * ar;
      double xpow = 1.0;
      for (int m = 0; m < Mh; ++m) {
        coef[i][m] = xpow / std::tgamma(p.r * m + p.r);
        xpow *= x;
      }
    }
    for (int i = 0; i < n_modes; ++i) {
      if (b[i] == 0.0) continue;
      for (int j = 0; j <= i; ++j) {
        if (b[j] == 0.0) continue;
        const double hij = head_integral(p.r, eigenvalue(i + 1),
                                         eigenvalue(j + 1), a, coef[i], coef[j]);
        W(i, j) += hij;
        if (i != j) W(j, i) += hij;
      }
    }
  }

  // fold in the actuator coefficients: W_ij <- b_i b_j W_ij
  W = W.cwiseProduct(b * b.transpose());
  // exact symmetry
  W = 0.5 * (W + W.transpose()).eval();
  return W;
}

Vec adjoint_kernel_row(const FracParams& p, const Actuator& act, double sigma,
                       int N, double tol) {
  check_params_light(p);
  if (N < 1) throw std::domain_error("adjoint_kernel_row: N >= 1");
  const double span = p.tau - p.h;
  if (!(sigma >= 0.0) || !(sigma < span)) {
    throw std::domain_error(
        "adjoint_kernel_row: sigma must lie in [0, tau - h); the kernel is "
        "singular at the right endpoint");
  }
  const double s = span - sigma;
  const Vec b = actuator_coeffs(act, N);
  Vec row(N);
  for (int i = 0; i < N; ++i) {
    row[i] = b[i] == 0.0 ? 0.0 : b[i] * ml_kernel(p.r, eigenvalue(i + 1), s, tol);
  }
  return row;
}

GramianReport gramian(const FracParams& p, const Actuator& act,
                      const Region& region, int N, double tol) {
  check_params_light(p);
  if (N < 1) throw std::domain_error("gramian: N >= 1");
  if (!region.valid()) throw ConfigError("region: a < b required");
  const int n_inner = 3 * N;
  const Mat W = assemble_w(p, act, n_inner, tol);
  const Mat G_full = region_gram(region, n_inner);
  const Mat G_rect = G_full.topRows(N);
  Mat lambda = G_rect * W * G_rect.transpose();
  lambda = 0.5 * (lambda + lambda.transpose()).eval();

  GramianReport rep;
  rep.lambda = lambda;
  Eigen::SelfAdjointEigenSolver<Mat> es(lambda, Eigen::EigenvaluesOnly);
  rep.smin = es.eigenvalues().minCoeff();
  rep.smax = es.eigenvalues().maxCoeff();
  const Vec b = actuator_coeffs(act, N);
  for (int i = 0; i < N; ++i) {
    if (b[i] == 0.0) rep.unreachable_modes.push_back(i + 1);
  }
  rep.eps_used = p.eps;
  return rep;
}

bool is_region_controllable(const GramianReport& rep, double tol) {
  if (!(tol >= 0.0)) throw std::domain_error("is_region_controllable: tol >= 0");
  return rep.smin > tol * rep.smax;
}

}  // namespace fdc
