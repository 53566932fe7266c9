#include "fdc/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fdc/errors.hpp"
#include "fdc/mittag_leffler.hpp"
#include "fdc/spectral_model.hpp"

namespace fdc {

namespace {
// Below this value of |ups| * s^r the two-term bracket cancels badly and the
// direct power series of the integral (a few terms) is exact to working
// precision.
constexpr double kBracketSeriesCut = 1e-5;
}  // namespace

void FracParams::validate() const {
  if (!std::isfinite(r) || !(r > 0.0) || !(r < 1.0)) {
    throw ConfigError("params: r must lie strictly inside (0,1)");
  }
  if (!std::isfinite(tau) || !std::isfinite(h) || !(h >= 0.0) || !(tau > h)) {
    throw ConfigError("params: tau > h >= 0 required");
  }
  if (!std::isfinite(eps) || !(eps >= 0.0) || !(eps < tau - h)) {
    throw ConfigError("params: 0 <= eps < tau - h required");
  }
}

History History::constant(double h, double value) {
  History out;
  if (h > 0.0) {
    out.grid = Vec(2);
    out.grid << -h, 0.0;
    out.vals = Vec(2);
    out.vals << value, value;
  }
  return out;
}

ControlSignal ControlSignal::constant(const FracParams& p, int M, double uval,
                                      double phival) {
  if (M < 1) throw std::domain_error("ControlSignal::constant: M >= 1");
  ControlSignal sig;
  sig.grid = Vec::LinSpaced(M + 1, 0.0, p.tau - p.h);
  sig.u = Vec::Constant(M + 1, uval);
  sig.history = History::constant(p.h, phival);
  return sig;
}

void ControlSignal::validate(const FracParams& p) const {
  if (grid.size() < 2 || u.size() != grid.size()) {
    throw ConfigError("control: grid needs >= 2 points and matching values");
  }
  const double span = p.tau - p.h;
  const double slack = 1e-9 * std::max(1.0, p.tau);
  if (std::fabs(grid[0]) > slack || std::fabs(grid[grid.size() - 1] - span) > slack) {
    throw ConfigError("control: grid must run from 0 to tau - h");
  }
  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
    if (!(grid[k + 1] > grid[k])) {
      throw ConfigError("control: grid must be strictly increasing");
    }
  }
  if (!u.allFinite()) throw ConfigError("control: values must be finite");
  if (p.h > 0.0 && !history.empty()) {
    if (history.vals.size() != history.grid.size()) {
      throw ConfigError("control: history grid/value size mismatch");
    }
    if (std::fabs(history.grid[0] + p.h) > slack ||
        std::fabs(history.grid[history.grid.size() - 1]) > slack) {
      throw ConfigError("control: history grid must run from -h to 0");
    }
    for (Eigen::Index k = 0; k + 1 < history.grid.size(); ++k) {
      if (!(history.grid[k + 1] > history.grid[k])) {
        throw ConfigError("control: history grid must be strictly increasing");
      }
    }
    if (!history.vals.allFinite()) {
      throw ConfigError("control: history values must be finite");
    }
  }
}

// ---------------------------------------------------------------------------
// Kernel primitives
// ---------------------------------------------------------------------------

double ml_kernel(double r, double ups, double s, double tol) {
  if (!(s > 0.0)) throw std::domain_error("ml_kernel: s > 0 required");
  return std::pow(s, r - 1.0) * ml2(r, r, ups * std::pow(s, r), tol);
}

namespace {

// Direct series of int_{s_lo}^{s_hi} (c0 + c1 s) s^(r-1) E_{r,r}(ups s^r) ds,
// valid (and preferred) when |ups| s_hi^r is tiny.
double bracket_series(double r, double ups, double s_lo, double s_hi,
                      double c0, double c1) {
  long double acc = 0.0L;
  long double upow = 1.0L;
  const long double lo = s_lo, hi = s_hi;
  for (int n = 0; n < 16; ++n) {
    const long double a = static_cast<long double>(r) * n + r;
    const long double p_hi = std::pow(hi, a);
    const long double p_lo = lo > 0.0L ? std::pow(lo, a) : 0.0L;
    const long double ga = std::lgamma(a);
    long double term = 0.0L;
    if (c0 != 0.0) {
      term += static_cast<long double>(c0) * (p_hi - p_lo) / (a * std::exp(ga));
    }
    if (c1 != 0.0) {
      term += static_cast<long double>(c1) * (p_hi * hi - p_lo * lo) /
              ((a + 1.0L) * std::exp(ga));
    }
    term *= upow;
    acc += term;
    upow *= static_cast<long double>(ups);
    if (std::fabs(term) < 1e-25L * (std::fabs(acc) + 1e-300L) && n >= 2) break;
  }
  return static_cast<double>(acc);
}

struct EPair {
  double e1;  // E_{r,1}(ups s^r)
  double e2;  // E_{r,2}(ups s^r)
};

EPair eval_pair(double r, double ups, double s, double tol) {
  const double x = ups * std::pow(s, r);
  return EPair{ml2(r, 1.0, x, tol), ml2(r, 2.0, x, tol)};
}

// Antiderivative value F(s) = ((c0 + c1 s) E1 - c1 s E2) / ups.
double bracket_F(double ups, double s, double c0, double c1, const EPair& p) {
  return ((c0 + c1 * s) * p.e1 - c1 * s * p.e2) / ups;
}

}  // namespace

double kernel_bracket(double r, double ups, double s_lo, double s_hi,
                      double c0, double c1, double tol) {
  if (!(r > 0.0) || !(r <= 1.0)) throw std::domain_error("kernel_bracket: r in (0,1]");
  if (!(s_lo >= 0.0) || !(s_hi >= s_lo)) {
    throw std::domain_error("kernel_bracket: require 0 <= s_lo <= s_hi");
  }
  if (s_hi == s_lo) return 0.0;
  if (ups == 0.0) return bracket_series(r, 0.0, s_lo, s_hi, c0, c1);
  if (std::fabs(ups) * std::pow(s_hi, r) < kBracketSeriesCut) {
    return bracket_series(r, ups, s_lo, s_hi, c0, c1);
  }
  const EPair hi = eval_pair(r, ups, s_hi, tol);
  const EPair lo = s_lo > 0.0 ? eval_pair(r, ups, s_lo, tol) : EPair{1.0, 1.0};
  return bracket_F(ups, s_hi, c0, c1, hi) - bracket_F(ups, s_lo, c0, c1, lo);
}

double conv_pwlinear(double r, double ups, double s_lo, double s_hi,
                     double u_lo, double u_hi, double tol) {
  if (s_hi == s_lo) return 0.0;
  const double c1 = (u_hi - u_lo) / (s_hi - s_lo);
  const double c0 = u_lo - c1 * s_lo;
  return kernel_bracket(r, ups, s_lo, s_hi, c0, c1, tol);
}

double window_mass(double r, double ups, double eps, double tol) {
  if (eps <= 0.0) return 0.0;
  const double x = ups * std::pow(eps, r);
  if (std::fabs(x) < kBracketSeriesCut || ups == 0.0) {
    long double acc = 0.0L;
    long double xpow = 1.0L;
    for (int n = 0; n < 16; ++n) {
      const long double a = static_cast<long double>(r) * n + r;
      const long double term = xpow / (a * std::exp(std::lgamma(a)));
      acc += term;
      xpow *= static_cast<long double>(x);
      if (std::fabs(term) < 1e-25L * std::fabs(acc) && n >= 2) break;
    }
    return static_cast<double>(acc * std::pow(static_cast<long double>(eps),
                                              static_cast<long double>(r)));
  }
  return (ml2(r, 1.0, x, tol) - 1.0) / ups;
}

// ---------------------------------------------------------------------------
// Solution operators
// ---------------------------------------------------------------------------

Vec rr_apply(const FracParams& p, double t, const Eigen::Ref<const Vec>& z0,
             double tol) {
  if (!(t >= 0.0)) throw std::domain_error("rr_apply: t >= 0 required");
  if (t == 0.0) return z0;
  Vec out(z0.size());
  const double tr = std::pow(t, p.r);
  for (Eigen::Index i = 0; i < z0.size(); ++i) {
    out[i] = z0[i] == 0.0
                 ? 0.0
                 : z0[i] * ml2(p.r, 1.0, eigenvalue(static_cast<int>(i) + 1) * tr, tol);
  }
  return out;
}

Vec sr_apply(const FracParams& p, double t, const Eigen::Ref<const Vec>& v,
             double tol) {
  if (!(t > 0.0)) throw std::domain_error("sr_apply: t > 0 required");
  Vec out(v.size());
  const double tr = std::pow(t, p.r);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = v[i] == 0.0
                 ? 0.0
                 : v[i] * p.r *
                       ml3(p.r, p.r + 1.0, 2.0,
                           eigenvalue(static_cast<int>(i) + 1) * tr, tol);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mild solution
// ---------------------------------------------------------------------------

namespace {

// Accumulates, for one mode, the convolution of a piecewise-linear signal on
// `grid`/`vals` restricted to sigma < sigma_max, in the substituted variable
// s = tshift - sigma.  Consecutive segments share an endpoint, whose
// Mittag-Leffler pair is reused.
double conv_segments(double r, double ups, const Vec& grid, const Vec& vals,
                     double sigma_max, double tshift, double tol) {
  double acc = 0.0;
  // Substituted coordinates are nonnegative, so cached_s == -1 means "empty".
  EPair cached{1.0, 1.0};
  double cached_s = -1.0;
  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k) {
    const double sg_lo = grid[k];
    if (sg_lo >= sigma_max) break;
    const double sg_hi = std::min(grid[k + 1], sigma_max);
    const double slope = (vals[k + 1] - vals[k]) / (grid[k + 1] - grid[k]);
    const double c0 = vals[k] + slope * (tshift - sg_lo);
    const double c1 = -slope;
    const double s_lo = tshift - sg_hi;
    const double s_hi = tshift - sg_lo;
    if (s_hi <= s_lo) continue;
    if (c0 == 0.0 && c1 == 0.0) {
      cached_s = -1.0;
      continue;
    }
    if (ups != 0.0 && std::fabs(ups) * std::pow(s_hi, r) < kBracketSeriesCut) {
      acc += bracket_series(r, ups, s_lo, s_hi, c0, c1);
      cached_s = -1.0;
      continue;
    }
    if (ups == 0.0) {
      acc += bracket_series(r, 0.0, s_lo, s_hi, c0, c1);
      cached_s = -1.0;
      continue;
    }
    const EPair hi = cached_s == s_hi ? cached : eval_pair(r, ups, s_hi, tol);
    const EPair lo = s_lo > 0.0 ? eval_pair(r, ups, s_lo, tol) : EPair{1.0, 1.0};
    acc += bracket_F(ups, s_hi, c0, c1, hi) - bracket_F(ups, s_lo, c0, c1, lo);
    cached = lo;
    cached_s = s_lo;
  }
  return acc;
}

}  // namespace

Trajectory mild_solution(const FracParams& p, const Eigen::Ref<const Vec>& z0,
                         const Actuator& act, const ControlSignal& sig,
                         const std::vector<double>& out_times, double tol) {
  if (!(p.r > 0.0) || !(p.r <= 1.0)) throw ConfigError("params: r in (0,1] required");
  if (!(p.tau > p.h) || !(p.h >= 0.0)) throw ConfigError("params: tau > h >= 0 required");
  sig.validate(p);
  const int N = static_cast<int>(z0.size());
  const Vec b = actuator_coeffs(act, std::max(N, 1));
  const double slack = 1e-9 * std::max(1.0, p.tau);
  for (double t : out_times) {
    if (!(t >= -slack) || !(t <= p.tau + slack)) {
      throw std::domain_error("mild_solution: output instants must lie in [0, tau]");
    }
  }

  Trajectory traj;
  traj.times = out_times;
  traj.states = Mat::Zero(N, static_cast<Eigen::Index>(out_times.size()));

  const bool with_history = p.h > 0.0 && !sig.history.empty();
  for (std::size_t j = 0; j < out_times.size(); ++j) {
    const double t = std::clamp(out_times[j], 0.0, p.tau);
    const double tshift = t - p.h;
    for (int i = 0; i < N; ++i) {
      const double ups = eigenvalue(i + 1);
      double zi = 0.0;
      try {
        if (z0[i] != 0.0) {
          zi = (t == 0.0) ? z0[i]
                          : z0[i] * ml2(p.r, 1.0, ups * std::pow(t, p.r), tol);
        }
        if (t > p.h) {
          zi += b[i] * conv_segments(p.r, ups, sig.grid, sig.u, tshift, tshift, tol);
        }
        if (with_history) {
          const double sigma_max = std::min(0.0, tshift);
          zi += b[i] * conv_segments(p.r, ups, sig.history.grid,
                                     sig.history.vals, sigma_max, tshift, tol);
        }
      } catch (const EvalFailure& e) {
        std::ostringstream msg;
        msg << "mild_solution: kernel evaluation failed at mode " << (i + 1)
            << ", t=" << t << ": " << e.what();
        throw EvalFailure(msg.str(), e.partial, e.estimated_error);
      }
      traj.states(i, static_cast<Eigen::Index>(j)) = zi;
    }
  }
  return traj;
}

}  // namespace fdc
