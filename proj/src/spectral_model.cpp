#include "fdc/spectral_model.hpp"

#include <cmath>
#include <stdexcept>

#include "fdc/errors.hpp"

namespace fdc {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

// sin(pi x) with exact zeros at integer x and exact symmetry reduction.
double sinpi(double x) noexcept {
  const double m = std::remainder(x, 2.0);  // m in [-1, 1]
  const double a = std::fabs(m);
  double v;
  if (a == 0.0 || a == 1.0) {
    v = 0.0;
  } else if (a <= 0.5) {
    v = std::sin(kPi * a);
  } else {
    v = std::sin(kPi * (1.0 - a));
  }
  return m < 0.0 ? -v : v;
}

// cos(pi x) with exact zeros at half-integer x.
double cospi(double x) noexcept {
  const double m = std::fabs(std::remainder(x, 2.0));  // m in [0, 1]
  if (m == 0.5) return 0.0;
  if (m <= 0.5) return std::cos(kPi * m);
  return -std::cos(kPi * (1.0 - m));
}

bool Actuator::valid() const {
  if (const auto* z = std::get_if<Zonal>(&kind)) {
    return z->beta1 >= 0.0 && z->beta2 <= 1.0 && z->beta1 < z->beta2;
  }
  const auto& p = std::get<Pointwise>(kind);
  return p.b > 0.0 && p.b < 1.0;
}

double eigenvalue(int i) {
  if (i < 1) throw std::domain_error("eigenvalue: mode index must be >= 1");
  return -static_cast<double>(i) * i * kPi * kPi;
}

double eigenfunction_at(int i, double x) {
  if (i < 1) throw std::domain_error("eigenfunction_at: mode index must be >= 1");
  return std::sqrt(2.0) * sinpi(static_cast<double>(i) * x);
}

Vec actuator_coeffs(const Actuator& act, int N) {
  if (N < 1) throw std::domain_error("actuator_coeffs: N >= 1");
  if (!act.valid()) throw ConfigError("actuator: invalid geometry");
  Vec b(N);
  if (const auto* z = std::get_if<Zonal>(&act.kind)) {
    for (int i = 1; i <= N; ++i) {
      // integral of sqrt(2) sin(i pi x) over [beta1, beta2]
      b[i - 1] = std::sqrt(2.0) *
                 (cospi(i * z->beta1) - cospi(i * z->beta2)) / (i * kPi);
    }
  } else {
    const auto& p = std::get<Pointwise>(act.kind);
    for (int i = 1; i <= N; ++i) b[i - 1] = std::sqrt(2.0) * sinpi(i * p.b);
  }
  return b;
}

namespace {
// primitive of 2 sin(k pi x) pairs: S(k, x) = sin(k pi x) / (k pi), S(0,.)=x
double S(int k, double x) {
  if (k == 0) return x;
  return sinpi(k * x) / (k * kPi);
}
}  // namespace

Mat region_gram(const Region& omega, int N) {
  if (N < 1) throw std::domain_error("region_gram: N >= 1");
  if (!omega.valid()) throw ConfigError("region: a < b required");
  const double a = omega.a, b = omega.b;
  Mat G(N, N);
  for (int i = 1; i <= N; ++i) {
    for (int j = 1; j <= i; ++j) {
      double g;
      if (i == j) {
        g = (b - a) - (sinpi(2.0 * i * b) - sinpi(2.0 * i * a)) / (2.0 * i * kPi);
      } else {
        g = (S(i - j, b) - S(i - j, a)) - (S(i + j, b) - S(i + j, a));
      }
      G(i - 1, j - 1) = g;
      G(j - 1, i - 1) = g;
    }
  }
  return G;
}

Vec restrict_to_grid(const Eigen::Ref<const Vec>& coeffs, const Region& omega,
                     const std::vector<double>& xs) {
  if (!omega.valid()) throw ConfigError("region: a < b required");
  Vec out(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k];
    if (x < omega.a || x > omega.b) {
      throw std::domain_error("restrict_to_grid: point outside the region");
    }
    double v = 0.0;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
      v += coeffs[i] * eigenfunction_at(static_cast<int>(i) + 1, x);
    }
    out[static_cast<Eigen::Index>(k)] = v;
  }
  return out;
}

Vec zero_extend_gram_apply(const Eigen::Ref<const Vec>& coeffs,
                           const Region& omega) {
  const int N = static_cast<int>(coeffs.size());
  if (N == 0) return Vec();
  return region_gram(omega, N) * coeffs;
}

}  // namespace fdc
