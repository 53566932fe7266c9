#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "fdc/errors.hpp"

namespace fdc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// sin(pi x) with exact zeros at integer x (argument reduction by remainder).
double sinpi(double x) noexcept;
/// cos(pi x) with exact values at integer and half-integer x.
double cospi(double x) noexcept;

/// Zonal actuator: indicator injection on [beta1, beta2].
struct Zonal {
  double beta1;
  double beta2;
};

/// Pointwise actuator: Dirac injection at b.
struct Pointwise {
  double b;
};

/// Control-to-state injection B.
struct Actuator {
  std::variant<Zonal, Pointwise> kind;

  static Actuator zonal(double beta1, double beta2) { return {Zonal{beta1, beta2}}; }
  static Actuator pointwise(double b) { return {Pointwise{b}}; }

  bool valid() const;
};

/// Target subinterval omega = [a, b] of [0, 1] with positive measure.
struct Region {
  double a;
  double b;

  bool valid() const { return 0.0 <= a && a < b && b <= 1.0; }
};

/// Dirichlet Laplacian eigenvalue on [0,1]: -(i pi)^2, i >= 1.
double eigenvalue(int i);

/// Eigenfunction zeta_i(x) = sqrt(2) sin(i pi x).
double eigenfunction_at(int i, double x);

/// Modal injection coefficients of the actuator: entry i-1 holds
/// integral_[beta1,beta2] zeta_i dx (zonal, cosine-difference closed form) or
/// zeta_i(b) (pointwise). Zeros are exact where the closed form vanishes.
Vec actuator_coeffs(const Actuator& act, int N);

/// Gram matrix G[i][j] = integral_a^b zeta_{i+1} zeta_{j+1} dx by closed-form
/// antiderivatives. Symmetric PSD; exactly the identity for [0,1].
Mat region_gram(const Region& region, int N);

/// Pointwise synthesis sum_i v_i zeta_{i+1}(x) at grid points, which must lie
/// inside the region (throws std::domain_error otherwise).
Vec restrict_to_grid(const Eigen::Ref<const Vec>& v, const Region& region,
                     const std::vector<double>& grid);

/// Modal coefficients of the zero-extension of the restriction: G_omega * v.
Vec zero_extend_gram_apply(const Eigen::Ref<const Vec>& v_omega, const Region& region);

}  // namespace fdc
