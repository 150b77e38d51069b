#pragma once

#include <vector>

#include <Eigen/Core>

#include "kgscat/coeff_ring.hpp"

namespace kgscat {

enum class ProfileFamily { Gaussian, Sech, ConstantPlusGaussian };

/// One generator shape: offset + amplitude * f((y - center) / width), with
/// f(u) = exp(-u^2) (Gaussian, ConstantPlusGaussian) or sech(u) (Sech).
/// Only ConstantPlusGaussian may carry a nonzero offset.
struct GeneratorShape {
  ProfileFamily family = ProfileFamily::Gaussian;
  double amplitude = 0.0;
  double width = 1.0;
  double center = 0.0;
  double offset = 0.0;

  /// d^order/dy^order of the shape at y, in closed form.
  double derivative(int order, double y) const;
  Eigen::VectorXd derivative(int order, const Eigen::VectorXd& ys) const;
};

/// Scattering data at infinity: amplitude a(y) and phase b(y) = b0 + b1(y).
struct GeneratorProfile {
  GeneratorShape a;
  GeneratorShape b{ProfileFamily::Gaussian, 0.0, 1.0, 0.0, 0.0};
  double b0 = 0.0;

  static GeneratorProfile gaussian(double amplitude, double width = 1.0);
  /// a, b constant: the profile-ODE setting.
  static GeneratorProfile constant(double a, double b = 0.0);

  double a_value(int order, double y) const { return a.derivative(order, y); }
  double b_value(int order, double y) const;

  /// True when a and b - b0 decay at infinity (no constant offsets).
  bool decays() const;
  void validate() const;
};

/// Hermite recurrence: H_0 = 1, H_1 = 2u, H_{m+1} = 2u H_m - 2m H_{m-1}.
double hermite(int m, double u);

/// Coefficients (ascending powers of T = tanh u) of P_m with
/// d^m/du^m sech u = sech u * P_m(tanh u).
std::vector<double> sech_derivative_poly(int m);

/// Generator derivatives sampled on a y-grid up to a maximum order.
class GeneratorTable {
 public:
  GeneratorTable(const GeneratorProfile& profile, Eigen::VectorXd ys, int max_order);

  const Eigen::VectorXd& ys() const { return ys_; }
  int max_order() const { return max_order_; }
  const Eigen::VectorXd& values(Generator g, int order) const;

 private:
  Eigen::VectorXd ys_;
  int max_order_;
  std::vector<Eigen::VectorXd> a_;
  std::vector<Eigen::VectorXd> b_;
};

}  // namespace kgscat
