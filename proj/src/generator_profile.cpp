#include "kgscat/generator_profile.hpp"

#include <cmath>
#include <string>

#include "kgscat/error.hpp"

namespace kgscat {

double hermite(int m, double u) {
  if (m == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * u;
  for (int k = 1; k < m; ++k) {
    const double next = 2.0 * u * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> sech_derivative_poly(int m) {
  // P_{m+1}(T) = -T P_m(T) + (1 - T^2) P_m'(T)
  std::vector<double> p{1.0};
  for (int step = 0; step < m; ++step) {
    std::vector<double> next(p.size() + 1, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      next[k + 1] -= p[k];
      if (k >= 1) {
        next[k - 1] += static_cast<double>(k) * p[k];
        next[k + 1] -= static_cast<double>(k) * p[k];
      }
    }
    p = std::move(next);
  }
  return p;
}

double GeneratorShape::derivative(int order, double y) const {
  const double u = (y - center) / width;
  const double scale = std::pow(width, -order);
  double shape = 0.0;
  switch (family) {
    case ProfileFamily::Gaussian:
    case ProfileFamily::ConstantPlusGaussian: {
      const double sign = (order % 2 == 0) ? 1.0 : -1.0;
      shape = sign * hermite(order, u) * std::exp(-u * u);
      break;
    }
    case ProfileFamily::Sech: {
      const auto poly = sech_derivative_poly(order);
      const double t = std::tanh(u);
      double acc = 0.0;
      for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * t + *it;
      shape = acc / std::cosh(u);
      break;
    }
  }
  double value = amplitude * scale * shape;
  if (order == 0) value += offset;
  return value;
}

Eigen::VectorXd GeneratorShape::derivative(int order, const Eigen::VectorXd& ys) const {
  Eigen::VectorXd out(ys.size());
  for (Eigen::Index k = 0; k < ys.size(); ++k) out[k] = derivative(order, ys[k]);
  return out;
}

GeneratorProfile GeneratorProfile::gaussian(double amplitude, double width) {
  GeneratorProfile p;
  p.a = GeneratorShape{ProfileFamily::Gaussian, amplitude, width, 0.0, 0.0};
  return p;
}

GeneratorProfile GeneratorProfile::constant(double a, double b) {
  GeneratorProfile p;
  p.a = GeneratorShape{ProfileFamily::ConstantPlusGaussian, 0.0, 1.0, 0.0, a};
  p.b = GeneratorShape{ProfileFamily::Gaussian, 0.0, 1.0, 0.0, 0.0};
  p.b0 = b;
  return p;
}

double GeneratorProfile::b_value(int order, double y) const {
  double value = b.derivative(order, y);
  if (order == 0) value += b0;
  return value;
}

bool GeneratorProfile::decays() const { return a.offset == 0.0 && b.offset == 0.0; }

void GeneratorProfile::validate() const {
  for (const auto* shape : {&a, &b}) {
    if (!(shape->width > 0.0)) throw Error(Errc::ConfigInvalid, "profile width must be positive");
    if (shape->family != ProfileFamily::ConstantPlusGaussian && shape->offset != 0.0) {
      throw Error(Errc::ConfigInvalid, "only ConstantPlusGaussian shapes may carry an offset");
    }
  }
}

GeneratorTable::GeneratorTable(const GeneratorProfile& profile, Eigen::VectorXd ys, int max_order)
    : ys_(std::move(ys)), max_order_(max_order) {
  a_.reserve(max_order + 1);
  b_.reserve(max_order + 1);
  for (int m = 0; m <= max_order; ++m) {
    a_.push_back(profile.a.derivative(m, ys_));
    Eigen::VectorXd bv = profile.b.derivative(m, ys_);
    if (m == 0) bv.array() += profile.b0;
    b_.push_back(std::move(bv));
  }
}

const Eigen::VectorXd& GeneratorTable::values(Generator g, int order) const {
  if (order > max_order_) {
    throw Error(Errc::MaxDerivOrderExceeded,
                "generator table has no derivative of order " + std::to_string(order));
  }
  return g == Generator::A ? a_[order] : b_[order];
}

}  // namespace kgscat
