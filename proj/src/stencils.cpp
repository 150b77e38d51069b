#include "kgscat/stencils.hpp"

#include <array>
#include <span>

#include "kgscat/error.hpp"

namespace kgscat {

namespace {

// Weights c_0, c_1, ... of the symmetric stencils.
std::span<const double> second_weights(int order) {
  static constexpr std::array<double, 2> o2{-2.0, 1.0};
  static constexpr std::array<double, 3> o4{-30.0 / 12, 16.0 / 12, -1.0 / 12};
  static constexpr std::array<double, 4> o6{-490.0 / 180, 270.0 / 180, -27.0 / 180, 2.0 / 180};
  switch (order) {
    case 2: return o2;
    case 4: return o4;
    case 6: return o6;
    default: throw Error(Errc::ConfigInvalid, "difference order must be 2, 4 or 6");
  }
}

std::span<const double> first_weights(int order) {
  static constexpr std::array<double, 2> o2{0.0, 0.5};
  static constexpr std::array<double, 3> o4{0.0, 8.0 / 12, -1.0 / 12};
  static constexpr std::array<double, 4> o6{0.0, 45.0 / 60, -9.0 / 60, 1.0 / 60};
  switch (order) {
    case 2: return o2;
    case 4: return o4;
    case 6: return o6;
    default: throw Error(Errc::ConfigInvalid, "difference order must be 2, 4 or 6");
  }
}

// Sample with ghost values: odd reflection about Dirichlet ends, wrap for
// periodic grids.
double sample(const Eigen::VectorXd& v, Eigen::Index i, GridBoundary boundary) {
  const Eigen::Index n = v.size();
  if (boundary == GridBoundary::Periodic) return v(((i % n) + n) % n);
  if (i < 0) return 2 * v(0) - v(-i);
  if (i >= n) return 2 * v(n - 1) - v(2 * (n - 1) - i);
  return v(i);
}

template <bool Odd>
Eigen::VectorXd apply(const Eigen::VectorXd& v, std::span<const double> w, double scale,
                      GridBoundary boundary) {
  const Eigen::Index n = v.size();
  const Eigen::Index m = static_cast<Eigen::Index>(w.size()) - 1;
  if (n < 2 * m + 1) throw Error(Errc::ConfigInvalid, "grid too small for the stencil");
  Eigen::VectorXd out(n);
  auto point = [&](Eigen::Index i, auto&& get) {
    double s = w[0] * get(i);
    for (Eigen::Index k = 1; k <= m; ++k) {
      s += Odd ? w[k] * (get(i + k) - get(i - k)) : w[k] * (get(i + k) + get(i - k));
    }
    return s * scale;
  };
  const auto direct = [&](Eigen::Index j) { return v(j); };
  const auto ghost = [&](Eigen::Index j) { return sample(v, j, boundary); };
  for (Eigen::Index i = m; i < n - m; ++i) out(i) = point(i, direct);
  for (Eigen::Index i = 0; i < m; ++i) {
    out(i) = point(i, ghost);
    out(n - 1 - i) = point(n - 1 - i, ghost);
  }
  return out;
}

}  // namespace

Eigen::VectorXd second_difference(const Eigen::VectorXd& v, double h, int order,
                                  GridBoundary boundary) {
  Eigen::VectorXd out = apply<false>(v, second_weights(order), 1.0 / (h * h), boundary);
  if (boundary == GridBoundary::Dirichlet) out(0) = out(v.size() - 1) = 0.0;
  return out;
}

Eigen::VectorXd first_difference(const Eigen::VectorXd& v, double h, int order,
                                 GridBoundary boundary) {
  Eigen::VectorXd out = apply<true>(v, first_weights(order), 1.0 / h, boundary);
  if (boundary == GridBoundary::Dirichlet) {
    const Eigen::Index n = v.size();
    out(0) = (-3 * v(0) + 4 * v(1) - v(2)) / (2 * h);
    out(n - 1) = (3 * v(n - 1) - 4 * v(n - 2) + v(n - 3)) / (2 * h);
  }
  return out;
}

double second_difference_radius(int order) {
  const auto w = second_weights(order);
  // Symbol at the Nyquist frequency: c_0 + 2 sum_k c_k cos(k pi).
  double s = w[0];
  for (std::size_t k = 1; k < w.size(); ++k) s += 2 * w[k] * ((k % 2) ? -1.0 : 1.0);
  return -s;
}

}  // namespace kgscat
