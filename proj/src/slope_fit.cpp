#include "kgscat/slope_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "kgscat/error.hpp"

namespace kgscat {

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points,
                   std::pair<double, double> window) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [x, v] : points) {
    if (x < window.first || x > window.second) continue;
    if (!(x > 0.0) || !(v > 0.0) || !std::isfinite(v)) {
      throw Error(Errc::DegenerateFit, "slope fit needs positive finite abscissae and values");
    }
    lx.push_back(std::log(x));
    ly.push_back(std::log(v));
  }
  const auto n = static_cast<int>(lx.size());
  if (n < 4) throw Error(Errc::DegenerateFit, "slope fit needs at least 4 points in the window");
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (int k = 0; k < n; ++k) {
    design(k, 0) = 1.0;
    design(k, 1) = lx[k];
    rhs(k) = ly[k];
  }
  const Eigen::VectorXd xs = design.col(1);
  const double spread = (xs.array() - xs.mean()).square().sum();
  if (spread <= 1e-300) throw Error(Errc::DegenerateFit, "slope fit abscissae coincide");
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  const double rss = (design * coef - rhs).squaredNorm();
  SlopeFit fit;
  fit.intercept = coef(0);
  fit.slope = coef(1);
  fit.points = n;
  fit.stderr_slope = n > 2 ? std::sqrt(rss / (n - 2) / spread) : 0.0;
  return fit;
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  return fit_slope(points, {0.0, std::numeric_limits<double>::infinity()});
}

std::vector<std::pair<double, double>> sup_envelope(const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& values,
                                                    const std::vector<double>& starts,
                                                    double width) {
  std::vector<std::pair<double, double>> out;
  const double* begin = x.data();
  const double* end = x.data() + x.size();
  for (double s : starts) {
    const auto lo = std::lower_bound(begin, end, s) - begin;
    const auto hi = std::lower_bound(begin, end, s + width) - begin;
    if (hi <= lo) continue;
    out.emplace_back(s, values.segment(lo, hi - lo).cwiseAbs().maxCoeff());
  }
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    out[k] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  }
  return out;
}

}  // namespace kgscat
