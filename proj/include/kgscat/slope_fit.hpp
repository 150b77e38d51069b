#pragma once

// Log-log least-squares slope fits for measured decay laws.

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace kgscat {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // of log(value) at log(x) = 0
  double stderr_slope = 0.0;
  int points = 0;
};

/// Least squares on (log x, log value) over points with window.first <= x <=
/// window.second. Throws DegenerateFit for fewer than 4 points in the window,
/// non-positive values or coincident abscissae.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points,
                   std::pair<double, double> window);
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

/// Windowed sup envelope of |f| sampled on an increasing grid: for each window
/// [x, x + width) starting at the given centers, the largest |value| inside.
/// Oscillating signals are compared through their envelopes.
std::vector<std::pair<double, double>> sup_envelope(const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& values,
                                                    const std::vector<double>& starts,
                                                    double width);

/// n logarithmically spaced points on [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int n);

}  // namespace kgscat
