#pragma once

// Hyperbolic coordinates t = rho cosh y, x = rho sinh y inside the forward
// light cone t > |x|.

namespace kgscat {

struct HyperbolicPoint {
  double rho = 0.0;
  double y = 0.0;
};

struct CartesianPoint {
  double t = 0.0;
  double x = 0.0;
};

/// OutsideLightCone unless t > |x|.
HyperbolicPoint to_hyperbolic(double t, double x);
CartesianPoint from_hyperbolic(double rho, double y);

}  // namespace kgscat
