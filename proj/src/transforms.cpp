#include "kgscat/transforms.hpp"

#include <cmath>
#include <string>

#include "kgscat/error.hpp"

namespace kgscat {

HyperbolicPoint to_hyperbolic(double t, double x) {
  if (!(t > std::abs(x))) {
    throw Error(Errc::OutsideLightCone,
                "(t, x) = (" + std::to_string(t) + ", " + std::to_string(x) + ") has t <= |x|");
  }
  // (t - x)(t + x) avoids cancellation near the cone.
  return {std::sqrt((t - x) * (t + x)), 0.5 * std::log((t + x) / (t - x))};
}

CartesianPoint from_hyperbolic(double rho, double y) {
  return {rho * std::cosh(y), rho * std::sinh(y)};
}

}  // namespace kgscat
