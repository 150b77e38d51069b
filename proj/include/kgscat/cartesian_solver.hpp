#pragma once

// Solver for v_tt - v_xx + v = -beta v^3 (+ S) on a uniform x-grid: method
// of lines with a centered difference Laplacian, marched by the fourth-order
// Yoshida composition of velocity Verlet (symmetric and symplectic, so the
// discrete energy has no secular drift).

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "kgscat/osc_algebra.hpp"
#include "kgscat/stencils.hpp"

namespace kgscat {

struct XGrid {
  double half_width = 410.0;
  int nx = 16401;
  GridBoundary boundary = GridBoundary::Dirichlet;

  /// Dirichlet: nx points including both ends. Periodic: nx points on
  /// [-L, L) with spacing 2L / nx.
  Eigen::VectorXd points() const;
  double dx() const;
  void validate() const;
};

struct CartesianState {
  double t = 0.0;
  Eigen::VectorXd xs;
  Eigen::VectorXd v;
  Eigen::VectorXd v_t;
};

using CartesianSource = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& xs)>;

struct CartesianOptions {
  double beta = 0.1;
  double dt = 0.0125;
  int fd_order = 6;  // 2, 4 or 6
  GridBoundary boundary = GridBoundary::Dirichlet;
  CartesianSource source;
  /// Relative light-cone leak sup |v| (|x| >= t + margin) / sup |v| (|x| < t)
  /// tolerated at observations; <= 0 disables the check.
  double light_cone_floor = 0.0;
  double light_cone_margin = 0.25;
};

struct CartesianStats {
  long steps = 0;
  double initial_energy = 0.0;
  double max_relative_drift = 0.0;  // over observations
  double max_light_cone_ratio = 0.0;
};

/// Yoshida stability limit of omega * dt for the composition.
inline constexpr double kYoshidaStability = 1.5734;

/// Largest stable dt for the linear part at spacing dx.
double cartesian_dt_limit(double dx, int fd_order);

/// Discrete energy conserved by the semi-discrete system:
/// (1/2) sum dx (v_t^2 - v D2 v + v^2) + (beta/4) sum dx v^4.
double energy(const CartesianState& s, double beta, int fd_order = 6,
              GridBoundary boundary = GridBoundary::Dirichlet);

/// Marches from s.t to t_end (either direction) with |dt| = opt.dt, the last
/// step shortened to land on t_end; observe is called at every time in
/// observe_at (monotone in the march direction) after landing on it exactly.
/// Energy drift and light-cone leak are sampled there and at t_end.
/// CflViolation when dt > dx or dt exceeds the stability limit. With a
/// positive light_cone_floor a leak above it raises BoundaryLeak.
CartesianStats solve_cartesian(const CartesianState& initial, double t_end,
                               const std::vector<double>& observe_at, const CartesianOptions& opt,
                               const std::function<void(const CartesianState&)>& observe);

/// v, v_t, v_x of v = rho^{-1/2} V(rho, y) from an expansion, at points of
/// one time slice; zero where rho < rho_floor.
struct CartesianSample {
  Eigen::VectorXd v;
  Eigen::VectorXd v_t;
  Eigen::VectorXd v_x;
};

class CartesianEvaluator {
 public:
  CartesianEvaluator(const Expansion& v, double beta, const GeneratorProfile& profile);

  /// rho_floor >= 1; points with rho below it (or outside the cone) give 0.
  CartesianSample operator()(double t, const Eigen::VectorXd& xs, double rho_floor = 1.0) const;

 private:
  Expansion v_;
  Expansion v_rho_;
  Expansion v_y_;
  OscAlgebra alg_;
  GeneratorProfile profile_;
};

struct SeedCutoff {
  /// The seed is v_k times chi(rho): 0 for rho <= rho_cut, 1 for rho >=
  /// rho_cut + band, quintic smoothstep between.
  double rho_cut = 10.0;
  double band = 10.0;
};

CartesianState seed_cartesian_from_expansion(const Expansion& v, double beta,
                                             const GeneratorProfile& profile, double t_seed,
                                             const XGrid& grid, const SeedCutoff& cutoff = {});

}  // namespace kgscat
