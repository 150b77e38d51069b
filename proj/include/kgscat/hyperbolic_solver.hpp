#pragma once

// Method-of-lines solver for Psi(V) = S in hyperbolic coordinates:
//   V_rhorho = -(1 + beta V^2 / rho + 1 / (4 rho^2)) V + rho^{-2} V_yy + S
// on a uniform y-grid with homogeneous Dirichlet ends, marched in rho from
// data supplied by an expansion at a large rho.

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "kgscat/osc_algebra.hpp"

namespace kgscat {

struct YGrid {
  double half_width = 8.0;
  int ny = 2001;

  Eigen::VectorXd points() const;
  double dy() const { return 2.0 * half_width / (ny - 1); }
  void validate() const;
};

/// Sampled field on one hyperboloid rho = const.
struct FieldGrid {
  double rho = 0.0;
  Eigen::VectorXd ys;
  Eigen::VectorXd V;
  Eigen::VectorXd V_rho;
};

/// Right-hand side S(rho, ys) of Psi(V) = S (manufactured solutions).
using FieldSource = std::function<Eigen::VectorXd(double rho, const Eigen::VectorXd& ys)>;

struct MarchOptions {
  double beta = 0.1;
  int fd_order = 4;        // 2 or 4 for d^2/dy^2
  double rel_tol = 1e-11;  // adaptive Runge-Kutta-Fehlberg 7(8)
  double abs_tol = 1e-13;
  double cfl = 1.0;         // |step| <= cfl * rho_low * dy
  double fixed_step = 0.0;  // > 0 selects fixed-step classical RK4
  double boundary_floor = 1e-10;
  FieldSource source;
};

struct MarchStats {
  long steps = 0;
  double max_boundary = 0.0;  // largest |V| next to the ends seen at observations
};

/// V, V_rho at rho from an expansion and its exact rho-derivative; the end
/// points are set to zero.
FieldGrid seed_from_expansion(const Expansion& v, double beta, const GeneratorProfile& profile,
                              double rho, const YGrid& grid);

/// Marches initial to rho_end (either direction), calling observe at every
/// rho in observe_at (which must lie between the two and be monotone in the
/// marching direction). CflViolation when a fixed step exceeds the bound,
/// BoundaryLeak when |V| next to an end exceeds the floor at an observation,
/// StepFailure on a breakdown of the step control.
MarchStats march_hyperbolic(const FieldGrid& initial, double rho_end,
                            const std::vector<double>& observe_at, const MarchOptions& opt,
                            const std::function<void(const FieldGrid&)>& observe);

/// Convenience wrapper keeping every observed snapshot.
std::vector<FieldGrid> march_hyperbolic(const FieldGrid& initial, double rho_end,
                                        const std::vector<double>& observe_at,
                                        const MarchOptions& opt, MarchStats* stats = nullptr);

/// v = rho^{-1/2} V of the hyperbolic solution at the points (t, xs(i)),
/// marching from initial down to the smallest rho needed. Only points with
/// rho >= rho_min and |y| <= y_max are sampled (their indices go to used);
/// V is interpolated in y by a degree-5 Lagrange stencil at the exact rho.
Eigen::VectorXd sample_hyperbolic_at(const FieldGrid& initial, const MarchOptions& opt, double t,
                                     const Eigen::VectorXd& xs, double rho_min, double y_max,
                                     std::vector<Eigen::Index>& used);

struct CheckpointDiff {
  double at = 0.0;  // rho or t
  double sup = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;  // L2 norm of the first derivatives
};

struct DiffReport {
  int reference_order = 0;
  std::vector<CheckpointDiff> checkpoints;  // strictly increasing in `at`
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
};

/// Differences V - V_k over the snapshots. Snapshots with rho in
/// [start, start + window) are pooled per checkpoint and each norm takes its
/// largest value in the window (the envelope of an oscillating difference);
/// window = 0 makes every snapshot its own checkpoint. The slope of the sup
/// norm is fitted over fit_window when it holds at least 4 checkpoints.
DiffReport diff_metrics(const std::vector<FieldGrid>& snapshots, const Expansion& reference,
                        int reference_order, double beta, const GeneratorProfile& profile,
                        const std::vector<double>& checkpoint_starts, double window,
                        std::pair<double, double> fit_window);

/// Observation schedule: `samples` equally spaced points in each window
/// [start, start + window), merged and sorted decreasingly.
std::vector<double> window_schedule(const std::vector<double>& starts, double window, int samples);

}  // namespace kgscat
