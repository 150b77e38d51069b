#pragma once

// The profile ODE  L(g) = g'' + (1 + beta g^2 / rho + 1 / (4 rho^2)) g = 0
// with prescribed behavior a cos(rho + delta ln rho + b) at infinity.

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace kgscat {

struct OdeParams {
  double a = 1.0;
  double b = 0.0;
  double beta = 0.1;
  double delta = 0.0375;  // (3/8) beta a^2
  double rho_min = 1.0;
  double rho_max = 1e4;

  static OdeParams make(double a, double b, double beta, double rho_min = 1.0,
                        double rho_max = 1e4);
  /// Throws ConfigInvalid on rho_min < 1, rho_max < rho_min or an
  /// inconsistent delta.
  void validate() const;
};

struct Jet {
  double g = 0.0;
  double g_dot = 0.0;
};

struct Jet2 {
  double g = 0.0;
  double g_dot = 0.0;
  double g_ddot = 0.0;
};

/// g0 = a cos(phi), phi = rho + delta ln rho + b. RhoOutOfRange for rho < 1.
Jet g0_eval(const OdeParams& p, double rho);
Jet2 g0_jet(const OdeParams& p, double rho);
/// g1 = a cos(phi) + (delta / (12 rho)) a cos(3 phi).
Jet g1_eval(const OdeParams& p, double rho);
Jet2 g1_jet(const OdeParams& p, double rho);

/// L(g) at one point from a second-order jet.
double apply_L(const OdeParams& p, double rho, const Jet2& jet);

using ProfileFunction = std::function<Jet2(double)>;

/// rho -> L(g)(rho) for a twice differentiable profile.
std::function<double(double)> apply_L_numeric(const OdeParams& p, ProfileFunction g);

/// Terminal data from the constant-generator ladder V_order (error of the
/// data O(rho^{-order-1}) up to logarithms).
Jet ladder_eval(const OdeParams& p, int order, double rho);

enum class OdeSeed { G0, G1, Ladder };
enum class OdeMethod { BackwardRK, PicardIntegral };

struct OdeSolution {
  Eigen::VectorXd rho;  // increasing
  Eigen::VectorXd g;
  Eigen::VectorXd g_dot;
  OdeMethod method = OdeMethod::BackwardRK;
  OdeSeed seed = OdeSeed::G1;
  int seed_order = 1;  // k of the g_k / V_k supplying terminal data
  double rho_terminal = 0.0;
  /// Picard only: sup-norm of successive iterate differences.
  std::vector<double> updates;
  /// Picard only: largest ratio of successive updates after the first two.
  double contraction_ratio = 0.0;
  /// Picard only: worst (energy - 2 int |F|) over iterates, should be <= 0.
  double energy_excess = 0.0;
  /// Picard only: largest rho |h_k| over grid and iterates.
  double max_rho_h = 0.0;
};

struct BackwardOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  int ladder_order = 3;
};

/// Integrates L(g) = 0 from terminal data seed(rho_terminal) down to the
/// smallest grid point with an adaptive embedded Runge-Kutta-Fehlberg 7(8)
/// pair. The grid must be increasing with grid.maxCoeff() <= rho_terminal.
/// StepFailure on a breakdown of the step control.
OdeSolution solve_backward(const OdeParams& p, OdeSeed seed, double rho_terminal,
                           const Eigen::VectorXd& grid, const BackwardOptions& opt = {});

/// Sup over the grid of |g_T - g_2T|: terminal truncation estimate by
/// doubling the terminal point.
double terminal_doubling_error(const OdeParams& p, OdeSeed seed, double rho_terminal,
                               const Eigen::VectorXd& grid, const BackwardOptions& opt = {});

struct PicardOptions {
  double tolerance = 1e-13;  // stop when the update sup-norm falls below
  int ladder_order = 3;      // terminal data at the right end of the grid
};

/// Picard sequence h_{k+1} = L'(0)^{-1}(-(beta/rho) G(g1, h_k) h_k - L(g1)),
/// G(g, h) = 3 g^2 + 3 g h + h^2, h_0 = 0, returning g = g1 + h. Each linear
/// solve is the Duhamel integral against the fundamental solution E_s on the
/// uniform grid plus the free solution carrying the ladder's terminal data at
/// the right end of the grid. ContractionFailure when successive updates grow.
OdeSolution picard_solve(const OdeParams& p, int iterations, const Eigen::VectorXd& rho_grid,
                         const PicardOptions& opt = {});

/// E_s(rho) for rho <= s: solution of L'(0) E = 0 with E(s) = 0, E'(s) = 1,
/// integrated numerically.
Eigen::VectorXd fundamental_solution(double s, const Eigen::VectorXd& rho);
/// Closed form (pi/2) sqrt(rho s) (J0(s) Y0(rho) - Y0(s) J0(rho)).
double fundamental_solution_exact(double s, double rho);

/// Uniform grid with step h covering [lo, hi].
Eigen::VectorXd uniform_grid(double lo, double hi, double h);

}  // namespace kgscat
