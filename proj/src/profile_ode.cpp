#include "kgscat/profile_ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "kgscat/asym_engine.hpp"
#include "kgscat/error.hpp"

namespace kgscat {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

void require_rho(double rho) {
  if (!(rho >= 1.0)) throw Error(Errc::RhoOutOfRange, "rho = " + std::to_string(rho) + " < 1");
}

// Frozen expansion evaluated at scalar a, b: value and rho-derivative.
class ScalarExpansion {
 public:
  ScalarExpansion(const Expansion& u, const OdeParams& p) : delta_(p.delta), b_(p.b) {
    const OscAlgebra alg;
    collect(u, p, value_);
    collect(exp_drho(u, alg), p, slope_);
  }

  Jet operator()(double rho) const { return {sum(value_, rho), sum(slope_, rho)}; }

 private:
  struct Term {
    TermKey key;
    double coeff;
  };

  static void collect(const Expansion& u, const OdeParams& p, std::vector<Term>& out) {
    for (const auto& [k, c] : u.terms()) {
      double v = 0.0;
      for (const auto& m : c.terms()) {
        v += m.coefficient.get_d() * std::pow(p.beta, m.beta_power()) *
             std::pow(p.a, m.key.exponent(Generator::A, 0));
      }
      out.push_back({k, v});
    }
  }

  double sum(const std::vector<Term>& terms, double rho) const {
    const double log_rho = std::log(rho);
    const double phi = rho + delta_ * log_rho + b_;
    double acc = 0.0;
    for (const auto& t : terms) {
      const double trig = t.key.parity == Parity::Cos ? std::cos(t.key.n * phi)
                                                      : std::sin(t.key.n * phi);
      acc += t.coeff * trig * std::pow(log_rho, t.key.i) * std::pow(rho, -t.key.j);
    }
    return acc;
  }

  double delta_;
  double b_;
  std::vector<Term> value_;
  std::vector<Term> slope_;
};

Jet seed_data(const OdeParams& p, OdeSeed seed, int ladder_order, double rho) {
  switch (seed) {
    case OdeSeed::G0: return g0_eval(p, rho);
    case OdeSeed::G1: return g1_eval(p, rho);
    case OdeSeed::Ladder: return ladder_eval(p, ladder_order, rho);
  }
  return {};
}

int seed_order(OdeSeed seed, int ladder_order) {
  switch (seed) {
    case OdeSeed::G0: return 0;
    case OdeSeed::G1: return 1;
    case OdeSeed::Ladder: return ladder_order;
  }
  return 0;
}

// Integral of f from x_i to the right end for every i, on a uniform grid,
// fourth order (cubic interpolation per interval).
Eigen::VectorXd tail_integrals(const Eigen::VectorXd& f, double h) {
  const Eigen::Index n = f.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (n < 2) return out;
  auto piece = [&](Eigen::Index i) {
    if (n < 4) return 0.5 * h * (f(i) + f(i + 1));
    if (i == 0) return h / 24.0 * (9 * f(0) + 19 * f(1) - 5 * f(2) + f(3));
    if (i == n - 2) return h / 24.0 * (f(n - 4) - 5 * f(n - 3) + 19 * f(n - 2) + 9 * f(n - 1));
    return h / 24.0 * (-f(i - 1) + 13 * f(i) + 13 * f(i + 1) - f(i + 2));
  };
  for (Eigen::Index i = n - 2; i >= 0; --i) out(i) = out(i + 1) + piece(i);
  return out;
}

}  // namespace

OdeParams OdeParams::make(double a, double b, double beta, double rho_min, double rho_max) {
  OdeParams p;
  p.a = a;
  p.b = b;
  p.beta = beta;
  p.delta = 0.375 * beta * a * a;
  p.rho_min = rho_min;
  p.rho_max = rho_max;
  p.validate();
  return p;
}

void OdeParams::validate() const {
  if (!(rho_min >= 1.0)) throw Error(Errc::ConfigInvalid, "rho_min must be >= 1");
  if (!(rho_max >= rho_min)) throw Error(Errc::ConfigInvalid, "rho_max must be >= rho_min");
  const double expected = 0.375 * beta * a * a;
  if (std::abs(delta - expected) > 1e-15 * std::max(1.0, std::abs(expected))) {
    throw Error(Errc::ConfigInvalid, "delta must equal (3/8) beta a^2");
  }
}

Jet2 g0_jet(const OdeParams& p, double rho) {
  require_rho(rho);
  const double phi = rho + p.delta * std::log(rho) + p.b;
  const double d1 = 1.0 + p.delta / rho;
  const double d2 = -p.delta / (rho * rho);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return {p.a * c, -p.a * d1 * s, -p.a * (d2 * s + d1 * d1 * c)};
}

Jet g0_eval(const OdeParams& p, double rho) {
  const Jet2 j = g0_jet(p, rho);
  return {j.g, j.g_dot};
}

Jet2 g1_jet(const OdeParams& p, double rho) {
  Jet2 j = g0_jet(p, rho);
  const double phi = rho + p.delta * std::log(rho) + p.b;
  const double d1 = 1.0 + p.delta / rho;
  const double d2 = -p.delta / (rho * rho);
  const double c3 = std::cos(3 * phi);
  const double s3 = std::sin(3 * phi);
  const double k = p.delta * p.a / 12.0;
  j.g += k * c3 / rho;
  j.g_dot += k * (-c3 / (rho * rho) - 3 * d1 * s3 / rho);
  j.g_ddot += k * (2 * c3 / (rho * rho * rho) + 6 * d1 * s3 / (rho * rho) - 3 * d2 * s3 / rho -
                   9 * d1 * d1 * c3 / rho);
  return j;
}

Jet g1_eval(const OdeParams& p, double rho) {
  const Jet2 j = g1_jet(p, rho);
  return {j.g, j.g_dot};
}

double apply_L(const OdeParams& p, double rho, const Jet2& jet) {
  return jet.g_ddot + (1.0 + p.beta * jet.g * jet.g / rho + 0.25 / (rho * rho)) * jet.g;
}

std::function<double(double)> apply_L_numeric(const OdeParams& p, ProfileFunction g) {
  return [p, g = std::move(g)](double rho) { return apply_L(p, rho, g(rho)); };
}

Jet ladder_eval(const OdeParams& p, int order, double rho) {
  require_rho(rho);
  return ScalarExpansion(constant_ladder(order), p)(rho);
}

OdeSolution solve_backward(const OdeParams& p, OdeSeed seed, double rho_terminal,
                           const Eigen::VectorXd& grid, const BackwardOptions& opt) {
  p.validate();
  if (grid.size() == 0) throw Error(Errc::ConfigInvalid, "empty output grid");
  if (grid.minCoeff() < 1.0) throw Error(Errc::RhoOutOfRange, "grid reaches below rho = 1");
  if (grid.maxCoeff() > rho_terminal) {
    throw Error(Errc::ConfigInvalid, "grid extends past the terminal point");
  }
  for (Eigen::Index i = 1; i < grid.size(); ++i) {
    if (!(grid(i) > grid(i - 1))) throw Error(Errc::ConfigInvalid, "grid must be increasing");
  }

  OdeSolution sol;
  sol.rho = grid;
  sol.g.resize(grid.size());
  sol.g_dot.resize(grid.size());
  sol.method = OdeMethod::BackwardRK;
  sol.seed = seed;
  sol.seed_order = seed_order(seed, opt.ladder_order);
  sol.rho_terminal = rho_terminal;

  Jet terminal;
  if (seed == OdeSeed::Ladder) {
    terminal = ScalarExpansion(constant_ladder(opt.ladder_order), p)(rho_terminal);
  } else {
    terminal = seed_data(p, seed, opt.ladder_order, rho_terminal);
  }
  State x{terminal.g, terminal.g_dot};

  std::vector<double> times;
  times.reserve(grid.size() + 1);
  times.push_back(rho_terminal);
  for (Eigen::Index i = grid.size() - 1; i >= 0; --i) {
    if (grid(i) < rho_terminal) times.push_back(grid(i));
  }

  auto rhs = [&p](const State& s, State& ds, double rho) {
    ds[0] = s[1];
    ds[1] = -(1.0 + p.beta * s[0] * s[0] / rho + 0.25 / (rho * rho)) * s[0];
  };
  Eigen::Index next = grid.size() - 1;
  auto observe = [&](const State& s, double rho) {
    if (next >= 0 && grid(next) == rho) {
      sol.g(next) = s[0];
      sol.g_dot(next) = s[1];
      --next;
    }
  };
  try {
    auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol,
                                           odeint::runge_kutta_fehlberg78<State>());
    odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), -0.05, observe,
                            odeint::max_step_checker(10'000'000));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::StepFailure, std::string("backward integration failed: ") + e.what());
  }
  if (next >= 0) throw Error(Errc::StepFailure, "integration did not reach every grid point");
  if (!sol.g.allFinite() || !sol.g_dot.allFinite()) {
    throw Error(Errc::StepFailure, "non-finite values in backward integration");
  }
  return sol;
}

double terminal_doubling_error(const OdeParams& p, OdeSeed seed, double rho_terminal,
                               const Eigen::VectorXd& grid, const BackwardOptions& opt) {
  const OdeSolution near = solve_backward(p, seed, rho_terminal, grid, opt);
  const OdeSolution far = solve_backward(p, seed, 2.0 * rho_terminal, grid, opt);
  return (near.g - far.g).cwiseAbs().maxCoeff();
}

OdeSolution picard_solve(const OdeParams& p, int iterations, const Eigen::VectorXd& rho_grid,
                         const PicardOptions& opt) {
  p.validate();
  if (iterations < 0) throw Error(Errc::ConfigInvalid, "iterations must be >= 0");
  const Eigen::Index n = rho_grid.size();
  if (n < 4) throw Error(Errc::ConfigInvalid, "Picard grid needs at least 4 points");
  if (rho_grid(0) < 1.0) throw Error(Errc::RhoOutOfRange, "grid reaches below rho = 1");
  const double h = rho_grid(1) - rho_grid(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    if (std::abs(rho_grid(i) - rho_grid(i - 1) - h) > 1e-9 * h) {
      throw Error(Errc::ConfigInvalid, "Picard grid must be uniform");
    }
  }

  // Free solutions sqrt(rho) J0, sqrt(rho) Y0 of L'(0) and their Wronskian 2/pi.
  Eigen::VectorXd u1(n), u2(n), du1(n), du2(n), g1(n), dg1(n), lg1(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = rho_grid(i);
    const double sr = std::sqrt(r);
    const double j0 = std::cyl_bessel_j(0.0, r);
    const double j1 = std::cyl_bessel_j(1.0, r);
    const double y0 = std::cyl_neumann(0.0, r);
    const double y1 = std::cyl_neumann(1.0, r);
    u1(i) = sr * j0;
    u2(i) = sr * y0;
    du1(i) = j0 / (2 * sr) - sr * j1;
    du2(i) = y0 / (2 * sr) - sr * y1;
    const Jet2 jet = g1_jet(p, r);
    g1(i) = jet.g;
    dg1(i) = jet.g_dot;
    lg1(i) = apply_L(p, r, jet);
  }
  const double half_pi = std::numbers::pi / 2.0;

  // Free solution carrying the terminal data of h = g - g1 at the right end.
  const Eigen::Index last = n - 1;
  const Jet tail = ladder_eval(p, opt.ladder_order, rho_grid(last));
  const double h_end = tail.g - g1(last);
  const double dh_end = tail.g_dot - dg1(last);
  const double c1 = half_pi * (h_end * du2(last) - dh_end * u2(last));
  const double c2 = half_pi * (u1(last) * dh_end - du1(last) * h_end);
  const Eigen::VectorXd free_h = c1 * u1 + c2 * u2;
  const Eigen::VectorXd free_dh = c1 * du1 + c2 * du2;

  OdeSolution sol;
  sol.rho = rho_grid;
  sol.method = OdeMethod::PicardIntegral;
  sol.seed = OdeSeed::Ladder;
  sol.seed_order = opt.ladder_order;
  sol.rho_terminal = rho_grid(last);

  Eigen::VectorXd hk = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd dhk = Eigen::VectorXd::Zero(n);
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < iterations; ++it) {
    const Eigen::ArrayXd g = g1.array();
    const Eigen::ArrayXd hh = hk.array();
    const Eigen::VectorXd forcing =
        (-(p.beta / rho_grid.array()) * (3 * g * g + 3 * g * hh + hh * hh) * hh - lg1.array())
            .matrix();
    const Eigen::VectorXd a_int = tail_integrals(u1.cwiseProduct(forcing), h);
    const Eigen::VectorXd b_int = tail_integrals(u2.cwiseProduct(forcing), h);
    const Eigen::VectorXd duhamel =
        -half_pi * (u2.cwiseProduct(a_int) - u1.cwiseProduct(b_int));
    const Eigen::VectorXd d_duhamel =
        -half_pi * (du2.cwiseProduct(a_int) - du1.cwiseProduct(b_int));
    const Eigen::VectorXd abs_int = tail_integrals(forcing.cwiseAbs(), h);
    const Eigen::VectorXd energy =
        (duhamel.array().square() + d_duhamel.array().square()).sqrt().matrix();
    worst_excess = std::max(worst_excess, (energy - 2.0 * abs_int).maxCoeff());

    Eigen::VectorXd next = free_h + duhamel;
    const double update = (next - hk).cwiseAbs().maxCoeff();
    sol.updates.push_back(update);
    hk = std::move(next);
    dhk = free_dh + d_duhamel;
    sol.max_rho_h = std::max(sol.max_rho_h, rho_grid.cwiseProduct(hk).cwiseAbs().maxCoeff());
    const std::size_t m = sol.updates.size();
    if (m >= 3) {
      const double ratio = sol.updates[m - 1] / sol.updates[m - 2];
      if (sol.updates[m - 1] > 100 * opt.tolerance) {
        sol.contraction_ratio = std::max(sol.contraction_ratio, ratio);
        if (ratio > 1.0) {
          throw Error(Errc::ContractionFailure,
                      "Picard update grew by " + std::to_string(ratio) + " at iteration " +
                          std::to_string(it + 1));
        }
      }
    }
    if (update < opt.tolerance) break;
  }
  sol.energy_excess = iterations > 0 ? worst_excess : 0.0;
  sol.g = g1 + hk;
  sol.g_dot = dg1 + dhk;
  return sol;
}

Eigen::VectorXd fundamental_solution(double s, const Eigen::VectorXd& rho) {
  require_rho(s);
  std::vector<Eigen::Index> order(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    require_rho(rho(i));
    if (rho(i) > s) throw Error(Errc::ConfigInvalid, "fundamental solution needs rho <= s");
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](auto l, auto r) { return rho(l) > rho(r); });
  std::vector<double> times{s};
  for (auto i : order) times.push_back(rho(i));
  Eigen::VectorXd out(rho.size());
  std::size_t next = 0;
  bool first = true;
  auto rhs = [](const State& x, State& dx, double r) {
    dx[0] = x[1];
    dx[1] = -(1.0 + 0.25 / (r * r)) * x[0];
  };
  auto observe = [&](const State& x, double) {
    if (first) {
      first = false;
      return;
    }
    out(order[next++]) = x[0];
  };
  State x{0.0, 1.0};
  auto stepper = odeint::make_controlled(1e-14, 1e-12, odeint::runge_kutta_fehlberg78<State>());
  odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), -0.01, observe,
                          odeint::max_step_checker(10'000'000));
  return out;
}

double fundamental_solution_exact(double s, double rho) {
  return std::numbers::pi / 2.0 * std::sqrt(rho * s) *
         (std::cyl_bessel_j(0.0, s) * std::cyl_neumann(0.0, rho) -
          std::cyl_neumann(0.0, s) * std::cyl_bessel_j(0.0, rho));
}

Eigen::VectorXd uniform_grid(double lo, double hi, double h) {
  if (!(hi > lo) || !(h > 0)) throw Error(Errc::ConfigInvalid, "invalid uniform grid");
  const auto n = static_cast<Eigen::Index>(std::llround((hi - lo) / h)) + 1;
  return Eigen::VectorXd::LinSpaced(n, lo, lo + (n - 1) * h);
}

}  // namespace kgscat
