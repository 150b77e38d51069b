#include "kgscat/hyperbolic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <boost/numeric/odeint.hpp>

#include "kgscat/error.hpp"
#include "kgscat/slope_fit.hpp"
#include "kgscat/stencils.hpp"
#include "kgscat/transforms.hpp"

namespace kgscat {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

OscAlgebra algebra_with_beta(double beta) {
  OscAlgebra alg;
  alg.ring.beta = Rational(beta);
  return alg;
}

}  // namespace

Eigen::VectorXd YGrid::points() const { return Eigen::VectorXd::LinSpaced(ny, -half_width, half_width); }

void YGrid::validate() const {
  if (!(half_width > 0.0)) throw Error(Errc::ConfigInvalid, "y half-width must be positive");
  if (ny < 7) throw Error(Errc::ConfigInvalid, "y grid needs at least 7 points");
}

FieldGrid seed_from_expansion(const Expansion& v, double beta, const GeneratorProfile& profile,
                              double rho, const YGrid& grid) {
  grid.validate();
  const OscAlgebra alg = algebra_with_beta(beta);
  FieldGrid f;
  f.rho = rho;
  f.ys = grid.points();
  f.V = ExpansionEvaluator(v, alg, profile, f.ys)(rho);
  f.V_rho = ExpansionEvaluator(exp_drho(v, alg), alg, profile, f.ys)(rho);
  const Eigen::Index last = f.ys.size() - 1;
  f.V(0) = f.V(last) = 0.0;
  f.V_rho(0) = f.V_rho(last) = 0.0;
  return f;
}

MarchStats march_hyperbolic(const FieldGrid& initial, double rho_end,
                            const std::vector<double>& observe_at, const MarchOptions& opt,
                            const std::function<void(const FieldGrid&)>& observe) {
  const Eigen::Index ny = initial.ys.size();
  if (opt.fd_order != 2 && opt.fd_order != 4) throw Error(Errc::ConfigInvalid, "fd_order must be 2 or 4");
  if (ny < 7) throw Error(Errc::ConfigInvalid, "y grid needs at least 7 points");
  const double dy = initial.ys(1) - initial.ys(0);
  const double rho_start = initial.rho;
  const double rho_low = std::min(rho_start, rho_end);
  if (!(rho_low >= 1.0)) throw Error(Errc::RhoOutOfRange, "march reaches below rho = 1");
  const double direction = rho_end < rho_start ? -1.0 : 1.0;
  const double max_step = opt.cfl * rho_low * dy;
  if (opt.fixed_step > 0.0 && opt.fixed_step > max_step) {
    throw Error(Errc::CflViolation, "step " + std::to_string(opt.fixed_step) +
                                        " exceeds cfl * rho * dy = " + std::to_string(max_step));
  }
  // odeint's step-size cap assumes increasing time, so the march runs in
  // tau = direction * rho.
  std::vector<double> times{rho_start};
  for (double r : observe_at) {
    if ((r - rho_start) * direction < 0 || (r - rho_end) * direction > 0) {
      throw Error(Errc::ConfigInvalid, "observation point outside the march");
    }
    if ((r - times.back()) * direction < 0) {
      throw Error(Errc::ConfigInvalid, "observation points must follow the march direction");
    }
    if (r != times.back()) times.push_back(r);
  }
  if (times.back() != rho_end) times.push_back(rho_end);
  for (double& t : times) t *= direction;

  const Eigen::VectorXd ys = initial.ys;
  auto rhs = [&](const State& x, State& dx, double tau) {
    const double rho = direction * tau;
    Eigen::Map<const Eigen::VectorXd> V(x.data(), ny);
    Eigen::Map<const Eigen::VectorXd> W(x.data() + ny, ny);
    Eigen::Map<Eigen::VectorXd> dV(dx.data(), ny);
    Eigen::Map<Eigen::VectorXd> dW(dx.data() + ny, ny);
    dV = W;
    const Eigen::ArrayXd v = V.array();
    dW = (-(1.0 + opt.beta * v.square() / rho + 0.25 / (rho * rho)) * v).matrix() +
         second_difference(V, dy, opt.fd_order) / (rho * rho);
    if (opt.source) dW += opt.source(rho, ys);
    dV(0) = dV(ny - 1) = 0.0;
    dW(0) = dW(ny - 1) = 0.0;
    if (direction < 0) {
      dV = -dV;
      dW = -dW;
    }
  };

  MarchStats stats;
  const std::set<double> wanted(observe_at.begin(), observe_at.end());
  auto observer = [&](const State& x, double tau) {
    const double rho = direction * tau;
    if (!wanted.count(rho)) return;
    FieldGrid f;
    f.rho = rho;
    f.ys = ys;
    f.V = Eigen::Map<const Eigen::VectorXd>(x.data(), ny);
    f.V_rho = Eigen::Map<const Eigen::VectorXd>(x.data() + ny, ny);
    if (!f.V.allFinite()) throw Error(Errc::StepFailure, "non-finite field at rho = " + std::to_string(rho));
    const double edge = std::max(std::abs(f.V(1)), std::abs(f.V(ny - 2)));
    stats.max_boundary = std::max(stats.max_boundary, edge);
    if (edge > opt.boundary_floor) {
      throw Error(Errc::BoundaryLeak, "|V| = " + std::to_string(edge) +
                                          " next to the y-boundary at rho = " + std::to_string(rho));
    }
    observe(f);
  };

  State x(2 * ny);
  Eigen::Map<Eigen::VectorXd>(x.data(), ny) = initial.V;
  Eigen::Map<Eigen::VectorXd>(x.data() + ny, ny) = initial.V_rho;
  try {
    if (opt.fixed_step > 0.0) {
      odeint::runge_kutta4<State> stepper;
      stats.steps = static_cast<long>(odeint::integrate_times(
          stepper, rhs, x, times.begin(), times.end(), opt.fixed_step, observer));
    } else {
      auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, max_step,
                                             odeint::runge_kutta_fehlberg78<State>());
      stats.steps = static_cast<long>(odeint::integrate_times(
          stepper, rhs, x, times.begin(), times.end(), std::min(0.05, max_step),
          observer, odeint::max_step_checker(10'000'000)));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::StepFailure, std::string("hyperbolic march failed: ") + e.what());
  }
  return stats;
}

std::vector<FieldGrid> march_hyperbolic(const FieldGrid& initial, double rho_end,
                                        const std::vector<double>& observe_at,
                                        const MarchOptions& opt, MarchStats* stats) {
  std::vector<FieldGrid> out;
  out.reserve(observe_at.size());
  const MarchStats s =
      march_hyperbolic(initial, rho_end, observe_at, opt, [&](const FieldGrid& f) { out.push_back(f); });
  if (stats) *stats = s;
  return out;
}

Eigen::VectorXd sample_hyperbolic_at(const FieldGrid& initial, const MarchOptions& opt, double t,
                                     const Eigen::VectorXd& xs, double rho_min, double y_max,
                                     std::vector<Eigen::Index>& used) {
  const Eigen::VectorXd& ys = initial.ys;
  const Eigen::Index ny = ys.size();
  const double dy = ys(1) - ys(0);
  y_max = std::min(y_max, ys(ny - 1) - 3 * dy);
  std::map<double, std::vector<std::pair<Eigen::Index, double>>, std::greater<>> by_rho;
  used.clear();
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    if (std::abs(xs(i)) >= t) continue;
    const HyperbolicPoint h = to_hyperbolic(t, xs(i));
    if (h.rho < rho_min || std::abs(h.y) > y_max || h.rho > initial.rho) continue;
    by_rho[h.rho].emplace_back(i, h.y);
    used.push_back(i);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(xs.size());
  if (by_rho.empty()) return out;
  std::vector<double> rhos;
  for (const auto& [rho, pts] : by_rho) rhos.push_back(rho);
  march_hyperbolic(initial, rhos.back(), rhos, opt, [&](const FieldGrid& f) {
    for (const auto& [i, y] : by_rho.at(f.rho)) {
      const double u = (y - ys(0)) / dy;
      const Eigen::Index j0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(u)) - 2, 0, ny - 6);
      double value = 0.0;
      for (Eigen::Index j = j0; j < j0 + 6; ++j) {
        double w = 1.0;
        for (Eigen::Index m = j0; m < j0 + 6; ++m) {
          if (m != j) w *= (u - m) / static_cast<double>(j - m);
        }
        value += w * f.V(j);
      }
      out(i) = value / std::sqrt(f.rho);
    }
  });
  std::sort(used.begin(), used.end());
  return out;
}

DiffReport diff_metrics(const std::vector<FieldGrid>& snapshots, const Expansion& reference,
                        int reference_order, double beta, const GeneratorProfile& profile,
                        const std::vector<double>& checkpoint_starts, double window,
                        std::pair<double, double> fit_window) {
  DiffReport report;
  report.reference_order = reference_order;
  if (snapshots.empty()) return report;
  const OscAlgebra alg = algebra_with_beta(beta);
  const Eigen::VectorXd& ys = snapshots.front().ys;
  const double dy = ys(1) - ys(0);
  const ExpansionEvaluator value(reference, alg, profile, ys);
  const ExpansionEvaluator slope(exp_drho(reference, alg), alg, profile, ys);

  auto norms = [&](const FieldGrid& f) {
    const Eigen::VectorXd d = f.V - value(f.rho);
    const Eigen::VectorXd dr = f.V_rho - slope(f.rho);
    const Eigen::VectorXd dyd = first_difference(d, dy, 4);
    CheckpointDiff c;
    c.at = f.rho;
    c.sup = d.cwiseAbs().maxCoeff();
    c.l2 = std::sqrt(d.squaredNorm() * dy);
    c.h1 = std::sqrt((dr.squaredNorm() + dyd.squaredNorm()) * dy);
    return c;
  };

  if (window <= 0.0) {
    for (const auto& f : snapshots) report.checkpoints.push_back(norms(f));
    std::sort(report.checkpoints.begin(), report.checkpoints.end(),
              [](const auto& l, const auto& r) { return l.at < r.at; });
  } else {
    std::vector<double> starts = checkpoint_starts;
    std::sort(starts.begin(), starts.end());
    for (double s : starts) {
      CheckpointDiff c;
      c.at = s;
      bool any = false;
      for (const auto& f : snapshots) {
        if (f.rho < s || f.rho >= s + window) continue;
        const CheckpointDiff n = norms(f);
        c.sup = std::max(c.sup, n.sup);
        c.l2 = std::max(c.l2, n.l2);
        c.h1 = std::max(c.h1, n.h1);
        any = true;
      }
      if (any) report.checkpoints.push_back(c);
    }
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& c : report.checkpoints) {
    if (c.at >= fit_window.first && c.at <= fit_window.second && c.sup > 0) pts.emplace_back(c.at, c.sup);
  }
  if (pts.size() >= 4) {
    const SlopeFit fit = fit_slope(pts);
    report.fitted_slope = fit.slope;
    report.slope_stderr = fit.stderr_slope;
  }
  return report;
}

std::vector<double> window_schedule(const std::vector<double>& starts, double window, int samples) {
  std::vector<double> out;
  for (double s : starts) {
    for (int k = 0; k < samples; ++k) out.push_back(s + window * k / samples);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace kgscat
