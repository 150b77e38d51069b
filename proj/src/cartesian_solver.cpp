#include "kgscat/cartesian_solver.hpp"

#include <algorithm>
#include <cmath>

#include "kgscat/error.hpp"

namespace kgscat {

Eigen::VectorXd XGrid::points() const {
  if (boundary == GridBoundary::Periodic) {
    return Eigen::VectorXd::LinSpaced(nx, -half_width, half_width - dx());
  }
  return Eigen::VectorXd::LinSpaced(nx, -half_width, half_width);
}

double XGrid::dx() const {
  return boundary == GridBoundary::Periodic ? 2.0 * half_width / nx : 2.0 * half_width / (nx - 1);
}

void XGrid::validate() const {
  if (!(half_width > 0.0)) throw Error(Errc::ConfigInvalid, "x half-width must be positive");
  if (nx < 9) throw Error(Errc::ConfigInvalid, "x grid needs at least 9 points");
}

double cartesian_dt_limit(double dx, int fd_order) {
  return kYoshidaStability / std::sqrt(second_difference_radius(fd_order) / (dx * dx) + 1.0);
}

double energy(const CartesianState& s, double beta, int fd_order, GridBoundary boundary) {
  if (s.v.size() == 0) return 0.0;
  const double dx = boundary == GridBoundary::Periodic
                        ? (s.xs(1) - s.xs(0))
                        : (s.xs(s.xs.size() - 1) - s.xs(0)) / (s.xs.size() - 1);
  const Eigen::VectorXd lap = second_difference(s.v, dx, fd_order, boundary);
  const Eigen::ArrayXd v = s.v.array();
  return 0.5 * dx * (s.v_t.squaredNorm() - s.v.dot(lap) + s.v.squaredNorm()) +
         0.25 * beta * dx * v.square().square().sum();
}

CartesianStats solve_cartesian(const CartesianState& initial, double t_end,
                               const std::vector<double>& observe_at, const CartesianOptions& opt,
                               const std::function<void(const CartesianState&)>& observe) {
  const Eigen::Index n = initial.xs.size();
  if (n < 9) throw Error(Errc::ConfigInvalid, "x grid needs at least 9 points");
  const double dx = initial.xs(1) - initial.xs(0);
  if (!(opt.dt > 0.0)) throw Error(Errc::ConfigInvalid, "dt must be positive");
  if (opt.dt > dx) {
    throw Error(Errc::CflViolation, "dt " + std::to_string(opt.dt) + " exceeds dx " + std::to_string(dx));
  }
  const double limit = cartesian_dt_limit(dx, opt.fd_order);
  if (opt.dt > limit) {
    throw Error(Errc::CflViolation, "dt " + std::to_string(opt.dt) + " exceeds the stability limit " +
                                        std::to_string(limit));
  }
  const double direction = t_end < initial.t ? -1.0 : 1.0;
  std::vector<double> stops;
  for (double t : observe_at) {
    if ((t - initial.t) * direction < 0 || (t - t_end) * direction > 0) {
      throw Error(Errc::ConfigInvalid, "observation time outside the march");
    }
    if (!stops.empty() && (t - stops.back()) * direction < 0) {
      throw Error(Errc::ConfigInvalid, "observation times must follow the march direction");
    }
    stops.push_back(t);
  }

  CartesianState s = initial;
  CartesianStats stats;
  stats.initial_energy = energy(s, opt.beta, opt.fd_order, opt.boundary);
  const bool dirichlet = opt.boundary == GridBoundary::Dirichlet;

  auto force = [&](double t) {
    Eigen::VectorXd f = second_difference(s.v, dx, opt.fd_order, opt.boundary);
    f.array() -= s.v.array() + opt.beta * s.v.array().cube();
    if (opt.source) f += opt.source(t, s.xs);
    if (dirichlet) f(0) = f(n - 1) = 0.0;
    return f;
  };

  const double cbrt2 = std::cbrt(2.0);
  const double w1 = 1.0 / (2.0 - cbrt2);
  const double w0 = -cbrt2 / (2.0 - cbrt2);
  const double weights[3] = {w1, w0, w1};

  Eigen::VectorXd f = force(s.t);
  auto step = [&](double h) {
    // Kick-drift-kick per stage; the closing kick's force is reused as the
    // next opening force since v and t are unchanged between them.
    for (double w : weights) {
      const double hw = h * w;
      s.v_t += 0.5 * hw * f;
      s.v += hw * s.v_t;
      s.t += hw;
      f = force(s.t);
      s.v_t += 0.5 * hw * f;
    }
    ++stats.steps;
  };

  auto visit = [&](bool report) {
    if (!s.v.allFinite()) throw Error(Errc::StepFailure, "non-finite field at t = " + std::to_string(s.t));
    const double e = energy(s, opt.beta, opt.fd_order, opt.boundary);
    const double scale = std::max(std::abs(stats.initial_energy), 1e-300);
    stats.max_relative_drift = std::max(stats.max_relative_drift, std::abs(e - stats.initial_energy) / scale);
    double inside = 0.0;
    double outside = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = std::abs(s.v(i));
      const double ax = std::abs(s.xs(i));
      if (ax < s.t) inside = std::max(inside, a);
      if (ax >= s.t + opt.light_cone_margin) outside = std::max(outside, a);
    }
    const double ratio = inside > 0 ? outside / inside : (outside > 0 ? INFINITY : 0.0);
    stats.max_light_cone_ratio = std::max(stats.max_light_cone_ratio, ratio);
    if (opt.light_cone_floor > 0 && ratio > opt.light_cone_floor) {
      throw Error(Errc::BoundaryLeak, "light-cone leak ratio " + std::to_string(ratio) + " at t = " +
                                          std::to_string(s.t));
    }
    if (report) observe(s);
  };

  const std::size_t observed = stops.size();
  if (stops.empty() || stops.back() != t_end) stops.push_back(t_end);
  for (std::size_t k = 0; k < stops.size(); ++k) {
    const double target = stops[k];
    // Steps of opt.dt, the last one shortened to land on target exactly.
    const double span = (target - s.t) * direction;
    if (span > 0) {
      const long whole = static_cast<long>(std::ceil(span / opt.dt - 1e-9));
      const double t0 = s.t;
      for (long i = 0; i < whole; ++i) {
        const double next = (i + 1 == whole) ? target : t0 + direction * opt.dt * (i + 1);
        step(next - s.t);
        s.t = next;
      }
    }
    visit(k < observed);
  }
  return stats;
}

CartesianEvaluator::CartesianEvaluator(const Expansion& v, double beta, const GeneratorProfile& profile)
    : v_(v), profile_(profile) {
  alg_.ring.beta = Rational(beta);
  v_rho_ = exp_drho(v, alg_);
  v_y_ = exp_dy(v, alg_);
}

CartesianSample CartesianEvaluator::operator()(double t, const Eigen::VectorXd& xs,
                                               double rho_floor) const {
  const Eigen::Index n = xs.size();
  CartesianSample out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  if (rho_floor < 1.0) throw Error(Errc::RhoOutOfRange, "rho floor below 1");
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(xs(i)) < t && (t - xs(i)) * (t + xs(i)) >= rho_floor * rho_floor) idx.push_back(i);
  }
  if (idx.empty()) return out;
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd rhos(m), ys(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double x = xs(idx[k]);
    rhos(k) = std::sqrt((t - x) * (t + x));
    ys(k) = 0.5 * std::log((t + x) / (t - x));
  }
  const Eigen::VectorXd V = ExpansionEvaluator(v_, alg_, profile_, ys).at(rhos);
  const Eigen::VectorXd Vr = ExpansionEvaluator(v_rho_, alg_, profile_, ys).at(rhos);
  const Eigen::VectorXd Vy = ExpansionEvaluator(v_y_, alg_, profile_, ys).at(rhos);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double r = rhos(k);
    const double ch = std::cosh(ys(k));
    const double sh = std::sinh(ys(k));
    const double w = 1.0 / std::sqrt(r);
    const double radial = Vr(k) - V(k) / (2 * r);
    // rho_t = cosh y, y_t = -sinh y / rho, rho_x = -sinh y, y_x = cosh y / rho.
    out.v(idx[k]) = w * V(k);
    out.v_t(idx[k]) = w * (radial * ch - Vy(k) * sh / r);
    out.v_x(idx[k]) = w * (-radial * sh + Vy(k) * ch / r);
  }
  return out;
}

CartesianState seed_cartesian_from_expansion(const Expansion& v, double beta,
                                             const GeneratorProfile& profile, double t_seed,
                                             const XGrid& grid, const SeedCutoff& cutoff) {
  grid.validate();
  if (cutoff.rho_cut < 1.0 || !(cutoff.band > 0.0)) {
    throw Error(Errc::ConfigInvalid, "seed cutoff needs rho_cut >= 1 and a positive band");
  }
  if (grid.half_width < t_seed) {
    throw Error(Errc::ConfigInvalid, "x grid must contain the light cone at the seed time");
  }
  CartesianState s;
  s.t = t_seed;
  s.xs = grid.points();
  const CartesianSample sample = CartesianEvaluator(v, beta, profile)(t_seed, s.xs, cutoff.rho_cut);
  s.v = sample.v;
  s.v_t = sample.v_t;
  for (Eigen::Index i = 0; i < s.xs.size(); ++i) {
    const double x = s.xs(i);
    if (sample.v(i) == 0.0 && sample.v_t(i) == 0.0) continue;
    const double rho = std::sqrt((t_seed - x) * (t_seed + x));
    const double u = std::clamp((rho - cutoff.rho_cut) / cutoff.band, 0.0, 1.0);
    if (u >= 1.0) continue;
    const double chi = u * u * u * (10 - 15 * u + 6 * u * u);
    const double dchi = 30 * u * u * (1 - u) * (1 - u) / cutoff.band;
    // d rho / dt = t / rho.
    s.v_t(i) = chi * sample.v_t(i) + dchi * (t_seed / rho) * sample.v(i);
    s.v(i) = chi * sample.v(i);
  }
  if (grid.boundary == GridBoundary::Dirichlet) {
    const Eigen::Index last = s.xs.size() - 1;
    s.v(0) = s.v(last) = s.v_t(0) = s.v_t(last) = 0.0;
  }
  return s;
}

}  // namespace kgscat
