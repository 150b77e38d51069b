#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "kgscat/asym_engine.hpp"
#include "kgscat/cartesian_solver.hpp"
#include "kgscat/checkpoint_io.hpp"
#include "kgscat/error.hpp"
#include "kgscat/hyperbolic_solver.hpp"
#include "kgscat/stencils.hpp"
#include "kgscat/transforms.hpp"

using namespace kgscat;

namespace {

constexpr double kPi = std::numbers::pi;

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::IoError;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("kgscat_test_" + name)).string();
}

}  // namespace

TEST_CASE("hyperbolic coordinates round trip inside the cone") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> ts(0.5, 1000.0), frac(-0.999, 0.999);
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double t = ts(rng);
    const double x = frac(rng) * t;
    const HyperbolicPoint h = to_hyperbolic(t, x);
    const CartesianPoint c = from_hyperbolic(h.rho, h.y);
    worst = std::max(worst, (std::abs(c.t - t) + std::abs(c.x - x)) / t);
  }
  CHECK(worst < 1e-12);
  const HyperbolicPoint a = to_hyperbolic(5, 3);
  CHECK(a.rho == doctest::Approx(4.0));
  CHECK(a.y == doctest::Approx(std::log(2.0)));
  const HyperbolicPoint b = to_hyperbolic(7, 0);
  CHECK(b.rho == 7.0);
  CHECK(b.y == 0.0);
  const CartesianPoint c = from_hyperbolic(4, std::log(2.0));
  CHECK(c.t == doctest::Approx(5.0));
  CHECK(c.x == doctest::Approx(3.0));
  CHECK(code_of([] { (void)to_hyperbolic(1.0, 1.0); }) == Errc::OutsideLightCone);
  CHECK(code_of([] { (void)to_hyperbolic(-2.0, 0.0); }) == Errc::OutsideLightCone);
}

TEST_CASE("difference stencils converge at their order") {
  for (int order : {2, 4, 6}) {
    double prev = 0.0;
    for (int n : {64, 128}) {
      const double h = 2 * kPi / n;
      const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0, 2 * kPi - h);
      const Eigen::VectorXd v = x.array().sin();
      const double err = (second_difference(v, h, order, GridBoundary::Periodic) + v).cwiseAbs().maxCoeff();
      const double err1 =
          (first_difference(v, h, order, GridBoundary::Periodic) - Eigen::VectorXd(x.array().cos()))
              .cwiseAbs()
              .maxCoeff();
      if (prev > 0) CHECK(std::log2(prev / err) == doctest::Approx(order).epsilon(0.05));
      prev = err;
      CHECK(err1 < 10 * err + 1e-12);
    }
  }
}

TEST_CASE("Dirichlet stencils use odd reflection and hold the ends") {
  // sin vanishes at both ends and is odd about them, so reflection is exact.
  const int n = 201;
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0, kPi);
  const double h = kPi / (n - 1);
  const Eigen::VectorXd v = x.array().sin();
  for (int order : {2, 4, 6}) {
    const Eigen::VectorXd d2 = second_difference(v, h, order);
    CHECK(d2(0) == 0.0);
    CHECK(d2(n - 1) == 0.0);
    CHECK((d2 + v).segment(1, n - 2).cwiseAbs().maxCoeff() < 1e-4);
  }
  CHECK(second_difference_radius(2) == 4.0);
  CHECK(second_difference_radius(4) == doctest::Approx(16.0 / 3.0));
  CHECK(second_difference_radius(6) == doctest::Approx(272.0 / 45.0));
}

TEST_CASE("zero data stay zero under the hyperbolic march") {
  const YGrid grid{6.0, 121};
  const GeneratorProfile zero = GeneratorProfile::gaussian(0.0);
  const FieldGrid f0 = seed_from_expansion(ladder_seed(8), 0.1, zero, 100.0, grid);
  MarchStats stats;
  const auto snaps = march_hyperbolic(f0, 50.0, {80.0, 50.0}, MarchOptions{}, &stats);
  REQUIRE(snaps.size() == 2);
  CHECK(snaps.back().rho == 50.0);
  CHECK(snaps.back().V.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.steps > 0);
}

TEST_CASE("linear march departs from a cos(phi) at the rate 1/rho") {
  // Seeded from V_2 so the data error (rho^-3) stays below the 1/rho signal.
  const YGrid grid{8.0, 401};
  const GeneratorProfile prof = GeneratorProfile::gaussian(0.5);
  MarchOptions opt;
  opt.beta = 0.0;
  const Expansion v2 = build_ladder(2, OscAlgebra{}).v(2);
  const FieldGrid f0 = seed_from_expansion(v2, 0.0, prof, 400.0, grid);
  const auto snaps = march_hyperbolic(f0, 100.0, window_schedule({200.0, 100.0}, 2 * kPi, 16), opt);
  const DiffReport r = diff_metrics(snaps, ladder_seed(8), 0, 0.0, prof, {100.0, 200.0}, 2 * kPi, {0, 0});
  REQUIRE(r.checkpoints.size() == 2);
  const double ratio = r.checkpoints[0].sup / r.checkpoints[1].sup;
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.3);
}

TEST_CASE("hyperbolic march reports leaks and step violations") {
  const GeneratorProfile wide = GeneratorProfile::gaussian(0.5, 4.0);
  const FieldGrid f0 = seed_from_expansion(ladder_seed(8), 0.1, wide, 50.0, YGrid{4.0, 81});
  CHECK(code_of([&] { (void)march_hyperbolic(f0, 40.0, {45.0}, MarchOptions{}); }) == Errc::BoundaryLeak);
  MarchOptions fixed;
  fixed.fixed_step = 10.0;
  CHECK(code_of([&] { (void)march_hyperbolic(f0, 40.0, {}, fixed); }) == Errc::CflViolation);
  CHECK(code_of([&] { (void)march_hyperbolic(f0, 0.5, {}, MarchOptions{}); }) == Errc::RhoOutOfRange);
  CHECK(code_of([] { YGrid{8.0, 5}.validate(); }) == Errc::ConfigInvalid);
}

TEST_CASE("observation schedules and difference norms") {
  const std::vector<double> s = window_schedule({10.0, 20.0}, 1.0, 4);
  REQUIRE(s.size() == 8);
  CHECK(std::is_sorted(s.rbegin(), s.rend()));
  CHECK(s.front() < 21.0);
  CHECK(s.back() == 10.0);

  const GeneratorProfile prof = GeneratorProfile::gaussian(0.5);
  const YGrid grid{8.0, 161};
  std::vector<FieldGrid> snaps;
  for (double rho : {800.0, 400.0, 200.0, 100.0}) {
    FieldGrid f = seed_from_expansion(ladder_seed(8), 0.1, prof, rho, grid);
    f.V.segment(1, grid.ny - 2).array() += 3.0 / rho;
    snaps.push_back(f);
  }
  const DiffReport r =
      diff_metrics(snaps, ladder_seed(8), 0, 0.1, prof, {100.0, 200.0, 400.0, 800.0}, 0.0, {50.0, 1000.0});
  REQUIRE(r.checkpoints.size() == 4);
  CHECK(r.checkpoints.front().at == 100.0);
  CHECK(r.checkpoints.front().sup == doctest::Approx(0.03).epsilon(1e-9));
  CHECK(r.fitted_slope == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("a difference report against the seed's own expansion starts at zero") {
  const GeneratorProfile prof = GeneratorProfile::gaussian(0.5);
  const Expansion v1 = build_ladder(1, OscAlgebra{}).v(1);
  const FieldGrid f = seed_from_expansion(v1, 0.1, prof, 300.0, YGrid{8.0, 161});
  const DiffReport r = diff_metrics({f}, v1, 1, 0.1, prof, {300.0}, 0.0, {0, 0});
  REQUIRE(r.checkpoints.size() == 1);
  CHECK(r.checkpoints[0].sup < 1e-20);
}

TEST_CASE("zero Cartesian data stay zero with zero energy") {
  const XGrid grid{60.0, 601};
  const CartesianState s = seed_cartesian_from_expansion(ladder_seed(8), 0.1, GeneratorProfile::gaussian(0.0),
                                                         50.0, grid);
  CHECK(s.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.v_t.cwiseAbs().maxCoeff() == 0.0);
  CHECK(energy(s, 0.1) == 0.0);
  CartesianOptions opt;
  opt.dt = 0.05;
  CartesianState last;
  (void)solve_cartesian(s, 40.0, {40.0}, opt, [&](const CartesianState& c) { last = c; });
  CHECK(last.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(energy(last, 0.1) == 0.0);
}

TEST_CASE("periodic single mode matches the exact linear solution") {
  const double L = 10.0;
  const double kappa = 3 * kPi / L;
  const double omega = std::sqrt(1 + kappa * kappa);
  const XGrid grid{L, 200, GridBoundary::Periodic};
  CartesianState s;
  s.t = 0.0;
  s.xs = grid.points();
  s.v = (kappa * s.xs.array()).cos();
  s.v_t = Eigen::VectorXd::Zero(s.xs.size());
  CartesianOptions opt;
  opt.beta = 0.0;
  opt.boundary = GridBoundary::Periodic;
  opt.dt = 0.02;
  CartesianState last;
  const CartesianStats st = solve_cartesian(s, 5.0, {5.0}, opt, [&](const CartesianState& c) { last = c; });
  REQUIRE(last.t == 5.0);
  // The discrete dispersion relation differs from omega at order dx^6.
  const Eigen::VectorXd exact = std::cos(omega * 5.0) * (kappa * s.xs.array()).cos();
  CHECK((last.v - exact).cwiseAbs().maxCoeff() < 1e-6);
  // Bounded energy error of size (omega dt)^4 ~ 6e-7 times a small constant.
  CHECK(st.max_relative_drift < 1e-7);
}

TEST_CASE("energy of a constant periodic state") {
  const XGrid grid{5.0, 100, GridBoundary::Periodic};
  CartesianState s;
  s.xs = grid.points();
  s.v = Eigen::VectorXd::Constant(100, 0.3);
  s.v_t = Eigen::VectorXd::Zero(100);
  const double len = 10.0;
  CHECK(energy(s, 0.0, 6, GridBoundary::Periodic) == doctest::Approx(0.5 * 0.09 * len));
  CHECK(energy(s, 0.1, 6, GridBoundary::Periodic) ==
        doctest::Approx(0.5 * 0.09 * len + 0.025 * 0.0081 * len));
}

TEST_CASE("Cartesian steps are reversible and conserve energy") {
  const XGrid grid{20.0, 801, GridBoundary::Dirichlet};
  CartesianState s;
  s.t = 0.0;
  s.xs = grid.points();
  s.v = (-s.xs.array().square()).exp();
  s.v_t = Eigen::VectorXd::Zero(s.xs.size());
  CartesianOptions opt;
  opt.dt = 0.01;
  CartesianState fwd;
  const CartesianStats st = solve_cartesian(s, 4.0, {4.0}, opt, [&](const CartesianState& c) { fwd = c; });
  CHECK(st.max_relative_drift < 1e-8);
  CartesianState back;
  (void)solve_cartesian(fwd, 0.0, {0.0}, opt, [&](const CartesianState& c) { back = c; });
  CHECK(back.t == 0.0);
  CHECK((back.v - s.v).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("Cartesian solver enforces its step limits and the light cone") {
  const XGrid grid{20.0, 201};
  CartesianState s;
  s.t = 10.0;
  s.xs = grid.points();
  s.v = Eigen::VectorXd::Zero(s.xs.size());
  s.v_t = s.v;
  CartesianOptions opt;
  opt.dt = 0.3;
  auto none = [](const CartesianState&) {};
  CHECK(code_of([&] { (void)solve_cartesian(s, 11.0, {}, opt, none); }) == Errc::CflViolation);
  opt.dt = 0.15;  // below dx = 0.2 but above the stability limit
  CHECK(opt.dt > cartesian_dt_limit(0.2, 6));
  CHECK(code_of([&] { (void)solve_cartesian(s, 11.0, {}, opt, none); }) == Errc::CflViolation);
  opt.dt = 0.05;
  s.v = (-(s.xs.array() - 15.0).square()).exp() + (-s.xs.array().square()).exp();
  opt.light_cone_floor = 1e-6;
  CHECK(code_of([&] { (void)solve_cartesian(s, 11.0, {10.5}, opt, none); }) == Errc::BoundaryLeak);
}

TEST_CASE("checkpoints round trip and reject damage") {
  const std::string fpath = temp_path("field.ckpt");
  FieldGrid f;
  f.rho = 123.5;
  f.ys = Eigen::VectorXd::LinSpaced(11, -2, 2);
  f.V = Eigen::VectorXd::Random(11);
  f.V_rho = Eigen::VectorXd::Random(11);
  write_checkpoint(fpath, f);
  const CheckpointHeader h = read_checkpoint_header(fpath);
  CHECK(h.variable == MarchVariable::Rho);
  CHECK(h.points == 11);
  const FieldGrid g = read_field_checkpoint(fpath);
  CHECK(g.rho == f.rho);
  CHECK(g.ys == f.ys);
  CHECK(g.V == f.V);
  CHECK(g.V_rho == f.V_rho);

  const std::string cpath = temp_path("cart.ckpt");
  CartesianState s;
  s.t = 7.25;
  s.xs = Eigen::VectorXd::LinSpaced(9, -1, 1);
  s.v = Eigen::VectorXd::Random(9);
  s.v_t = Eigen::VectorXd::Random(9);
  write_checkpoint(cpath, s);
  const CartesianState c = read_cartesian_checkpoint(cpath);
  CHECK(c.t == s.t);
  CHECK(c.xs == s.xs);
  CHECK(c.v == s.v);
  CHECK(c.v_t == s.v_t);
  CHECK(code_of([&] { (void)read_field_checkpoint(cpath); }) == Errc::IoError);
  CHECK(code_of([&] { (void)read_cartesian_checkpoint(temp_path("missing.ckpt")); }) == Errc::IoError);

  std::filesystem::resize_file(fpath, std::filesystem::file_size(fpath) - 8);
  CHECK(code_of([&] { (void)read_field_checkpoint(fpath); }) == Errc::IoError);
  {
    std::fstream out(fpath, std::ios::in | std::ios::out | std::ios::binary);
    out.write("XXXX", 4);
  }
  CHECK(code_of([&] { (void)read_checkpoint_header(fpath); }) == Errc::IoError);
  std::filesystem::remove(fpath);
  std::filesystem::remove(cpath);
}
