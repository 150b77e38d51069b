#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kgscat/error.hpp"
#include "kgscat/osc_algebra.hpp"
#include "support.hpp"

using namespace kgscat;

namespace {

const CoeffPoly A = CoeffPoly::generator(Generator::A);

Eigen::VectorXd ys_probe() { return Eigen::VectorXd::LinSpaced(9, -2.0, 2.0); }

Eigen::VectorXd value(const Expansion& u, double rho, const Eigen::VectorXd& ys) {
  return eval_expansion(u, OscAlgebra{}, testing::wavy_profile(), rho, ys);
}

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("add normalizes harmonics and truncates past j_max") {
  Expansion e(3);
  e.add({1, 0, -2, Parity::Sin}, A);
  e.add({1, 0, -2, Parity::Cos}, A);
  e.add({0, 0, 0, Parity::Sin}, A);
  CHECK(e.coefficient({1, 0, 2, Parity::Sin}) == -A);
  CHECK(e.coefficient({1, 0, 2, Parity::Cos}) == A);
  CHECK(e.size() == 2);
  CHECK_FALSE(e.truncated());
  e.add({4, 0, 1, Parity::Cos}, A);
  CHECK(e.size() == 2);
  CHECK(e.truncated());
}

TEST_CASE("to_string sorts by order, log power, harmonic and parity") {
  Expansion e;
  e.add({2, 1, 3, Parity::Sin}, A);
  e.add({0, 0, 1, Parity::Cos}, A);
  e.add({2, 0, 3, Parity::Sin}, frac(-1, 2) * A);
  CHECK(to_string(e) ==
        "[j=0][i=0][n=1][cos] 1 b^0 a\n[j=2][i=0][n=3][sin] -1/2 b^0 a\n[j=2][i=1][n=3][sin] 1 b^0 a\n");
}

TEST_CASE("integer and rational products agree exactly") {
  const OscAlgebra alg;
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const Expansion u = testing::random_expansion(rng, 0, 4, 5, false);
    const Expansion v = testing::random_expansion(rng, 0, 4, 5, false);
    const Expansion fast = exp_mul(u, v, alg);
    CHECK(fast == exp_mul_rational(u, v, alg));
    CHECK(fast == exp_mul(v, u, alg));
  }
}

TEST_CASE("products with huge coefficients fall back to rationals") {
  const OscAlgebra alg;
  mpz_class big = 1;
  big <<= 140;
  const Expansion u = Expansion::term(0, 0, 1, Parity::Cos, Rational(big) * A);
  const Expansion v = Expansion::term(1, 1, 2, Parity::Sin, frac(1, 3) * A);
  const Expansion w = exp_mul(u, v, alg);
  CHECK(w == exp_mul_rational(u, v, alg));
  Rational sixth(big, 6);
  sixth.canonicalize();
  // cos(phi) sin(2 phi) = (sin(3 phi) + sin(phi)) / 2
  CHECK(w.coefficient({1, 1, 3, Parity::Sin}) == sixth * A * A);
  CHECK(w.coefficient({1, 1, 1, Parity::Sin}) == sixth * A * A);
}

TEST_CASE("products match pointwise multiplication") {
  const OscAlgebra alg;
  std::mt19937 rng(7);
  const Eigen::VectorXd ys = ys_probe();
  for (int trial = 0; trial < 10; ++trial) {
    const Expansion u = testing::random_expansion(rng, 0, 3, 4, false);
    const Expansion v = testing::random_expansion(rng, 0, 3, 4, false);
    const Eigen::VectorXd want = value(u, 6.5, ys).cwiseProduct(value(v, 6.5, ys));
    CHECK(rel_err(value(exp_mul(u, v, alg), 6.5, ys), want) < 1e-12);
  }
}

TEST_CASE("rho and y derivatives match finite differences") {
  const OscAlgebra alg;
  std::mt19937 rng(19);
  const Eigen::VectorXd ys = ys_probe();
  const double rho = 5.0;
  const double h = 1e-4;
  for (int trial = 0; trial < 10; ++trial) {
    const Expansion u = testing::random_expansion(rng, 0, 3, 4, false);
    const Eigen::VectorXd fd_rho = (value(u, rho + h, ys) - value(u, rho - h, ys)) / (2 * h);
    CHECK(rel_err(value(exp_drho(u, alg), rho, ys), fd_rho) < 1e-7);
    const Eigen::VectorXd dy = Eigen::VectorXd::Constant(ys.size(), h);
    const Eigen::VectorXd fd_y = (value(u, rho, ys + dy) - value(u, rho, ys - dy)) / (2 * h);
    CHECK(rel_err(value(exp_dy(u, alg), rho, ys), fd_y) < 1e-7);
    CHECK(exp_dy2(u, alg) == exp_dy(exp_dy(u, alg), alg));
  }
}

TEST_CASE("Psi matches a finite-difference evaluation of its definition") {
  const OscAlgebra alg;
  const double beta = alg.ring.beta.get_d();
  std::mt19937 rng(3);
  const Eigen::VectorXd ys = ys_probe();
  const double rho = 4.0;
  const double h = 1e-3;
  const Eigen::VectorXd dy = Eigen::VectorXd::Constant(ys.size(), h);
  for (int trial = 0; trial < 5; ++trial) {
    const Expansion v = testing::ladder_seed_plus(rng);
    const Eigen::VectorXd V = value(v, rho, ys);
    const Eigen::VectorXd v_rr = (value(v, rho + h, ys) - 2 * V + value(v, rho - h, ys)) / (h * h);
    const Eigen::VectorXd v_yy = (value(v, rho, ys + dy) - 2 * V + value(v, rho, ys - dy)) / (h * h);
    const Eigen::ArrayXd Va = V.array();
    const Eigen::VectorXd want =
        (v_rr.array() + (1 + beta * Va.square() / rho + 1 / (4 * rho * rho)) * Va - v_yy.array() / (rho * rho))
            .matrix();
    CHECK(rel_err(value(apply_Psi(v, alg), rho, ys), want) < 1e-5);
  }
}

TEST_CASE("Psi is cubic: the Taylor remainder is exact") {
  const OscAlgebra alg;
  std::mt19937 rng(41);
  const CoeffPoly beta = CoeffPoly::beta(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Expansion v = testing::random_expansion(rng, 0, 2, 3, false);
    const Expansion w = testing::random_expansion(rng, 1, 3, 3, false);
    const Expansion lhs = apply_Psi(v + w, alg) - apply_Psi(v, alg) - apply_Psi_prime(v, w, alg);
    const Expansion w2 = exp_mul(w, w, alg);
    const Expansion rhs =
        exp_shift(exp_scale(Rational(3) * exp_mul(v, w2, alg) + exp_mul(w, w2, alg), beta), 1);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("L0 is the linearization at a cos(phi) without y-derivatives") {
  const OscAlgebra alg;
  std::mt19937 rng(8);
  const Expansion v0 = Expansion::term(0, 0, 1, Parity::Cos, A);
  for (int trial = 0; trial < 10; ++trial) {
    const Expansion w = testing::random_expansion(rng, 1, 3, 4, false);
    const Expansion diff = apply_Psi_prime(v0, w, alg) - apply_L0(w, alg);
    CHECK(diff == -exp_shift(exp_dy2(w, alg), 2));
  }
}

TEST_CASE("classify reports the order and resonance at the lowest order") {
  Expansion e;
  e.add({2, 0, 3, Parity::Cos}, A);
  e.add({3, 1, 1, Parity::Sin}, A);
  MembershipVerdict v = classify(e);
  CHECK(v.in_Sk_for == 2);
  CHECK_FALSE(v.resonant_at_lowest);
  CHECK(v.is_nonresonant_class);
  e.add({2, 1, 1, Parity::Cos}, A);
  v = classify(e);
  CHECK(v.resonant_at_lowest);
  CHECK_FALSE(v.is_nonresonant_class);
  const MembershipVerdict empty = classify(Expansion(8));
  CHECK(empty.empty);
  CHECK(empty.in_Sk_for == 9);
  Expansion bad;
  bad.add({1, 0, 0, Parity::Cos}, CoeffPoly::constant(Rational(1)));
  try {
    (void)classify(bad);
    FAIL("expected DegreeZeroCoefficient");
  } catch (const Error& e2) {
    CHECK(e2.code() == Errc::DegreeZeroCoefficient);
  }
}

TEST_CASE("evaluation rejects rho below one and agrees across entry points") {
  const OscAlgebra alg;
  const Expansion v = Expansion::term(1, 1, 3, Parity::Sin, CoeffPoly::delta() * A);
  const Eigen::VectorXd ys = ys_probe();
  try {
    (void)eval_expansion(v, alg, testing::wavy_profile(), 0.5, ys);
    FAIL("expected RhoOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RhoOutOfRange);
  }
  const ExpansionEvaluator ev(v, alg, testing::wavy_profile(), ys);
  const Eigen::VectorXd rhos = Eigen::VectorXd::Constant(ys.size(), 12.5);
  CHECK((ev.at(rhos) - ev(12.5)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((ev(12.5) - value(v, 12.5, ys)).cwiseAbs().maxCoeff() < 1e-15);
}
