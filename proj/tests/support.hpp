#pragma once

// Shared fixtures for the test binaries: seeded random differential
// polynomials and expansions, and a profile with nontrivial a(y) and b(y).

#include <random>

#include "kgscat/asym_engine.hpp"
#include "kgscat/osc_algebra.hpp"

namespace kgscat::testing {

inline GeneratorProfile wavy_profile() {
  GeneratorProfile p;
  p.a = {ProfileFamily::Gaussian, 0.5, 1.0, 0.0, 0.0};
  p.b = {ProfileFamily::Sech, 0.3, 1.5, 0.2, 0.0};
  p.b0 = 0.1;
  return p;
}

/// Monomials q beta^p g_1 ... g_m with 1 <= m <= max_factors, each g drawn
/// from a, a', a'', b', b''.
inline CoeffPoly random_coeff(std::mt19937& rng, int max_monomials = 3, int max_factors = 3) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 7), beta(0, 2), count(1, max_monomials),
      factors(1, max_factors), pick(0, 4);
  const GenDeriv menu[5] = {{Generator::A, 0}, {Generator::A, 1}, {Generator::A, 2},
                            {Generator::B, 1}, {Generator::B, 2}};
  std::vector<Monomial> ms;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    int q = 0;
    while (q == 0) q = num(rng);
    FactorList f;
    const int m = factors(rng);
    for (int r = 0; r < m; ++r) f.push_back(menu[pick(rng)]);
    ms.emplace_back(frac(q, den(rng)), beta(rng), f);
  }
  CoeffPoly p = CoeffPoly::from_monomials(std::move(ms));
  return p.is_zero() ? CoeffPoly::generator(Generator::A) : p;
}

/// Terms at orders lo .. hi with log powers up to 2 and harmonics up to 5.
/// With nonresonant_at_lo, no n = 1 term sits at order lo.
inline Expansion random_expansion(std::mt19937& rng, int lo, int hi, int max_terms, bool nonresonant_at_lo,
                                  int j_max = 8) {
  std::uniform_int_distribution<int> count(1, max_terms), order(lo, hi), logs(0, 2), harm(0, 5), par(0, 1);
  Expansion e(j_max);
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    TermKey key{order(rng), logs(rng), harm(rng), par(rng) ? Parity::Sin : Parity::Cos};
    if (key.n == 0) key.parity = Parity::Cos;
    if (nonresonant_at_lo && key.j == lo && key.n == 1) key.n = 3;
    e.add(key, random_coeff(rng));
  }
  if (e.empty()) e.add({hi, 0, 2, Parity::Cos}, CoeffPoly::generator(Generator::A));
  return e;
}

/// An element of the nonresonant class k: lowest order k, no resonance there.
inline Expansion random_nonresonant(std::mt19937& rng, int k, int j_max = 8) {
  return random_expansion(rng, k, std::min(k + 2, j_max), 4, true, j_max);
}

/// a cos(phi) plus random corrections at orders 1 .. 3.
inline Expansion ladder_seed_plus(std::mt19937& rng) {
  return ladder_seed(8) + random_expansion(rng, 1, 3, 3, false);
}

/// The five displayed terms of Psi(a cos phi), built by hand:
/// -delta^2 a cos / rho^2 + delta a sin / rho^2 + (2 delta / 3) a cos 3phi / rho
/// + a cos / (4 rho^2) - rho^{-2} d_y^2 (a cos phi), with
/// d_y^2 (a cos) = (a'' - a phi_y^2) cos - (2 a' phi_y + a phi_yy) sin,
/// phi_y = delta' ln rho + b', phi_yy = delta'' ln rho + b''.
inline Expansion psi_of_seed_by_hand() {
  const CoeffPoly a = CoeffPoly::generator(Generator::A);
  const CoeffPoly a1 = CoeffPoly::generator(Generator::A, 1);
  const CoeffPoly a2 = CoeffPoly::generator(Generator::A, 2);
  const CoeffPoly b1 = CoeffPoly::generator(Generator::B, 1);
  const CoeffPoly b2 = CoeffPoly::generator(Generator::B, 2);
  const CoeffPoly beta = CoeffPoly::beta(1);
  const CoeffPoly d = frac(3, 8) * beta * a * a;
  const CoeffPoly d1 = frac(3, 4) * beta * a * a1;
  const CoeffPoly d2 = frac(3, 4) * beta * (a1 * a1 + a * a2);
  Expansion e;
  auto put = [&](int j, int i, int n, Parity par, const CoeffPoly& c) {
    Expansion t;
    t.add({j, i, n, par}, c);
    e += t;
  };
  put(2, 0, 1, Parity::Cos, -(d * d * a));
  put(2, 0, 1, Parity::Sin, d * a);
  put(1, 0, 3, Parity::Cos, frac(2, 3) * d * a);
  put(2, 0, 1, Parity::Cos, frac(1, 4) * a);
  // phi_y^2 = d1^2 ln^2 + 2 d1 b1 ln + b1^2
  put(2, 0, 1, Parity::Cos, -(a2 - a * b1 * b1));
  put(2, 1, 1, Parity::Cos, Rational(2) * a * d1 * b1);
  put(2, 2, 1, Parity::Cos, a * d1 * d1);
  put(2, 0, 1, Parity::Sin, Rational(2) * a1 * b1 + a * b2);
  put(2, 1, 1, Parity::Sin, Rational(2) * a1 * d1 + a * d2);
  return e;
}

}  // namespace kgscat::testing
