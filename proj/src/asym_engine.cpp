#include "kgscat/asym_engine.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include "kgscat/error.hpp"

namespace kgscat {

Expansion invert_nonresonant(const TermKey& key, const CoeffPoly& coeff, int j_max) {
  if (key.n == 1) {
    throw Error(Errc::ResonantInput, "harmonic n = 1 cannot be divided out at " + to_string(key));
  }
  const Rational factor = frac(1, 1 - key.n * key.n);
  return Expansion::term(key, factor * coeff, j_max);
}

Expansion eliminate_resonant(const CoeffPoly& c_cos, const CoeffPoly& c_sin, int k, int i,
                             const OscAlgebra& alg) {
  if (k == 0) throw Error(Errc::OrderZero, "resonant elimination needs k >= 1");
  const Rational inv_2k = frac(1, 2 * k);
  const CoeffPoly alpha = inv_2k * c_sin;
  const CoeffPoly gamma = inv_2k * (Rational(4) * (alg.delta() * alpha) - c_cos);
  Expansion x(alg.j_max);
  x.add({k, i, 1, Parity::Cos}, alpha);
  x.add({k, i, 1, Parity::Sin}, gamma);
  return x;
}

namespace {

void require_nonresonant_class(const Expansion& sigma, int k) {
  for (const auto& [key, c] : sigma.terms()) {
    if (key.j < k) {
      throw Error(Errc::NotNonresonant,
                  "input has a term of order " + std::to_string(key.j) + " below " + std::to_string(k));
    }
    if (key.j > k) break;
    if (key.n == 1) {
      throw Error(Errc::NotNonresonant, "input is resonant at its lowest order: " + to_string(key));
    }
  }
}

}  // namespace

InversionCertificate invert_L0(const Expansion& sigma, int k, const OscAlgebra& alg,
                               int through_order) {
  if (k < 1) throw Error(Errc::OrderZero, "L0 inversion needs k >= 1");
  require_nonresonant_class(sigma, k);
  const int j_max = sigma.j_max();
  const int last = through_order < 0 ? j_max : std::min(through_order, j_max);
  const int guard = (j_max - k + 1) * (alg.i_max + 1);

  InversionCertificate cert;
  cert.input_class = k;
  cert.exact_up_to = j_max;
  cert.output = Expansion(j_max);
  // Running value of L0(output) - sigma.
  Expansion rem = -sigma;

  auto absorb = [&](const Expansion& x) {
    cert.output += x;
    rem += apply_L0(x, alg);
    if (++cert.passes > guard) {
      throw Error(Errc::NonTermination,
                  "elimination exceeded " + std::to_string(guard) + " passes");
    }
  };

  for (int j = k; j <= last; ++j) {
    Expansion x(j_max);
    for (const auto& [key, c] : rem.terms()) {
      if (key.j < j) continue;
      if (key.j > j) break;
      if (key.n == 1) {
        throw Error(Errc::NotNonresonant,
                    "resonant term survived at order " + std::to_string(j) + ": " + to_string(key));
      }
      x += invert_nonresonant(key, -c, j_max);
    }
    if (!x.empty()) absorb(x);
    if (j + 1 > j_max) break;

    while (true) {
      int top = -1;
      for (const auto& [key, c] : rem.terms()) {
        if (key.j == j + 1 && key.n == 1) top = std::max(top, key.i);
      }
      if (top < 0) break;
      const CoeffPoly c_cos = rem.coefficient({j + 1, top, 1, Parity::Cos});
      const CoeffPoly c_sin = rem.coefficient({j + 1, top, 1, Parity::Sin});
      absorb(eliminate_resonant(-c_cos, -c_sin, j, top, alg));
    }
  }
  cert.remainder = std::move(rem);
  return cert;
}

Expansion ladder_seed(int j_max) {
  return Expansion::term(0, 0, 1, Parity::Cos, CoeffPoly::generator(Generator::A), j_max);
}

Expansion profile_g1(int j_max) {
  Expansion g = ladder_seed(j_max);
  g.add({1, 0, 3, Parity::Cos}, frac(1, 12) * (CoeffPoly::delta() * CoeffPoly::generator(Generator::A)));
  return g;
}

namespace {

LadderLevel certify(int k, Expansion v, const OscAlgebra& alg, GeneratorMode mode) {
  LadderLevel level;
  level.k = k;
  level.residual = apply_Psi(v, alg);
  if (mode == GeneratorMode::Constant) level.residual = freeze_generators(level.residual);
  level.v = std::move(v);
  level.residual_class = classify(level.residual);
  const auto& rc = level.residual_class;
  if (rc.in_Sk_for != k + 1 || !rc.is_nonresonant_class) {
    std::ostringstream os;
    os << "Psi(V_" << k << ") classified at order " << rc.in_Sk_for
       << (rc.resonant_at_lowest ? " (resonant)" : " (nonresonant)") << ", expected order " << k + 1
       << " nonresonant\n--- residual ---\n"
       << to_string(level.residual);
    throw Error(Errc::ClassificationFailure, os.str());
  }
  return level;
}

}  // namespace

ExpansionLadder build_ladder(int K, const OscAlgebra& alg, GeneratorMode mode) {
  if (K < 0) throw Error(Errc::ConfigInvalid, "ladder order must be non-negative");
  ExpansionLadder ladder;
  ladder.levels.push_back(certify(0, ladder_seed(alg.j_max), alg, mode));
  for (int k = 1; k <= K; ++k) {
    const LadderLevel& prev = ladder.levels.back();
    // Psi'(V_{k-1}) differs from L0 - rho^{-2} d_y^2 only at order >= k + 2,
    // and the y-derivative term itself sits at order >= k + 2.
    InversionCertificate cert = invert_L0(prev.residual, k, alg, k);
    Expansion correction = -cert.output;
    if (mode == GeneratorMode::Constant) correction = freeze_generators(correction);
    MembershipVerdict cc = classify(correction);
    if (cc.in_Sk_for < k) {
      throw Error(Errc::ClassificationFailure,
                  "V_" + std::to_string(k) + " - V_" + std::to_string(k - 1) + " has order " +
                      std::to_string(cc.in_Sk_for));
    }
    LadderLevel level = certify(k, prev.v + correction, alg, mode);
    level.correction_class = cc;
    level.passes = cert.passes;
    ladder.levels.push_back(std::move(level));
  }
  return ladder;
}

const Expansion& constant_ladder(int K) {
  static std::mutex mutex;
  static std::map<int, Expansion> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(K);
  if (it == cache.end()) {
    it = cache.emplace(K, build_ladder(K, OscAlgebra{}, GeneratorMode::Constant).v(K)).first;
  }
  return it->second;
}

std::string ladder_summary(const ExpansionLadder& ladder) {
  std::ostringstream os;
  os << "k,residual_min_order,resonant,v_terms,residual_terms,max_log_power,max_harmonic,"
        "max_deriv_order,passes\n";
  for (const auto& level : ladder.levels) {
    os << level.k << ',' << level.residual_class.in_Sk_for << ','
       << (level.residual_class.resonant_at_lowest ? 1 : 0) << ',' << level.v.size() << ','
       << level.residual.size() << ',' << level.v.max_log_power() << ','
       << level.v.max_harmonic() << ',' << level.v.max_deriv_order() << ',' << level.passes
       << '\n';
  }
  return os.str();
}

}  // namespace kgscat
