#pragma once

// Construction of the asymptotic ladder V_0, V_1, ... with Psi(V_k) free of
// resonant terms at its lowest order k + 1.

#include <string>
#include <vector>

#include "kgscat/osc_algebra.hpp"

namespace kgscat {

/// L0 Sigma = input + remainder, exactly through j_max.
struct InversionCertificate {
  int input_class = 1;
  Expansion output;
  Expansion remainder;
  int passes = 0;
  int exact_up_to = 8;
};

/// Inverts a single term with harmonic n != 1: returns term / (1 - n^2).
/// Throws ResonantInput for n = 1.
Expansion invert_nonresonant(const TermKey& key, const CoeffPoly& coeff, int j_max);

/// X = alpha cos(phi) ln^i / rho^k + gamma sin(phi) ln^i / rho^k whose L0
/// image carries c_cos cos(phi) + c_sin sin(phi) at order k + 1, log power i.
/// Solves 2k alpha = c_sin, 4 delta alpha - 2k gamma = c_cos. Throws OrderZero
/// for k = 0.
Expansion eliminate_resonant(const CoeffPoly& c_cos, const CoeffPoly& c_sin, int k, int i,
                             const OscAlgebra& alg);

/// Sweeps orders j = k .. through_order: nonresonant terms at order j are
/// divided out, then the resonant terms at order j + 1 are removed from the
/// highest log power down. through_order < 0 means j_max. Throws
/// NotNonresonant when sigma has terms below order k or resonant terms at
/// order k.
InversionCertificate invert_L0(const Expansion& sigma, int k, const OscAlgebra& alg,
                               int through_order = -1);

struct LadderLevel {
  int k = 0;
  Expansion v;
  Expansion residual;  // Psi(v), recomputed from scratch
  MembershipVerdict residual_class;
  MembershipVerdict correction_class;  // of V_k - V_{k-1}
  int passes = 0;
};

struct ExpansionLadder {
  std::vector<LadderLevel> levels;

  const Expansion& v(int k) const { return levels.at(k).v; }
  const Expansion& residual(int k) const { return levels.at(k).residual; }
};

/// V_0 = a cos(phi).
Expansion ladder_seed(int j_max);

/// g_1 = a cos(phi) + (delta / 12) a cos(3 phi) / rho, the two-term profile.
Expansion profile_g1(int j_max = 8);

enum class GeneratorMode {
  General,   // a(y), b(y) arbitrary
  Constant,  // a, b constant: every y-derivative vanishes (profile ODE setting)
};

/// Builds V_0 .. V_K. Each residual is verified to sit exactly at order k + 1
/// with no resonant term there; otherwise ClassificationFailure.
ExpansionLadder build_ladder(int K, const OscAlgebra& alg,
                             GeneratorMode mode = GeneratorMode::General);

/// Cached V_K for constant generators with default caps. The expansion does
/// not depend on the numeric value of beta.
const Expansion& constant_ladder(int K);

/// Certification table rows (k, min order, resonance flag, term count, ...).
std::string ladder_summary(const ExpansionLadder& ladder);

}  // namespace kgscat
