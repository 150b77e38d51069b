#pragma once

// Oscillatory term algebra.
//
// An Expansion is a finite sum  sum c(y) trig(n phi) ln^i(rho) / rho^j  with a
// single shared phase phi = rho + delta(y) ln rho + b(y), delta = (3/8) beta a^2.
// Coefficients are exact CoeffPolys. Orders past j_max are dropped and the
// expansion remembers that it was truncated.

#include <compare>
#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Core>

#include "kgscat/coeff_ring.hpp"
#include "kgscat/generator_profile.hpp"

namespace kgscat {

enum class Parity : std::uint8_t { Cos = 0, Sin = 1 };

struct TermKey {
  int j = 0;  // power of 1/rho
  int i = 0;  // power of ln rho
  int n = 0;  // harmonic
  Parity parity = Parity::Cos;

  auto operator<=>(const TermKey&) const = default;
};

/// Ring data plus the truncation caps of one symbolic computation.
struct OscAlgebra {
  CoeffRing ring;
  int j_max = 8;
  int i_max = 16;

  const CoeffPoly& delta() const;
  const CoeffPoly& delta_dy() const;
};

class Expansion {
 public:
  explicit Expansion(int j_max = 8) : j_max_(j_max) {}

  static Expansion term(const TermKey& key, const CoeffPoly& coeff, int j_max = 8);
  /// c * trig(n phi) ln^i rho / rho^j.
  static Expansion term(int j, int i, int n, Parity parity, const CoeffPoly& coeff, int j_max = 8);

  int j_max() const { return j_max_; }
  bool truncated() const { return truncated_; }
  void mark_truncated() { truncated_ = true; }

  const std::map<TermKey, CoeffPoly>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Adds c * trig(n phi) ln^i / rho^j with normalization: negative harmonics
  /// absorb their sign, sin(0) terms vanish, orders past j_max are dropped.
  void add(TermKey key, const CoeffPoly& coeff);

  /// Coefficient at key (zero polynomial when absent).
  CoeffPoly coefficient(const TermKey& key) const;

  int min_order() const;
  int max_order() const;
  int max_log_power() const;
  int max_harmonic() const;
  int max_deriv_order() const;

  /// Equality of the represented sums; the truncation flag is ignored.
  bool operator==(const Expansion& other) const { return terms_ == other.terms_; }

  Expansion& operator+=(const Expansion& other);
  Expansion& operator-=(const Expansion& other);

 private:
  friend class TermAccumulator;
  std::map<TermKey, CoeffPoly> terms_;
  int j_max_ = 8;
  bool truncated_ = false;
};

Expansion operator+(const Expansion& u, const Expansion& v);
Expansion operator-(const Expansion& u, const Expansion& v);
Expansion operator-(const Expansion& u);
Expansion operator*(const Rational& s, const Expansion& u);

inline Expansion exp_add(const Expansion& u, const Expansion& v) { return u + v; }

/// Multiplies every coefficient by a polynomial.
Expansion exp_scale(const Expansion& u, const CoeffPoly& c);
/// Multiplies by rho^{-shift}.
Expansion exp_shift(const Expansion& u, int shift);
/// Multiplies every coefficient by beta^power.
Expansion exp_times_beta(const Expansion& u, int power = 1);

/// Product with trig products expanded to sums of harmonics.
Expansion exp_mul(const Expansion& u, const Expansion& v, const OscAlgebra& alg);
/// The same product on the plain rational path (no 128-bit integer shortcut).
Expansion exp_mul_rational(const Expansion& u, const Expansion& v, const OscAlgebra& alg);

/// Exact d/drho using phi_rho = 1 + delta / rho.
Expansion exp_drho(const Expansion& u, const OscAlgebra& alg);
/// Exact d/dy using phi_y = delta' ln rho + b'.
Expansion exp_dy(const Expansion& u, const OscAlgebra& alg);
Expansion exp_dy2(const Expansion& u, const OscAlgebra& alg);

/// Psi(V) = V_rhorho + (1 + beta V^2 / rho + 1 / (4 rho^2)) V - rho^{-2} V_yy.
Expansion apply_Psi(const Expansion& v, const OscAlgebra& alg);

/// Linearization of Psi at V: W_rhorho + (1 + 3 beta V^2/rho + 1/(4 rho^2)) W - rho^{-2} W_yy.
Expansion apply_Psi_prime(const Expansion& v, const Expansion& w, const OscAlgebra& alg);

/// Linearization of the profile operator at a cos(phi):
/// g_rhorho + (1 + 1/(4 rho^2) + 8 delta cos^2(phi) / rho) g.
Expansion apply_L0(const Expansion& g, const OscAlgebra& alg);

/// Sets a^{(k)} = b^{(k)} = 0 for k >= 1 in every coefficient.
Expansion freeze_generators(const Expansion& u);

struct MembershipVerdict {
  /// Largest k with every term of order j >= k; j_max + 1 for an empty
  /// expansion.
  int in_Sk_for = 0;
  bool resonant_at_lowest = false;
  bool is_nonresonant_class = true;
  bool empty = false;
};

/// Class membership. Throws DegreeZeroCoefficient on a monomial without any
/// generator factor.
MembershipVerdict classify(const Expansion& u);

/// One line per term: "[j=2][i=1][n=3][cos] <coeffpoly>", sorted by (j, i, n, parity).
std::string to_string(const Expansion& u);
std::string to_string(const TermKey& key);

/// Samples an expansion on a fixed y-grid; coefficient arrays are built once.
class ExpansionEvaluator {
 public:
  ExpansionEvaluator(const Expansion& u, const OscAlgebra& alg, const GeneratorProfile& profile,
                     const Eigen::VectorXd& ys);

  /// Value on the y-grid at rho (rho >= 1).
  Eigen::VectorXd operator()(double rho) const;
  /// Value at the points (rhos(i), ys(i)), one rho per grid point.
  Eigen::VectorXd at(const Eigen::VectorXd& rhos) const;

  const Eigen::VectorXd& ys() const { return ys_; }
  const Eigen::VectorXd& delta() const { return delta_; }
  const Eigen::VectorXd& b() const { return b_; }

 private:
  struct Term {
    TermKey key;
    Eigen::ArrayXd coeff;
  };
  Eigen::VectorXd ys_;
  Eigen::VectorXd delta_;
  Eigen::VectorXd b_;
  std::vector<Term> terms_;
  int max_n_ = 0;
};

/// Pointwise evaluation at one rho; RhoOutOfRange when rho < 1.
Eigen::VectorXd eval_expansion(const Expansion& u, const OscAlgebra& alg,
                               const GeneratorProfile& profile, double rho,
                               const Eigen::VectorXd& ys);

}  // namespace kgscat
