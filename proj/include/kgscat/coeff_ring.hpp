#pragma once

// Exact differential polynomials in the scattering generators a(y), b(y).
//
// A CoeffPoly is a finite sum of monomials  q * beta^p * prod_k g_k^{(m_k)}
// with q rational, beta kept symbolic through its power p, and each factor a
// y-derivative of one of the two generators. The numeric value of beta lives
// in the CoeffRing and is only used when a polynomial is evaluated.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>
#include <gmpxx.h>

#include <Eigen/Core>

namespace kgscat {

using Rational = mpq_class;

/// num / den in canonical form (mpq_class(num, den) does not reduce or fix
/// the sign of the denominator).
inline Rational frac(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

enum class Generator : std::uint8_t { A = 0, B = 1 };

/// Highest generator derivative a monomial key can hold.
inline constexpr int kMaxDerivSlots = 8;

struct GenDeriv {
  Generator generator = Generator::A;
  std::uint8_t order = 0;

  auto operator<=>(const GenDeriv&) const = default;
};

using FactorList = boost::container::small_vector<GenDeriv, 8>;

/// Exponent vector of a monomial packed into byte lanes: lane 0 holds the beta
/// power, lanes 1 + k and 10 + k the exponents of a^{(k)} and b^{(k)}.
/// Products add lane-wise; word order makes comparison beta-first.
struct MonoKey {
  std::array<std::uint64_t, 3> words{};

  static constexpr int kBetaLane = 0;
  static constexpr int lane(Generator g, int order) {
    return (g == Generator::A ? 1 : 10) + order;
  }

  int get(int lane) const {
    return static_cast<int>((words[lane / 8] >> shift(lane)) & 0xFFu);
  }
  void set(int lane, int value) {
    auto& w = words[lane / 8];
    w &= ~(std::uint64_t{0xFF} << shift(lane));
    w |= static_cast<std::uint64_t>(value) << shift(lane);
  }

  int beta_power() const { return get(kBetaLane); }
  int exponent(Generator g, int order) const { return get(lane(g, order)); }
  int degree() const;
  int max_deriv_order() const;
  FactorList factors() const;

  /// Lane-wise sum; throws ConfigInvalid when an exponent passes 127.
  MonoKey operator*(const MonoKey& other) const;

  auto operator<=>(const MonoKey&) const = default;

 private:
  static constexpr int shift(int lane) { return (7 - lane % 8) * 8; }
};

struct Monomial {
  Rational coefficient;
  MonoKey key;

  Monomial() = default;
  Monomial(Rational c, MonoKey k) : coefficient(std::move(c)), key(k) {}
  /// From an explicit beta power and factor list (any order).
  Monomial(Rational c, int beta_power, const FactorList& factors);

  int beta_power() const { return key.beta_power(); }
  int generator_degree() const { return key.degree(); }
  FactorList factors() const { return key.factors(); }
};

/// Canonical order: beta power first, then the sorted factor lists
/// lexicographically (a shorter prefix sorts first).
bool canonical_less(const MonoKey& lhs, const MonoKey& rhs);

inline bool monomial_key_less(const Monomial& lhs, const Monomial& rhs) {
  return canonical_less(lhs.key, rhs.key);
}
inline bool monomial_key_equal(const Monomial& lhs, const Monomial& rhs) {
  return lhs.key == rhs.key;
}

/// Fixed ring data shared by every polynomial of one computation.
struct CoeffRing {
  Rational beta{1, 10};
  int max_deriv_order = 8;  // at most kMaxDerivSlots
};

class CoeffPoly {
 public:
  CoeffPoly() = default;

  static CoeffPoly constant(const Rational& value);
  static CoeffPoly generator(Generator g, int order = 0);
  /// beta^p as a polynomial.
  static CoeffPoly beta(int power = 1);
  /// delta = (3/8) beta a^2, the phase-correction rate.
  static CoeffPoly delta();

  /// Builds a canonical polynomial from arbitrary (possibly unsorted,
  /// duplicated or zero) monomials.
  static CoeffPoly from_monomials(std::vector<Monomial> monomials);

  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  int max_deriv_order() const;
  int min_generator_degree() const;
  int min_beta_power() const;

  bool operator==(const CoeffPoly& other) const;

  CoeffPoly& operator+=(const CoeffPoly& other);
  CoeffPoly& operator-=(const CoeffPoly& other);
  CoeffPoly& operator*=(const Rational& scale);

 private:
  std::vector<Monomial> terms_;
};

CoeffPoly operator+(const CoeffPoly& p, const CoeffPoly& q);
CoeffPoly operator-(const CoeffPoly& p, const CoeffPoly& q);
CoeffPoly operator-(const CoeffPoly& p);
CoeffPoly operator*(const CoeffPoly& p, const CoeffPoly& q);
CoeffPoly operator*(const Rational& s, const CoeffPoly& p);
CoeffPoly operator*(const CoeffPoly& p, const Rational& s);

inline CoeffPoly poly_add(const CoeffPoly& p, const CoeffPoly& q) { return p + q; }
inline CoeffPoly poly_mul(const CoeffPoly& p, const CoeffPoly& q) { return p * q; }

/// Multiplies every monomial by beta^power (symbolically).
CoeffPoly times_beta(const CoeffPoly& p, int power = 1);

/// Exact y-derivative by the Leibniz rule. Throws MaxDerivOrderExceeded when a
/// factor would pass ring.max_deriv_order.
CoeffPoly poly_dy(const CoeffPoly& p, const CoeffRing& ring);

/// Substitutes a^{(k)} = b^{(k)} = 0 for k >= 1 (constant generators).
CoeffPoly freeze_generators(const CoeffPoly& p);

/// Canonical text form, e.g. "3/8 b^1 a^2" for (3/8) beta a^2. Monomials are
/// joined by " + "; the zero polynomial prints as "0".
std::string to_string(const CoeffPoly& p);
std::string to_string(const Monomial& m);

class GeneratorTable;

/// Pointwise value on the y-grid of the table (closed-form generator
/// derivatives, no numerical differentiation).
Eigen::VectorXd poly_eval(const CoeffPoly& p, double beta, const GeneratorTable& table);

}  // namespace kgscat
