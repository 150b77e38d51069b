#include "kgscat/coeff_ring.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kgscat/error.hpp"
#include "kgscat/generator_profile.hpp"

namespace kgscat {

namespace {

constexpr std::uint64_t kLaneHighBits = 0x8080808080808080ull;
constexpr int kLanes = 24;

char generator_name(Generator g) { return g == Generator::A ? 'a' : 'b'; }

// Merge two canonical monomial lists with sign on the right operand.
std::vector<Monomial> merge_terms(const std::vector<Monomial>& p, const std::vector<Monomial>& q,
                                  bool subtract) {
  std::vector<Monomial> out;
  out.reserve(p.size() + q.size());
  auto it = p.begin();
  auto jt = q.begin();
  while (it != p.end() || jt != q.end()) {
    if (jt == q.end() || (it != p.end() && canonical_less(it->key, jt->key))) {
      out.push_back(*it++);
    } else if (it == p.end() || canonical_less(jt->key, it->key)) {
      out.push_back(*jt++);
      if (subtract) out.back().coefficient = -out.back().coefficient;
    } else {
      Rational c = subtract ? Rational(it->coefficient - jt->coefficient)
                            : Rational(it->coefficient + jt->coefficient);
      if (c != 0) out.emplace_back(std::move(c), it->key);
      ++it;
      ++jt;
    }
  }
  return out;
}

}  // namespace

bool canonical_less(const MonoKey& lhs, const MonoKey& rhs) {
  if (lhs.words == rhs.words) return false;
  const int bl = lhs.beta_power();
  const int br = rhs.beta_power();
  if (bl != br) return bl < br;
  auto has_factor_after = [](const MonoKey& k, int lane) {
    for (int l = lane + 1; l < kLanes; ++l)
      if (k.get(l) != 0) return true;
    return false;
  };
  for (int lane = 1; lane < kLanes; ++lane) {
    const int el = lhs.get(lane);
    const int er = rhs.get(lane);
    if (el == er) continue;
    // The side with more copies of this factor shows it where the other shows
    // a later factor, unless the other list has already ended.
    if (el > er) return has_factor_after(rhs, lane);
    return !has_factor_after(lhs, lane);
  }
  return false;
}

int MonoKey::degree() const {
  int total = 0;
  for (int lane = 1; lane < kLanes; ++lane) total += get(lane);
  return total;
}

int MonoKey::max_deriv_order() const {
  int best = 0;
  for (int k = 0; k <= kMaxDerivSlots; ++k) {
    if (exponent(Generator::A, k) > 0 || exponent(Generator::B, k) > 0) best = k;
  }
  return best;
}

FactorList MonoKey::factors() const {
  FactorList out;
  for (Generator g : {Generator::A, Generator::B}) {
    for (int k = 0; k <= kMaxDerivSlots; ++k) {
      for (int e = exponent(g, k); e > 0; --e) {
        out.push_back(GenDeriv{g, static_cast<std::uint8_t>(k)});
      }
    }
  }
  return out;
}

MonoKey MonoKey::operator*(const MonoKey& other) const {
  MonoKey out;
  std::uint64_t high = 0;
  for (std::size_t w = 0; w < words.size(); ++w) {
    out.words[w] = words[w] + other.words[w];
    high |= out.words[w];
  }
  if (high & kLaneHighBits) {
    throw Error(Errc::ConfigInvalid, "monomial exponent exceeds 127");
  }
  return out;
}

Monomial::Monomial(Rational c, int beta_power, const FactorList& factors)
    : coefficient(std::move(c)) {
  if (beta_power < 0 || beta_power > 127) {
    throw Error(Errc::ConfigInvalid, "beta power out of range");
  }
  key.set(MonoKey::kBetaLane, beta_power);
  for (const auto& f : factors) {
    if (f.order > kMaxDerivSlots) {
      throw Error(Errc::MaxDerivOrderExceeded,
                  "derivative order " + std::to_string(f.order) + " has no key slot");
    }
    const int lane = MonoKey::lane(f.generator, f.order);
    key.set(lane, key.get(lane) + 1);
  }
}

CoeffPoly CoeffPoly::constant(const Rational& value) {
  CoeffPoly p;
  if (value != 0) p.terms_.emplace_back(value, MonoKey{});
  return p;
}

CoeffPoly CoeffPoly::generator(Generator g, int order) {
  CoeffPoly p;
  p.terms_.emplace_back(Rational(1), 0, FactorList{GenDeriv{g, static_cast<std::uint8_t>(order)}});
  return p;
}

CoeffPoly CoeffPoly::beta(int power) {
  CoeffPoly p;
  p.terms_.emplace_back(Rational(1), power, FactorList{});
  return p;
}

CoeffPoly CoeffPoly::delta() {
  CoeffPoly p;
  p.terms_.emplace_back(frac(3, 8), 1,
                        FactorList{GenDeriv{Generator::A, 0}, GenDeriv{Generator::A, 0}});
  return p;
}

CoeffPoly CoeffPoly::from_monomials(std::vector<Monomial> monomials) {
  std::sort(monomials.begin(), monomials.end(), monomial_key_less);
  CoeffPoly p;
  p.terms_.reserve(monomials.size());
  for (auto& m : monomials) {
    if (!p.terms_.empty() && p.terms_.back().key == m.key) {
      p.terms_.back().coefficient += m.coefficient;
    } else {
      p.terms_.push_back(std::move(m));
    }
  }
  std::erase_if(p.terms_, [](const Monomial& m) { return m.coefficient == 0; });
  return p;
}

int CoeffPoly::max_deriv_order() const {
  int best = 0;
  for (const auto& m : terms_) best = std::max(best, m.key.max_deriv_order());
  return best;
}

int CoeffPoly::min_generator_degree() const {
  int best = 1 << 20;
  for (const auto& m : terms_) best = std::min(best, m.generator_degree());
  return terms_.empty() ? 0 : best;
}

int CoeffPoly::min_beta_power() const {
  int best = 1 << 20;
  for (const auto& m : terms_) best = std::min(best, m.beta_power());
  return terms_.empty() ? 0 : best;
}

bool CoeffPoly::operator==(const CoeffPoly& other) const {
  if (terms_.size() != other.terms_.size()) return false;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (terms_[k].key != other.terms_[k].key) return false;
    if (terms_[k].coefficient != other.terms_[k].coefficient) return false;
  }
  return true;
}

CoeffPoly& CoeffPoly::operator+=(const CoeffPoly& other) {
  if (other.terms_.empty()) return *this;
  if (terms_.empty()) {
    terms_ = other.terms_;
    return *this;
  }
  terms_ = merge_terms(terms_, other.terms_, false);
  return *this;
}

CoeffPoly& CoeffPoly::operator-=(const CoeffPoly& other) {
  if (other.terms_.empty()) return *this;
  terms_ = merge_terms(terms_, other.terms_, true);
  return *this;
}

CoeffPoly& CoeffPoly::operator*=(const Rational& scale) {
  if (scale == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& m : terms_) m.coefficient *= scale;
  return *this;
}

CoeffPoly operator+(const CoeffPoly& p, const CoeffPoly& q) {
  CoeffPoly r = p;
  r += q;
  return r;
}

CoeffPoly operator-(const CoeffPoly& p, const CoeffPoly& q) {
  CoeffPoly r = p;
  r -= q;
  return r;
}

CoeffPoly operator-(const CoeffPoly& p) { return Rational(-1) * p; }

CoeffPoly operator*(const CoeffPoly& p, const CoeffPoly& q) {
  if (p.is_zero() || q.is_zero()) return {};
  std::vector<Monomial> prods;
  prods.reserve(p.size() * q.size());
  for (const auto& m : p.terms())
    for (const auto& n : q.terms()) prods.emplace_back(m.coefficient * n.coefficient, m.key * n.key);
  return CoeffPoly::from_monomials(std::move(prods));
}

CoeffPoly operator*(const Rational& s, const CoeffPoly& p) {
  CoeffPoly r = p;
  r *= s;
  return r;
}

CoeffPoly operator*(const CoeffPoly& p, const Rational& s) { return s * p; }

CoeffPoly times_beta(const CoeffPoly& p, int power) {
  MonoKey shift;
  shift.set(MonoKey::kBetaLane, power);
  std::vector<Monomial> ms = p.terms();
  for (auto& m : ms) m.key = m.key * shift;
  // A uniform shift keeps the order.
  return CoeffPoly::from_monomials(std::move(ms));
}

CoeffPoly poly_dy(const CoeffPoly& p, const CoeffRing& ring) {
  const int cap = std::min(ring.max_deriv_order, kMaxDerivSlots);
  std::vector<Monomial> out;
  for (const auto& m : p.terms()) {
    for (Generator g : {Generator::A, Generator::B}) {
      for (int k = 0; k <= kMaxDerivSlots; ++k) {
        const int e = m.key.exponent(g, k);
        if (e == 0) continue;
        if (k + 1 > cap) {
          throw Error(Errc::MaxDerivOrderExceeded,
                      "d/dy of " + std::string(1, generator_name(g)) + " derivative of order " +
                          std::to_string(k) + " exceeds cap " +
                          std::to_string(ring.max_deriv_order));
        }
        MonoKey key = m.key;
        key.set(MonoKey::lane(g, k), e - 1);
        key.set(MonoKey::lane(g, k + 1), key.exponent(g, k + 1) + 1);
        out.emplace_back(m.coefficient * e, key);
      }
    }
  }
  return CoeffPoly::from_monomials(std::move(out));
}

CoeffPoly freeze_generators(const CoeffPoly& p) {
  std::vector<Monomial> kept;
  for (const auto& m : p.terms()) {
    if (m.key.max_deriv_order() == 0) kept.push_back(m);
  }
  return CoeffPoly::from_monomials(std::move(kept));
}

std::string to_string(const Monomial& m) {
  std::ostringstream os;
  os << m.coefficient.get_str() << " b^" << m.beta_power();
  for (Generator g : {Generator::A, Generator::B}) {
    for (int k = 0; k <= kMaxDerivSlots; ++k) {
      const int e = m.key.exponent(g, k);
      if (e == 0) continue;
      os << ' ' << generator_name(g) << std::string(k, '\'');
      if (e > 1) os << '^' << e;
    }
  }
  return os.str();
}

std::string to_string(const CoeffPoly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  for (const auto& m : p.terms()) {
    if (!out.empty()) out += " + ";
    out += to_string(m);
  }
  return out;
}

Eigen::VectorXd poly_eval(const CoeffPoly& p, double beta, const GeneratorTable& table) {
  const Eigen::Index n = table.ys().size();
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n);
  if (p.max_deriv_order() > table.max_order()) {
    throw Error(Errc::MaxDerivOrderExceeded, "generator table built for order " +
                                                 std::to_string(table.max_order()) +
                                                 ", polynomial needs " +
                                                 std::to_string(p.max_deriv_order()));
  }
  Eigen::ArrayXd prod(n);
  for (const auto& m : p.terms()) {
    prod.setConstant(m.coefficient.get_d() * std::pow(beta, m.beta_power()));
    for (Generator g : {Generator::A, Generator::B}) {
      for (int k = 0; k <= std::min(table.max_order(), kMaxDerivSlots); ++k) {
        const int e = m.key.exponent(g, k);
        for (int r = 0; r < e; ++r) prod *= table.values(g, k).array();
      }
    }
    acc += prod;
  }
  return acc.matrix();
}

}  // namespace kgscat
