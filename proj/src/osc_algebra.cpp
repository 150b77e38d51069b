#include "kgscat/osc_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "kgscat/error.hpp"

namespace kgscat {

const CoeffPoly& OscAlgebra::delta() const {
  static const CoeffPoly d = CoeffPoly::delta();
  return d;
}

const CoeffPoly& OscAlgebra::delta_dy() const {
  static const CoeffPoly d = poly_dy(CoeffPoly::delta(), CoeffRing{Rational(0), 1});
  return d;
}

// Collects raw monomials per key and canonicalizes once at the end; repeated
// merging of sorted polynomials is far slower for large products.
class TermAccumulator {
 public:
  explicit TermAccumulator(int j_max, int i_max = 1 << 20) : j_max_(j_max), i_max_(i_max) {}

  void add(TermKey key, const CoeffPoly& c, const Rational& scale) {
    if (c.is_zero() || scale == 0) return;
    if (!normalize(key, scale)) return;
    auto& bucket = buckets_[key];
    for (const auto& m : c.terms())
      bucket.emplace_back(m.coefficient * sign_ * scale, m.key);
  }

  void add_product(TermKey key, const CoeffPoly& p, const CoeffPoly& q, const Rational& scale) {
    if (p.is_zero() || q.is_zero() || scale == 0) return;
    if (!normalize(key, scale)) return;
    auto& bucket = buckets_[key];
    bucket.reserve(bucket.size() + p.size() * q.size());
    for (const auto& m : p.terms()) {
      const Rational ms = m.coefficient * sign_ * scale;
      for (const auto& n : q.terms()) {
        bucket.emplace_back(ms * n.coefficient, m.key * n.key);
      }
    }
  }

  void mark_truncated() { truncated_ = true; }

  Expansion finish() {
    Expansion out(j_max_);
    out.truncated_ = truncated_;
    for (auto& [key, monomials] : buckets_) {
      CoeffPoly p = CoeffPoly::from_monomials(std::move(monomials));
      if (!p.is_zero()) out.terms_.emplace(key, std::move(p));
    }
    return out;
  }

 private:
  bool normalize(TermKey& key, const Rational&) {
    sign_ = 1;
    if (key.n < 0) {
      key.n = -key.n;
      if (key.parity == Parity::Sin) sign_ = -1;
    }
    if (key.n == 0 && key.parity == Parity::Sin) return false;
    if (key.j > j_max_) {
      truncated_ = true;
      return false;
    }
    if (key.i > i_max_) {
      throw Error(Errc::LogPowerExceeded,
                  "log power " + std::to_string(key.i) + " exceeds cap " + std::to_string(i_max_));
    }
    return true;
  }

  std::map<TermKey, std::vector<Monomial>> buckets_;
  int j_max_;
  int i_max_;
  int sign_ = 1;
  bool truncated_ = false;
};

Expansion Expansion::term(const TermKey& key, const CoeffPoly& coeff, int j_max) {
  Expansion e(j_max);
  e.add(key, coeff);
  return e;
}

Expansion Expansion::term(int j, int i, int n, Parity parity, const CoeffPoly& coeff, int j_max) {
  return term(TermKey{j, i, n, parity}, coeff, j_max);
}

void Expansion::add(TermKey key, const CoeffPoly& coeff) {
  if (coeff.is_zero()) return;
  CoeffPoly c = coeff;
  if (key.n < 0) {
    key.n = -key.n;
    if (key.parity == Parity::Sin) c = -c;
  }
  if (key.n == 0 && key.parity == Parity::Sin) return;
  if (key.j > j_max_) {
    truncated_ = true;
    return;
  }
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    terms_.emplace(key, std::move(c));
    return;
  }
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

CoeffPoly Expansion::coefficient(const TermKey& key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? CoeffPoly{} : it->second;
}

int Expansion::min_order() const { return terms_.empty() ? j_max_ + 1 : terms_.begin()->first.j; }

int Expansion::max_order() const { return terms_.empty() ? -1 : terms_.rbegin()->first.j; }

int Expansion::max_log_power() const {
  int best = 0;
  for (const auto& [k, c] : terms_) best = std::max(best, k.i);
  return best;
}

int Expansion::max_harmonic() const {
  int best = 0;
  for (const auto& [k, c] : terms_) best = std::max(best, k.n);
  return best;
}

int Expansion::max_deriv_order() const {
  int best = 0;
  for (const auto& [k, c] : terms_) best = std::max(best, c.max_deriv_order());
  return best;
}

Expansion& Expansion::operator+=(const Expansion& other) {
  for (const auto& [k, c] : other.terms_) add(k, c);
  truncated_ = truncated_ || other.truncated_;
  return *this;
}

Expansion& Expansion::operator-=(const Expansion& other) {
  for (const auto& [k, c] : other.terms_) add(k, -c);
  truncated_ = truncated_ || other.truncated_;
  return *this;
}

Expansion operator+(const Expansion& u, const Expansion& v) {
  Expansion r = u;
  r += v;
  return r;
}

Expansion operator-(const Expansion& u, const Expansion& v) {
  Expansion r = u;
  r -= v;
  return r;
}

Expansion operator-(const Expansion& u) { return Rational(-1) * u; }

Expansion operator*(const Rational& s, const Expansion& u) {
  TermAccumulator acc(u.j_max());
  if (u.truncated()) acc.mark_truncated();
  for (const auto& [k, c] : u.terms()) acc.add(k, c, s);
  return acc.finish();
}

Expansion exp_scale(const Expansion& u, const CoeffPoly& c) {
  TermAccumulator acc(u.j_max());
  if (u.truncated()) acc.mark_truncated();
  for (const auto& [k, p] : u.terms()) acc.add_product(k, p, c, Rational(1));
  return acc.finish();
}

Expansion exp_shift(const Expansion& u, int shift) {
  TermAccumulator acc(u.j_max());
  if (u.truncated()) acc.mark_truncated();
  for (const auto& [k, p] : u.terms()) acc.add(TermKey{k.j + shift, k.i, k.n, k.parity}, p, 1);
  return acc.finish();
}

Expansion exp_times_beta(const Expansion& u, int power) {
  Expansion out(u.j_max());
  if (u.truncated()) out.mark_truncated();
  for (const auto& [k, p] : u.terms()) out.add(k, times_beta(p, power));
  return out;
}

namespace {

// Integer fast path for products. Every coefficient of an expansion is
// rescaled to an integer numerator over one common denominator, products are
// formed and summed exactly in 128-bit integers, and the result is divided
// back once.
// Returns nullopt when anything does not fit, leaving the rational path.

using Wide = __int128;

struct ScaledPoly {
  std::vector<std::pair<MonoKey, Wide>> terms;
};

struct ScaledExpansion {
  mpz_class denominator{1};
  std::vector<std::pair<TermKey, ScaledPoly>> terms;
};

std::optional<Wide> to_wide(const mpz_class& v) {
  if (mpz_sizeinbase(v.get_mpz_t(), 2) > 120) return std::nullopt;
  unsigned __int128 mag = 0;
  std::size_t count = 0;
  std::uint64_t limbs[2] = {0, 0};
  mpz_export(limbs, &count, -1, sizeof(std::uint64_t), 0, 0, v.get_mpz_t());
  mag = (static_cast<unsigned __int128>(limbs[1]) << 64) | limbs[0];
  const Wide w = static_cast<Wide>(mag);
  return sgn(v) < 0 ? -w : w;
}

std::optional<ScaledExpansion> scale_to_integers(const Expansion& u) {
  ScaledExpansion out;
  for (const auto& [k, c] : u.terms())
    for (const auto& m : c.terms()) mpz_lcm(out.denominator.get_mpz_t(), out.denominator.get_mpz_t(),
                                            m.coefficient.get_den_mpz_t());
  out.terms.reserve(u.size());
  for (const auto& [k, c] : u.terms()) {
    ScaledPoly sp;
    sp.terms.reserve(c.size());
    for (const auto& m : c.terms()) {
      mpz_class num = m.coefficient.get_num() * (out.denominator / m.coefficient.get_den());
      const auto wide = to_wide(num);
      if (!wide) return std::nullopt;
      sp.terms.emplace_back(m.key, *wide);
    }
    out.terms.emplace_back(k, std::move(sp));
  }
  return out;
}

// Open addressing map MonoKey -> 128-bit accumulator.
class MonoTable {
 public:
  MonoTable() { rehash(64); }

  bool add(const MonoKey& key, Wide value) {
    if (2 * (count_ + 1) > slots_.size()) rehash(2 * slots_.size());
    std::size_t pos = hash(key) & mask_;
    while (true) {
      Slot& s = slots_[pos];
      if (!s.used) {
        s.used = true;
        s.key = key;
        s.value = value;
        ++count_;
        return true;
      }
      if (s.key == key) return !__builtin_add_overflow(s.value, value, &s.value);
      pos = (pos + 1) & mask_;
    }
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& s : slots_)
      if (s.used && s.value != 0) f(s.key, s.value);
  }

 private:
  struct Slot {
    MonoKey key;
    Wide value = 0;
    bool used = false;
  };

  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  static std::size_t hash(const MonoKey& key) {
    return static_cast<std::size_t>(
        mix(key.words[0] ^ mix(key.words[1] ^ mix(key.words[2] + 0x9E3779B97F4A7C15ull))));
  }

  void rehash(std::size_t capacity) {
    std::vector<Slot> old = std::move(slots_);
    slots_.assign(capacity, Slot{});
    mask_ = capacity - 1;
    count_ = 0;
    for (const auto& s : old)
      if (s.used) add(s.key, s.value);
  }

  std::vector<Slot> slots_;
  std::size_t mask_ = 0;
  std::size_t count_ = 0;
};

mpz_class to_mpz(Wide v) {
  const bool negative = v < 0;
  unsigned __int128 mag = negative ? -static_cast<unsigned __int128>(v) : v;
  mpz_class hi(static_cast<unsigned long>(mag >> 64));
  mpz_class out = (hi << 64) + mpz_class(static_cast<unsigned long>(mag & ~0ull));
  return negative ? mpz_class(-out) : out;
}

// Harmonic target of one product half after normalization; sign 0 drops it.
struct Target {
  TermKey key;
  int sign = 0;
};

Target normalize_target(TermKey key, int sign) {
  if (key.n < 0) {
    key.n = -key.n;
    if (key.parity == Parity::Sin) sign = -sign;
  }
  if (key.n == 0 && key.parity == Parity::Sin) sign = 0;
  return {key, sign};
}

std::optional<Expansion> exp_mul_integer(const Expansion& u, const Expansion& v,
                                         const OscAlgebra& alg) {
  const int j_max = std::min(u.j_max(), v.j_max());
  auto su = scale_to_integers(u);
  auto sv = scale_to_integers(v);
  if (!su || !sv) return std::nullopt;
  bool truncated = u.truncated() || v.truncated();
  std::map<TermKey, MonoTable> tables;
  for (const auto& [ku, pu] : su->terms) {
    for (const auto& [kv, pv] : sv->terms) {
      const int j = ku.j + kv.j;
      const int i = ku.i + kv.i;
      if (j > j_max) {
        truncated = true;
        continue;
      }
      if (i > alg.i_max) {
        throw Error(Errc::LogPowerExceeded,
                    "log power " + std::to_string(i) + " exceeds cap " + std::to_string(alg.i_max));
      }
      const int sum = ku.n + kv.n;
      const int diff = ku.n - kv.n;
      Target a;
      Target b;
      if (ku.parity == Parity::Cos && kv.parity == Parity::Cos) {
        a = normalize_target({j, i, diff, Parity::Cos}, 1);
        b = normalize_target({j, i, sum, Parity::Cos}, 1);
      } else if (ku.parity == Parity::Sin && kv.parity == Parity::Sin) {
        a = normalize_target({j, i, diff, Parity::Cos}, 1);
        b = normalize_target({j, i, sum, Parity::Cos}, -1);
      } else if (ku.parity == Parity::Sin) {
        a = normalize_target({j, i, sum, Parity::Sin}, 1);
        b = normalize_target({j, i, diff, Parity::Sin}, 1);
      } else {
        a = normalize_target({j, i, sum, Parity::Sin}, 1);
        b = normalize_target({j, i, diff, Parity::Sin}, -1);
      }
      MonoTable* ta = a.sign != 0 ? &tables[a.key] : nullptr;
      MonoTable* tb = b.sign != 0 ? &tables[b.key] : nullptr;
      for (const auto& [mk, mc] : pu.terms) {
        for (const auto& [nk, nc] : pv.terms) {
          const MonoKey key = mk * nk;
          Wide prod;
          if (__builtin_mul_overflow(mc, nc, &prod)) return std::nullopt;
          if (ta && !ta->add(key, a.sign > 0 ? prod : -prod)) return std::nullopt;
          if (tb && !tb->add(key, b.sign > 0 ? prod : -prod)) return std::nullopt;
        }
      }
    }
  }
  // Every product carries the factor 1/2 of the product-to-sum identities.
  const mpz_class denominator = 2 * su->denominator * sv->denominator;
  Expansion out(j_max);
  if (truncated) out.mark_truncated();
  for (const auto& [key, table] : tables) {
    std::vector<Monomial> ms;
    table.for_each([&](const MonoKey& mk, Wide value) {
      Rational c(to_mpz(value), denominator);
      c.canonicalize();
      ms.emplace_back(std::move(c), mk);
    });
    CoeffPoly p = CoeffPoly::from_monomials(std::move(ms));
    if (!p.is_zero()) out.add(key, p);
  }
  return out;
}

}  // namespace

Expansion exp_mul_rational(const Expansion& u, const Expansion& v, const OscAlgebra& alg) {
  const int j_max = std::min(u.j_max(), v.j_max());
  TermAccumulator acc(j_max, alg.i_max);
  if (u.truncated() || v.truncated()) acc.mark_truncated();
  const Rational half(1, 2);
  const Rational mhalf(-1, 2);
  for (const auto& [ku, cu] : u.terms()) {
    for (const auto& [kv, cv] : v.terms()) {
      const int j = ku.j + kv.j;
      const int i = ku.i + kv.i;
      if (j > j_max) {
        acc.mark_truncated();
        continue;
      }
      const int sum = ku.n + kv.n;
      const int diff = ku.n - kv.n;
      if (ku.parity == Parity::Cos && kv.parity == Parity::Cos) {
        acc.add_product({j, i, diff, Parity::Cos}, cu, cv, half);
        acc.add_product({j, i, sum, Parity::Cos}, cu, cv, half);
      } else if (ku.parity == Parity::Sin && kv.parity == Parity::Sin) {
        acc.add_product({j, i, diff, Parity::Cos}, cu, cv, half);
        acc.add_product({j, i, sum, Parity::Cos}, cu, cv, mhalf);
      } else if (ku.parity == Parity::Sin) {
        acc.add_product({j, i, sum, Parity::Sin}, cu, cv, half);
        acc.add_product({j, i, diff, Parity::Sin}, cu, cv, half);
      } else {
        acc.add_product({j, i, sum, Parity::Sin}, cu, cv, half);
        acc.add_product({j, i, diff, Parity::Sin}, cu, cv, mhalf);
      }
    }
  }
  return acc.finish();
}

Expansion exp_mul(const Expansion& u, const Expansion& v, const OscAlgebra& alg) {
  if (auto fast = exp_mul_integer(u, v, alg)) return std::move(*fast);
  return exp_mul_rational(u, v, alg);
}

Expansion exp_drho(const Expansion& u, const OscAlgebra& alg) {
  TermAccumulator acc(u.j_max(), alg.i_max);
  if (u.truncated()) acc.mark_truncated();
  const CoeffPoly& delta = alg.delta();
  for (const auto& [k, c] : u.terms()) {
    const bool is_cos = k.parity == Parity::Cos;
    const Parity other = is_cos ? Parity::Sin : Parity::Cos;
    // d/drho cos(n phi) = -n phi_rho sin(n phi),  d/drho sin(n phi) = n phi_rho cos(n phi)
    const Rational trig_sign = is_cos ? Rational(-k.n) : Rational(k.n);
    if (k.n != 0) {
      acc.add({k.j, k.i, k.n, other}, c, trig_sign);
      acc.add_product({k.j + 1, k.i, k.n, other}, c, delta, trig_sign);
    }
    if (k.i > 0) acc.add({k.j + 1, k.i - 1, k.n, k.parity}, c, Rational(k.i));
    if (k.j != 0) acc.add({k.j + 1, k.i, k.n, k.parity}, c, Rational(-k.j));
  }
  return acc.finish();
}

Expansion exp_dy(const Expansion& u, const OscAlgebra& alg) {
  TermAccumulator acc(u.j_max(), alg.i_max);
  if (u.truncated()) acc.mark_truncated();
  const CoeffPoly& delta_dy = alg.delta_dy();
  const CoeffPoly b_dy = CoeffPoly::generator(Generator::B, 1);
  for (const auto& [k, c] : u.terms()) {
    acc.add(k, poly_dy(c, alg.ring), Rational(1));
    if (k.n == 0) continue;
    const bool is_cos = k.parity == Parity::Cos;
    const Parity other = is_cos ? Parity::Sin : Parity::Cos;
    const Rational trig_sign = is_cos ? Rational(-k.n) : Rational(k.n);
    acc.add_product({k.j, k.i + 1, k.n, other}, c, delta_dy, trig_sign);
    acc.add_product({k.j, k.i, k.n, other}, c, b_dy, trig_sign);
  }
  return acc.finish();
}

Expansion exp_dy2(const Expansion& u, const OscAlgebra& alg) { return exp_dy(exp_dy(u, alg), alg); }

Expansion apply_Psi(const Expansion& v, const OscAlgebra& alg) {
  Expansion out = exp_drho(exp_drho(v, alg), alg);
  out += v;
  out += Rational(1, 4) * exp_shift(v, 2);
  // Products are formed directly at the reduced cap so the 1/rho shift does
  // not waste work on orders that will be dropped.
  Expansion capped(v.j_max() - 1);
  for (const auto& [k, c] : v.terms()) capped.add(k, c);
  if (v.truncated()) capped.mark_truncated();
  Expansion cube = exp_mul(exp_mul(capped, capped, alg), capped, alg);
  Expansion cubic(v.j_max());
  for (const auto& [k, c] : cube.terms()) cubic.add({k.j + 1, k.i, k.n, k.parity}, times_beta(c));
  // Anything dropped at the reduced cap would have landed past j_max.
  if (cube.truncated()) cubic.mark_truncated();
  out += cubic;
  out -= exp_shift(exp_dy2(v, alg), 2);
  return out;
}

Expansion apply_Psi_prime(const Expansion& v, const Expansion& w, const OscAlgebra& alg) {
  Expansion out = exp_drho(exp_drho(w, alg), alg);
  out += w;
  out += Rational(1, 4) * exp_shift(w, 2);
  Expansion vv = exp_mul(v, v, alg);
  out += Rational(3) * exp_times_beta(exp_shift(exp_mul(vv, w, alg), 1));
  out -= exp_shift(exp_dy2(w, alg), 2);
  return out;
}

Expansion apply_L0(const Expansion& g, const OscAlgebra& alg) {
  Expansion out = exp_drho(exp_drho(g, alg), alg);
  out += g;
  out += Rational(1, 4) * exp_shift(g, 2);
  // 8 delta cos^2(phi) / rho = 4 delta (1 + cos 2 phi) / rho
  const Expansion cos2 = Expansion::term(0, 0, 2, Parity::Cos, CoeffPoly::constant(1), g.j_max());
  Expansion bracket = g + exp_mul(cos2, g, alg);
  out += Rational(4) * exp_scale(exp_shift(bracket, 1), alg.delta());
  return out;
}

Expansion freeze_generators(const Expansion& u) {
  Expansion out(u.j_max());
  if (u.truncated()) out.mark_truncated();
  for (const auto& [k, c] : u.terms()) out.add(k, freeze_generators(c));
  return out;
}

MembershipVerdict classify(const Expansion& u) {
  MembershipVerdict v;
  for (const auto& [k, c] : u.terms()) {
    if (c.min_generator_degree() < 1) {
      throw Error(Errc::DegreeZeroCoefficient,
                  "coefficient of " + to_string(k) + " has a monomial free of a and b");
    }
  }
  if (u.empty()) {
    v.in_Sk_for = u.j_max() + 1;
    v.empty = true;
    return v;
  }
  v.in_Sk_for = u.min_order();
  for (const auto& [k, c] : u.terms()) {
    if (k.j != v.in_Sk_for) break;
    if (k.n == 1) v.resonant_at_lowest = true;
  }
  v.is_nonresonant_class = !v.resonant_at_lowest;
  return v;
}

std::string to_string(const TermKey& key) {
  std::ostringstream os;
  os << "[j=" << key.j << "][i=" << key.i << "][n=" << key.n << "]["
     << (key.parity == Parity::Cos ? "cos" : "sin") << ']';
  return os.str();
}

std::string to_string(const Expansion& u) {
  std::string out;
  for (const auto& [k, c] : u.terms()) {
    out += to_string(k);
    out += ' ';
    out += to_string(c);
    out += '\n';
  }
  return out;
}

ExpansionEvaluator::ExpansionEvaluator(const Expansion& u, const OscAlgebra& alg,
                                       const GeneratorProfile& profile, const Eigen::VectorXd& ys)
    : ys_(ys) {
  const double beta = alg.ring.beta.get_d();
  const GeneratorTable table(profile, ys, std::max(u.max_deriv_order(), 1));
  delta_ = poly_eval(CoeffPoly::delta(), beta, table);
  b_ = table.values(Generator::B, 0);
  terms_.reserve(u.size());
  for (const auto& [k, c] : u.terms()) {
    terms_.push_back(Term{k, poly_eval(c, beta, table).array()});
    max_n_ = std::max(max_n_, k.n);
  }
}

Eigen::VectorXd ExpansionEvaluator::operator()(double rho) const {
  if (!(rho >= 1.0)) throw Error(Errc::RhoOutOfRange, "rho = " + std::to_string(rho) + " < 1");
  const Eigen::Index ny = ys_.size();
  const double log_rho = std::log(rho);
  const Eigen::ArrayXd phi = rho + delta_.array() * log_rho + b_.array();
  // cos(n phi), sin(n phi) by angle addition, n = 0..max_n
  std::vector<Eigen::ArrayXd> cos_n(max_n_ + 1), sin_n(max_n_ + 1);
  cos_n[0] = Eigen::ArrayXd::Ones(ny);
  sin_n[0] = Eigen::ArrayXd::Zero(ny);
  if (max_n_ >= 1) {
    cos_n[1] = phi.cos();
    sin_n[1] = phi.sin();
  }
  for (int n = 2; n <= max_n_; ++n) {
    cos_n[n] = cos_n[n - 1] * cos_n[1] - sin_n[n - 1] * sin_n[1];
    sin_n[n] = sin_n[n - 1] * cos_n[1] + cos_n[n - 1] * sin_n[1];
  }
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(ny);
  for (const auto& t : terms_) {
    const double weight = std::pow(log_rho, t.key.i) * std::pow(rho, -t.key.j);
    const auto& trig = t.key.parity == Parity::Cos ? cos_n[t.key.n] : sin_n[t.key.n];
    acc += weight * t.coeff * trig;
  }
  return acc.matrix();
}

Eigen::VectorXd ExpansionEvaluator::at(const Eigen::VectorXd& rhos) const {
  if (rhos.size() != ys_.size()) {
    throw Error(Errc::ConfigInvalid, "one rho per grid point is required");
  }
  if (rhos.size() > 0 && !(rhos.minCoeff() >= 1.0)) {
    throw Error(Errc::RhoOutOfRange, "rho below 1 in pointwise evaluation");
  }
  const Eigen::ArrayXd r = rhos.array();
  const Eigen::ArrayXd log_rho = r.log();
  const Eigen::ArrayXd phi = r + delta_.array() * log_rho + b_.array();
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(r.size());
  for (const auto& t : terms_) {
    const Eigen::ArrayXd trig =
        t.key.parity == Parity::Cos ? (t.key.n * phi).cos().eval() : (t.key.n * phi).sin().eval();
    acc += t.coeff * trig * log_rho.pow(t.key.i) * r.pow(-t.key.j);
  }
  return acc.matrix();
}

Eigen::VectorXd eval_expansion(const Expansion& u, const OscAlgebra& alg,
                               const GeneratorProfile& profile, double rho,
                               const Eigen::VectorXd& ys) {
  if (!(rho >= 1.0)) throw Error(Errc::RhoOutOfRange, "rho = " + std::to_string(rho) + " < 1");
  return ExpansionEvaluator(u, alg, profile, ys)(rho);
}

}  // namespace kgscat
