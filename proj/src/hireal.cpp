#include "subexp/hireal.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <quadmath.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <utility>

#include "subexp/errors.hpp"

namespace subexp {

namespace mp = boost::multiprecision;

namespace {

const Real kUnit = std::numeric_limits<Real>::epsilon();

bool is_square(const Integer& n, Integer* root) {
  if (n < 0) return false;
  Integer r = mp::sqrt(n);
  if (r * r != n) return false;
  if (root) *root = r;
  return true;
}

bool is_rational_square(const Rational& q, Rational* root) {
  if (q < 0) return false;
  Integer rn, rd;
  if (!is_square(mp::numerator(q), &rn) || !is_square(mp::denominator(q), &rd))
    return false;
  if (root) *root = Rational(rn, rd);
  return true;
}

// Splits n = s^2 * m with m squarefree.
void squarefree_split(std::uint64_t n, std::uint64_t* s, std::uint64_t* m) {
  std::uint64_t sq = 1, free = 1;
  std::uint64_t rest = n;
  std::uint64_t d = 2;
  for (; d * d <= rest; ++d) {
    if (d > 4000000) throw NotRepresentable("radicand too large to factor");
    while (rest % (d * d) == 0) {
      rest /= d * d;
      sq *= d;
    }
    if (rest % d == 0) {
      rest /= d;
      free *= d;
    }
  }
  free *= rest;
  *s = sq;
  *m = free;
}

template <class F>
F rational_as(const Rational& q) {
  return F(mp::numerator(q)) / F(mp::denominator(q));
}

template <class F>
struct Partial {
  F sum = 0;
  F abs_err = 0;
  F exponent = 0;  // common scale factored out of sum
};

// Sum of c_i e^{e_i - E} in precision F, with a first-order error bound.
template <class F>
Partial<F> evaluate_in(const std::vector<ExpTerm>& terms) {
  Partial<F> out;
  if (terms.empty()) return out;
  const F u = std::numeric_limits<F>::epsilon();
  std::vector<F> expo(terms.size());
  std::vector<F> expo_err(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    F a = rational_as<F>(terms[i].a());
    F r = terms[i].b() == 0 ? F(0) : F(sqrt(rational_as<F>(terms[i].b())));
    expo[i] = a + r;
    expo_err[i] = 4 * u * (abs(a) + r + 1);
  }
  out.exponent = expo[0];
  F sum = 0, comp = 0, mag = 0, err = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Coeff& c = terms[i].coeff();
    F cu = rational_as<F>(c.u());
    F cv = c.v() == 0 ? F(0) : F(rational_as<F>(c.v()) * sqrt(F(c.m())));
    F cval = cu + cv;
    F d = expo[i] - out.exponent;
    F t = cval * F(exp(d));
    F at = abs(t);
    F rel = expo_err[i] + expo_err[0] + 2 * u * (abs(d) + 1);
    err += at * rel + F(exp(d)) * (abs(cu) + abs(cv)) * 4 * u;
    mag += at;
    F s = sum + t;
    if (abs(sum) >= at)
      comp += (sum - s) + t;
    else
      comp += (t - s) + sum;
    sum = s;
  }
  out.sum = sum + comp;
  out.abs_err = 2 * (err + 2 * u * mag) + expo_err[0] * abs(out.sum);
  return out;
}

struct Evaluated {
  Real sum = 0;       // scaled sum
  Real exponent = 0;  // sum * e^{exponent} is the value
  Real rel = 0;
};

template <unsigned D>
bool try_precision(const std::vector<ExpTerm>& terms, Real target,
                   Evaluated* out) {
  using F = mp::number<mp::cpp_bin_float<D>, mp::et_off>;
  Partial<F> p = evaluate_in<F>(terms);
  if (p.sum == 0) return false;
  F rel = p.abs_err / abs(p.sum);
  if (rel > F(target)) return false;
  out->sum = static_cast<Real>(p.sum);
  out->exponent = static_cast<Real>(p.exponent);
  out->rel = static_cast<Real>(rel) + 2 * kUnit;
  return true;
}

// Evaluation with relative error below target, escalating precision when
// surviving terms of different exponents nearly cancel.
Evaluated evaluate(const std::vector<ExpTerm>& terms, Real target) {
  Evaluated out;
  if (terms.empty()) return out;
  const Real u = kUnit;
  const Real e0 = terms[0].exponent_approx();
  Real sum = 0, comp = 0, mag = 0, err = 0;
  for (const ExpTerm& t : terms) {
    const Real e = t.exponent_approx();
    const Real d = e - e0;
    const Real w = exp(d);
    const Real v = t.coeff_approx() * w;
    const Real av = abs(v);
    const Real expo_err = 4 * u * (t.exponent_magnitude() + terms[0].exponent_magnitude() + 1);
    err += av * (expo_err + 2 * u * (abs(d) + 1)) + w * t.coeff().magnitude() * 4 * u;
    mag += av;
    const Real s = sum + v;
    if (abs(sum) >= av)
      comp += (sum - s) + v;
    else
      comp += (v - s) + sum;
    sum = s;
  }
  sum += comp;
  const Real abs_err = 2 * (err + 2 * u * mag);
  if (sum != 0 && abs_err / abs(sum) <= target) {
    out.sum = sum;
    out.exponent = e0;
    out.rel = abs_err / abs(sum);
    return out;
  }
  if (try_precision<60>(terms, target, &out)) return out;
  if (try_precision<120>(terms, target, &out)) return out;
  if (try_precision<250>(terms, target, &out)) return out;
  if (try_precision<500>(terms, target, &out)) return out;
  if (try_precision<1000>(terms, target, &out)) return out;
  throw NumericError("exponential sum could not be resolved at 1000 digits");
}

constexpr double kEvalTarget = 1e-27;

}  // namespace

Real to_real(const Rational& q) {
  if (q == 0) return 0;
  return Real(mp::numerator(q)) / Real(mp::denominator(q));
}

std::string to_string(const Rational& q) {
  if (mp::denominator(q) == 1) return mp::numerator(q).str();
  return mp::numerator(q).str() + "/" + mp::denominator(q).str();
}

Rational parse_rational(const std::string& text) {
  try {
    std::size_t slash = text.find('/');
    if (slash == std::string::npos) {
      std::size_t dot = text.find('.');
      std::size_t e = text.find_first_of("eE");
      if (dot == std::string::npos && e == std::string::npos) return parse_rational(text + "/1");
      // Exact decimal: mantissa digits over a power of ten.
      std::string mant = e == std::string::npos ? text : text.substr(0, e);
      bool negative = !mant.empty() && mant[0] == '-';
      if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
        mant = mant.substr(1);
        if (dot != std::string::npos) --dot;
      }
      long long exp10 = e == std::string::npos ? 0 : std::stoll(text.substr(e + 1));
      std::string digits;
      for (char c : mant) {
        if (c == '.') continue;
        digits += c;
      }
      if (dot != std::string::npos) exp10 -= static_cast<long long>(mant.size() - dot - 1);
      std::size_t nz = digits.find_first_not_of('0');
      digits = nz == std::string::npos ? "0" : digits.substr(nz);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("malformed rational '" + text + "'");
      Rational q{Integer(digits)};
      if (negative) q = -q;
      Integer p10 = mp::pow(Integer(10), static_cast<unsigned>(std::llabs(exp10)));
      return exp10 >= 0 ? Rational(q * p10) : Rational(q / p10);
    }
    auto integer = [&](std::string t) {
      bool neg = !t.empty() && t[0] == '-';
      if (!t.empty() && (t[0] == '-' || t[0] == '+')) t = t.substr(1);
      if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("malformed rational '" + text + "'");
      std::size_t k = t.find_first_not_of('0');
      Integer v(k == std::string::npos ? std::string("0") : t.substr(k));
      return neg ? Integer(-v) : v;
    };
    Integer num = integer(text.substr(0, slash));
    Integer den = integer(text.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + text + "'");
    return Rational(num, den);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("malformed rational '" + text + "'");
  }
}

Rational exact_rational(const Real& x) {
  if (!boost::multiprecision::isfinite(x)) throw NumericError("non-finite value");
  if (x == 0) return 0;
  int e = 0;
  Real frac = frexp(abs(x), &e);  // abs(x) = frac * 2^e, frac in [0.5, 1)
  Real scaled = ldexp(frac, 113);  // integer below 2^113
  Real hi = floor(ldexp(scaled, -64));
  Real lo = scaled - ldexp(hi, 64);
  Integer m = (Integer(static_cast<unsigned long long>(hi)) << 64) +
              Integer(static_cast<unsigned long long>(lo));
  int shift = e - 113;
  Rational out = shift >= 0 ? Rational(m << shift) : Rational(m, Integer(1) << -shift);
  return x < 0 ? Rational(-out) : out;
}

// --- Coeff -----------------------------------------------------------------

Coeff::Coeff(Rational u) : u_(std::move(u)) {}

Coeff::Coeff(Rational u, Rational v, std::uint64_t m)
    : u_(std::move(u)), v_(std::move(v)), m_(m) {
  if (m_ != 0 && m_ != 1) {
    std::uint64_t s = 1, free = 1;
    squarefree_split(m_, &s, &free);
    v_ *= s;
    m_ = free;
  }
  canonicalize();
}

void Coeff::canonicalize() {
  if (m_ == 0) {
    v_ = 0;
    m_ = 1;
  } else if (m_ == 1) {
    u_ += v_;
    v_ = 0;
  }
  if (v_ == 0) m_ = 1;
}

Coeff Coeff::sqrt_of(const Rational& q) {
  if (q < 0) throw PreconditionError("square root of a negative rational");
  if (q == 0) return Coeff();
  Integer n = mp::numerator(q) * mp::denominator(q);
  if (n > Integer(std::numeric_limits<std::uint64_t>::max()))
    throw NotRepresentable("radicand too large");
  std::uint64_t s = 1, m = 1;
  squarefree_split(static_cast<std::uint64_t>(n), &s, &m);
  Rational scale(Integer(s), mp::denominator(q));
  if (m == 1) return Coeff(scale);
  return Coeff(0, scale, m);
}

int Coeff::sign() const {
  int su = u_ > 0 ? 1 : (u_ < 0 ? -1 : 0);
  int sv = v_ > 0 ? 1 : (v_ < 0 ? -1 : 0);
  if (sv == 0) return su;
  if (su == 0 || su == sv) return sv;
  return u_ * u_ > v_ * v_ * m_ ? su : sv;
}

Real Coeff::to_real() const {
  if (v_ == 0) return subexp::to_real(u_);
  return subexp::to_real(u_) + subexp::to_real(v_) * sqrt(Real(m_));
}

Real Coeff::magnitude() const {
  if (v_ == 0) return abs(subexp::to_real(u_));
  return abs(subexp::to_real(u_)) + abs(subexp::to_real(v_)) * sqrt(Real(m_));
}

std::string Coeff::str() const {
  if (v_ == 0) return to_string(u_);
  std::string out = to_string(u_);
  std::string vs = to_string(v_);
  if (v_ > 0) out += "+";
  return out + vs + "*sqrt(" + std::to_string(m_) + ")";
}

Coeff Coeff::parse(const std::string& text) {
  std::size_t k = text.find("*sqrt(");
  if (k == std::string::npos) return Coeff(parse_rational(text));
  std::size_t close = text.find(')', k);
  if (close == std::string::npos || close + 1 != text.size())
    throw ParseError("malformed coefficient '" + text + "'");
  std::size_t split = std::string::npos;
  for (std::size_t i = k; i-- > 1;) {
    if ((text[i] == '+' || text[i] == '-') && text[i - 1] != 'e' && text[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  Rational u = 0;
  std::string vtext;
  if (split == std::string::npos) {
    vtext = text.substr(0, k);
  } else {
    u = parse_rational(text.substr(0, split));
    vtext = text.substr(split, k - split);
  }
  if (!vtext.empty() && vtext[0] == '+') vtext = vtext.substr(1);
  Rational v = parse_rational(vtext);
  std::uint64_t m = 0;
  try {
    m = std::stoull(text.substr(k + 6, close - k - 6));
  } catch (const std::exception&) {
    throw ParseError("malformed radicand in '" + text + "'");
  }
  return Coeff(u, v, m);
}

Coeff Coeff::operator-() const {
  Coeff out = *this;
  out.u_ = -u_;
  out.v_ = -v_;
  return out;
}

Coeff operator+(const Coeff& x, const Coeff& y) {
  if (x.v_ != 0 && y.v_ != 0 && x.m_ != y.m_)
    throw NotRepresentable("sum of different radicals");
  Coeff out;
  out.u_ = x.u_ + y.u_;
  out.v_ = x.v_ + y.v_;
  out.m_ = x.v_ != 0 ? x.m_ : y.m_;
  out.canonicalize();
  return out;
}

Coeff operator-(const Coeff& x, const Coeff& y) { return x + (-y); }

Coeff operator*(const Coeff& x, const Coeff& y) {
  if (x.v_ != 0 && y.v_ != 0 && x.m_ != y.m_)
    throw NotRepresentable("product of different radicals");
  Coeff out;
  std::uint64_t m = x.v_ != 0 ? x.m_ : y.m_;
  out.u_ = x.u_ * y.u_ + x.v_ * y.v_ * m;
  out.v_ = x.u_ * y.v_ + x.v_ * y.u_;
  out.m_ = m;
  out.canonicalize();
  return out;
}

// --- ExpTerm ---------------------------------------------------------------

ExpTerm::ExpTerm(Coeff c, Rational a, Rational b)
    : coeff_(std::move(c)), a_(std::move(a)), b_(std::move(b)) {
  if (b_ < 0) throw PreconditionError("negative exponent radicand");
  Rational root;
  if (b_ != 0 && is_rational_square(b_, &root)) {
    a_ += root;
    b_ = 0;
  }
  const Real ah = to_real(a_);
  const Real rh = b_ == 0 ? Real(0) : Real(sqrt(to_real(b_)));
  expo_ = ah + rh;
  expo_mag_ = abs(ah) + rh;
  coeff_hp_ = coeff_.to_real();
}

ExpTerm ExpTerm::with_coeff(Coeff c) const {
  ExpTerm out = *this;
  out.coeff_ = std::move(c);
  out.coeff_hp_ = out.coeff_.to_real();
  return out;
}

std::strong_ordering compare_exponents(const Rational& a1, const Rational& b1,
                                       const Rational& a2, const Rational& b2) {
  // sign of d + (sqrt(b1) - sqrt(b2)), d = a1 - a2
  const Rational d = a1 - a2;
  const int sd = d > 0 ? 1 : (d < 0 ? -1 : 0);
  const int st = b1 > b2 ? 1 : (b1 < b2 ? -1 : 0);
  int s = 0;
  if (st == 0) {
    s = sd;
  } else if (sd == 0 || sd == st) {
    s = st;
  } else {
    // Opposite signs: compare d^2 with (sqrt(b1) - sqrt(b2))^2.
    const Rational k = d * d - b1 - b2;
    int diff = 0;  // sign(d^2 - t^2) = sign(k + 2 sqrt(b1 b2))
    if (k >= 0) {
      diff = (k == 0 && b1 * b2 == 0) ? 0 : 1;
    } else {
      const Rational g = 4 * b1 * b2 - k * k;
      diff = g > 0 ? 1 : (g < 0 ? -1 : 0);
    }
    s = diff > 0 ? sd : (diff < 0 ? st : 0);
  }
  if (s > 0) return std::strong_ordering::greater;
  if (s < 0) return std::strong_ordering::less;
  return std::strong_ordering::equal;
}

namespace {

std::strong_ordering term_order(const ExpTerm& x, const ExpTerm& y) {
  const Real& ex = x.exponent_approx();
  const Real& ey = y.exponent_approx();
  const Real tol = 64 * kUnit * (1 + std::max(abs(ex), abs(ey)));
  if (ex - ey > tol) return std::strong_ordering::greater;
  if (ey - ex > tol) return std::strong_ordering::less;
  return compare_exponents(x.a(), x.b(), y.a(), y.b());
}

}  // namespace

// --- ExpReal ---------------------------------------------------------------

ExpReal::ExpReal(const Rational& q) {
  if (q != 0) terms_.emplace_back(Coeff(q), Rational(0));
}

ExpReal ExpReal::term(const Coeff& c, const Rational& a, const Rational& b) {
  ExpReal out;
  if (!c.is_zero()) out.terms_.emplace_back(c, a, b);
  return out;
}

ExpReal ExpReal::exp(const Rational& a, const Rational& b) {
  return term(Coeff(Rational(1)), a, b);
}

ExpReal ExpReal::from_real(const Real& x) { return ExpReal(exact_rational(x)); }

ExpReal ExpReal::from_sorted(std::vector<ExpTerm> terms) {
  ExpReal out;
  out.terms_ = std::move(terms);
  return out;
}

int ExpReal::sign() const {
  if (terms_.empty()) return 0;
  if (terms_.size() == 1) return terms_[0].coeff().sign();
  Evaluated e = evaluate(terms_, Real(0.5));
  return e.sum > 0 ? 1 : -1;
}

Real ExpReal::approx() const {
  if (terms_.empty()) return 0;
  if (terms_.size() == 1) return terms_[0].coeff_approx() * mp::exp(terms_[0].exponent_approx());
  Evaluated e = evaluate(terms_, Real(kEvalTarget));
  return e.sum * mp::exp(e.exponent);
}

Real ExpReal::log_abs() const {
  if (terms_.empty()) return -std::numeric_limits<Real>::infinity();
  Evaluated e = evaluate(terms_, Real(kEvalTarget));
  return log(abs(e.sum)) + e.exponent;
}

ExpReal ExpReal::operator-() const {
  ExpReal out = *this;
  for (ExpTerm& t : out.terms_) t = t.with_coeff(-t.coeff());
  return out;
}

ExpReal operator+(const ExpReal& x, const ExpReal& y) {
  if (x.terms_.empty()) return y;
  if (y.terms_.empty()) return x;
  std::vector<ExpTerm> out;
  out.reserve(x.terms_.size() + y.terms_.size());
  std::size_t i = 0, j = 0;
  while (i < x.terms_.size() && j < y.terms_.size()) {
    auto ord = term_order(x.terms_[i], y.terms_[j]);
    if (ord == std::strong_ordering::greater) {
      out.push_back(x.terms_[i++]);
    } else if (ord == std::strong_ordering::less) {
      out.push_back(y.terms_[j++]);
    } else {
      Coeff c = x.terms_[i].coeff() + y.terms_[j].coeff();
      if (!c.is_zero()) out.push_back(x.terms_[i].with_coeff(std::move(c)));
      ++i;
      ++j;
    }
  }
  for (; i < x.terms_.size(); ++i) out.push_back(x.terms_[i]);
  for (; j < y.terms_.size(); ++j) out.push_back(y.terms_[j]);
  return ExpReal::from_sorted(std::move(out));
}

ExpReal operator-(const ExpReal& x, const ExpReal& y) { return x + (-y); }

ExpReal operator*(const ExpReal& x, const Coeff& c) {
  if (c.is_zero()) return ExpReal();
  std::vector<ExpTerm> out;
  out.reserve(x.terms_.size());
  for (const ExpTerm& t : x.terms_) out.push_back(t.with_coeff(t.coeff() * c));
  return ExpReal::from_sorted(std::move(out));
}

ExpReal operator*(const ExpReal& x, const ExpReal& y) {
  ExpReal out;
  for (const ExpTerm& s : x.terms_) {
    for (const ExpTerm& t : y.terms_) {
      Rational b;
      if (s.b() == 0) {
        b = t.b();
      } else if (t.b() == 0) {
        b = s.b();
      } else {
        Rational r;
        if (!is_rational_square(s.b() / t.b(), &r))
          throw NotRepresentable("exponent sum sqrt(b1)+sqrt(b2) is not of the form sqrt(b)");
        b = (1 + r) * (1 + r) * t.b();
      }
      out = out + ExpReal::term(s.coeff() * t.coeff(), s.a() + t.a(), b);
    }
  }
  return out;
}

namespace {

template <unsigned D>
int separated_sign(const ExpReal& x, const ExpReal& y) {
  using F = mp::number<mp::cpp_bin_float<D>, mp::et_off>;
  Partial<F> px = evaluate_in<F>(x.terms());
  Partial<F> py = evaluate_in<F>(y.terms());
  F vx = px.sum * exp(px.exponent), vy = py.sum * exp(py.exponent);
  const F u = std::numeric_limits<F>::epsilon();
  F ex = px.abs_err * exp(px.exponent) + 8 * u * abs(vx) * (abs(px.exponent) + 1);
  F ey = py.abs_err * exp(py.exponent) + 8 * u * abs(vy) * (abs(py.exponent) + 1);
  if (vx - ex > vy + ey) return 1;
  if (vy - ey > vx + ex) return -1;
  return 0;
}

// Ordering when x - y has same-exponent terms with different radicals.
int sign_by_evaluation(const ExpReal& x, const ExpReal& y) {
  if (int s = separated_sign<60>(x, y)) return s;
  if (int s = separated_sign<250>(x, y)) return s;
  if (int s = separated_sign<1000>(x, y)) return s;
  return 0;
}

}  // namespace

std::strong_ordering operator<=>(const ExpReal& x, const ExpReal& y) {
  if (x == y) return std::strong_ordering::equal;
  int s = 0;
  try {
    s = (x - y).sign();
  } catch (const NotRepresentable&) {
    s = sign_by_evaluation(x, y);
  }
  if (s > 0) return std::strong_ordering::greater;
  if (s < 0) return std::strong_ordering::less;
  return std::strong_ordering::equal;
}

std::string ExpReal::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const ExpTerm& t : terms_) {
    if (!out.empty()) out += " + ";
    out += "(" + t.coeff().str() + ")*e^(" + to_string(t.a());
    if (t.b() != 0) out += "+sqrt(" + to_string(t.b()) + ")";
    out += ")";
  }
  return out;
}

ExpReal exp_add(const ExpReal& x, const ExpReal& y) { return x + y; }
ExpReal exp_sub(const ExpReal& x, const ExpReal& y) { return x - y; }
std::strong_ordering exp_cmp(const ExpReal& x, const ExpReal& y) { return x <=> y; }

FloatResult exp_to_float(const ExpReal& x) {
  FloatResult out;
  if (x.is_zero()) return out;
  Evaluated e = evaluate(x.terms(), Real(kEvalTarget));
  out.sign = e.sum > 0 ? 1 : -1;
  out.log_abs = log(abs(e.sum)) + e.exponent;
  out.rel_error = e.rel;
  if (out.log_abs > Real(std::log(DBL_MAX))) {
    out.overflow = true;
    return out;
  }
  out.value = e.sum * exp(e.exponent);
  out.rel_error += 2 * kUnit;
  return out;
}

// --- Scaled ----------------------------------------------------------------

Scaled::Scaled(Real x) : mant_(x) { rebalance(); }

void Scaled::rebalance() {
  if (mant_ == 0) {
    log_ = 0;
    return;
  }
  const Real a = abs(mant_);
  if (a > Real(1e300) || a < Real(1e-300)) {
    int e = 0;
    mant_ = frexp(mant_, &e);
    log_ += Real(e) * boost::math::constants::ln_two<Real>();
  }
}

Real Scaled::log_abs() const {
  if (mant_ == 0) return -std::numeric_limits<Real>::infinity();
  return log(abs(mant_)) + log_;
}

Real Scaled::value() const {
  if (log_ == 0) return mant_;
  return mant_ * exp(log_);
}

Scaled operator+(const Scaled& x, const Scaled& y) {
  if (x.mant_ == 0) return y;
  if (y.mant_ == 0) return x;
  if (x.log_ == y.log_) return Scaled(x.mant_ + y.mant_, x.log_);
  const Scaled& big = x.log_abs() >= y.log_abs() ? x : y;
  const Scaled& small = &big == &x ? y : x;
  const Real d = small.log_ - big.log_;
  if (d < Real(-20000)) return big;
  return Scaled(big.mant_ + small.mant_ * exp(d), big.log_);
}

Scaled operator*(const Scaled& x, const Scaled& y) {
  if (x.mant_ == 0 || y.mant_ == 0) return Scaled();
  return Scaled(x.mant_ * y.mant_, x.log_ + y.log_);
}

Scaled operator/(const Scaled& x, const Scaled& y) {
  if (y.mant_ == 0) throw NumericError("division by zero");
  if (x.mant_ == 0) return Scaled();
  return Scaled(x.mant_ / y.mant_, x.log_ - y.log_);
}

Real ratio(const Scaled& num, const Scaled& den) {
  if (den.is_zero()) throw NumericError("division by zero");
  if (num.is_zero()) return 0;
  return (num.mant() / den.mant()) * exp(num.log_part() - den.log_part());
}

std::string format_real(const Real& x, int digits) {
  char buf[128];
  quadmath_snprintf(buf, sizeof buf, "%.*Qe", digits - 1, x.backend().value());
  return buf;
}

Real parse_real(const std::string& text) {
  char* end = nullptr;
  __float128 v = strtoflt128(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw ParseError("malformed number '" + text + "'");
  return Real(v);
}

}  // namespace subexp
