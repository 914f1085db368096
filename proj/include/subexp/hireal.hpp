#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/float128.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace subexp {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Real = boost::multiprecision::float128;

Real to_real(const Rational& q);
std::string to_string(const Rational& q);
Rational parse_rational(const std::string& text);
// Exact binary value of a finite float.
Rational exact_rational(const Real& x);

// u + v*sqrt(m) with m squarefree; m == 1 whenever v == 0.
class Coeff {
 public:
  Coeff() = default;
  Coeff(Rational u);  // NOLINT: rationals embed implicitly
  Coeff(Rational u, Rational v, std::uint64_t m);

  // Exact sqrt(q) for q >= 0 with a radicand small enough to factor.
  static Coeff sqrt_of(const Rational& q);

  const Rational& u() const { return u_; }
  const Rational& v() const { return v_; }
  std::uint64_t m() const { return m_; }
  bool is_zero() const { return u_ == 0 && v_ == 0; }
  bool is_rational() const { return v_ == 0; }
  int sign() const;
  Real to_real() const;
  // Bound on |u| + |v sqrt(m)|, used for rounding-error estimates.
  Real magnitude() const;
  std::string str() const;
  static Coeff parse(const std::string& text);

  Coeff operator-() const;
  friend Coeff operator+(const Coeff& x, const Coeff& y);
  friend Coeff operator-(const Coeff& x, const Coeff& y);
  friend Coeff operator*(const Coeff& x, const Coeff& y);
  friend bool operator==(const Coeff& x, const Coeff& y) = default;

 private:
  void canonicalize();

  Rational u_ = 0;
  Rational v_ = 0;
  std::uint64_t m_ = 1;
};

// coeff * e^{a + sqrt(b)}.  When b is a rational square its root is folded
// into a, so every exponent value has exactly one (a, b) representation.
class ExpTerm {
 public:
  ExpTerm(Coeff c, Rational a, Rational b = 0);

  const Coeff& coeff() const { return coeff_; }
  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  const Real& exponent_approx() const { return expo_; }
  const Real& coeff_approx() const { return coeff_hp_; }
  // |a| + sqrt(b), scale of the rounding error in exponent_approx().
  const Real& exponent_magnitude() const { return expo_mag_; }
  ExpTerm with_coeff(Coeff c) const;
  friend bool operator==(const ExpTerm& x, const ExpTerm& y) {
    return x.coeff_ == y.coeff_ && x.a_ == y.a_ && x.b_ == y.b_;
  }

 private:
  Coeff coeff_;
  Rational a_;
  Rational b_;
  Real expo_;
  Real expo_mag_;
  Real coeff_hp_;
};

// Exact ordering of exponents a1 + sqrt(b1) against a2 + sqrt(b2).
std::strong_ordering compare_exponents(const Rational& a1, const Rational& b1,
                                       const Rational& a2, const Rational& b2);

struct FloatResult {
  Real value = 0;     // zero when overflow is set
  Real rel_error = 0;  // bound on |value - x| / |x|
  bool overflow = false;
  Real log_abs = 0;    // log |x|, valid for nonzero x
  int sign = 0;
};

class ExpReal {
 public:
  ExpReal() = default;
  ExpReal(const Rational& q);  // NOLINT
  ExpReal(int q) : ExpReal(Rational(q)) {}  // NOLINT

  static ExpReal term(const Coeff& c, const Rational& a, const Rational& b = 0);
  // e^{a + sqrt(b)}
  static ExpReal exp(const Rational& a, const Rational& b = 0);
  // The exact binary value of x.
  static ExpReal from_real(const Real& x);

  const std::vector<ExpTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int sign() const;
  // Fast floating value; exact cancellation has already happened term-wise.
  Real approx() const;
  Real log_abs() const;

  ExpReal operator-() const;
  friend ExpReal operator+(const ExpReal& x, const ExpReal& y);
  friend ExpReal operator-(const ExpReal& x, const ExpReal& y);
  friend ExpReal operator*(const ExpReal& x, const Coeff& c);
  friend ExpReal operator*(const Coeff& c, const ExpReal& x) { return x * c; }
  // Throws NotRepresentable when an exponent sum leaves the a + sqrt(b) field.
  friend ExpReal operator*(const ExpReal& x, const ExpReal& y);
  ExpReal& operator+=(const ExpReal& y) { return *this = *this + y; }
  ExpReal& operator-=(const ExpReal& y) { return *this = *this - y; }

  friend bool operator==(const ExpReal& x, const ExpReal& y) {
    return x.terms_ == y.terms_;
  }
  friend std::strong_ordering operator<=>(const ExpReal& x, const ExpReal& y);

  std::string str() const;

 private:
  static ExpReal from_sorted(std::vector<ExpTerm> terms);
  std::vector<ExpTerm> terms_;  // strictly descending exponents
};

ExpReal exp_add(const ExpReal& x, const ExpReal& y);
ExpReal exp_sub(const ExpReal& x, const ExpReal& y);
std::strong_ordering exp_cmp(const ExpReal& x, const ExpReal& y);
// Values whose log exceeds the double range signal overflow and return the
// log instead.
FloatResult exp_to_float(const ExpReal& x);

// Extended-range number mant * e^{log}; tilted densities reach values
// like e^{-e^{40}} that no float format holds directly.
class Scaled {
 public:
  Scaled() = default;
  Scaled(Real x);  // NOLINT
  Scaled(Real mant, Real log) : mant_(mant), log_(log) { rebalance(); }
  static Scaled exp_of(Real t) { return Scaled(Real(1), t); }

  const Real& mant() const { return mant_; }
  const Real& log_part() const { return log_; }
  bool is_zero() const { return mant_ == 0; }
  int sign() const { return mant_ > 0 ? 1 : (mant_ < 0 ? -1 : 0); }
  // log |value|; -inf for zero.
  Real log_abs() const;
  // Plain float value; under/overflows to 0/inf outside the float128 range.
  Real value() const;

  Scaled operator-() const { return Scaled(-mant_, log_); }
  friend Scaled operator+(const Scaled& x, const Scaled& y);
  friend Scaled operator-(const Scaled& x, const Scaled& y) { return x + (-y); }
  friend Scaled operator*(const Scaled& x, const Scaled& y);
  friend Scaled operator/(const Scaled& x, const Scaled& y);
  Scaled& operator+=(const Scaled& y) { return *this = *this + y; }
  Scaled& operator*=(const Scaled& y) { return *this = *this * y; }
  friend bool operator==(const Scaled& x, const Scaled& y) {
    return x.mant_ == y.mant_ && x.log_ == y.log_;
  }

 private:
  void rebalance();
  Real mant_ = 0;
  Real log_ = 0;
};

// Ratio of two extended values as a plain float.
Real ratio(const Scaled& num, const Scaled& den);

std::string format_real(const Real& x, int digits);
Real parse_real(const std::string& text);

}  // namespace subexp
