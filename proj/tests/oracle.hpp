#pragma once

// 50-digit MPFR reference evaluation, independent of the library's float128
// and cpp_bin_float paths.

#include <boost/multiprecision/mpfr.hpp>

#include "subexp/hireal.hpp"

namespace oracle {

using Big = boost::multiprecision::mpfr_float_50;

using Wide = boost::multiprecision::mpfr_float_100;

template <class B = Big>
B big(const subexp::Rational& q) {
  return B(boost::multiprecision::numerator(q).str()) /
         B(boost::multiprecision::denominator(q).str());
}

template <class B = Big>
B big(const subexp::Coeff& c) {
  B out = big<B>(c.u());
  if (c.v() != 0) out += big<B>(c.v()) * sqrt(B(c.m()));
  return out;
}

template <class B = Big>
B big(const subexp::ExpReal& x) {
  B out = 0;
  for (const auto& t : x.terms()) {
    B e = big<B>(t.a());
    if (t.b() != 0) e += sqrt(big<B>(t.b()));
    out += big<B>(t.coeff()) * exp(e);
  }
  return out;
}

inline Big big(const subexp::Real& x) {
  return big(subexp::exact_rational(x));
}

template <class B>
double rel_diff(const B& a, const B& b) {
  if (b == 0) return static_cast<double>(abs(a));
  return static_cast<double>(abs(a - b) / abs(b));
}

}  // namespace oracle
