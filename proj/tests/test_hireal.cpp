#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "subexp/errors.hpp"
#include "subexp/hireal.hpp"

using namespace subexp;
using oracle::Big;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

ExpReal e_pow(long a) { return ExpReal::exp(q(a)); }

class RandomExp {
 public:
  explicit RandomExp(unsigned seed) : rng_(seed) {}

  ExpReal term() {
    std::uniform_int_distribution<int> num(-9, 9), den(1, 4), expo(-12, 12), root(0, 3),
        rad(0, 2);
    int n = num(rng_);
    if (n == 0) n = 1;
    Coeff c(q(n, den(rng_)));
    static const std::uint64_t kRad[] = {1, 2, 3};
    std::uint64_t m = kRad[rad(rng_)];
    if (m != 1) c = Coeff(q(num(rng_), den(rng_)), q(n, den(rng_)), m);
    static const long kB[] = {0, 2, 5, 7};
    return ExpReal::term(c, q(expo(rng_), den(rng_)), q(kB[root(rng_)]));
  }

  // Terms share one radical so every sum stays representable.
  ExpReal value(int max_terms = 4) {
    std::uniform_int_distribution<int> count(1, max_terms);
    ExpReal out;
    int k = count(rng_);
    for (int i = 0; i < k; ++i) {
      ExpReal t = term();
      try {
        out = out + t;
      } catch (const NotRepresentable&) {
      }
    }
    return out;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

TEST(ExpAdd, ExactCancellation) {
  EXPECT_TRUE((e_pow(4) + (-e_pow(4))).is_zero());
}

TEST(ExpAdd, MidpointHasTwoTerms) {
  ExpReal mid = ExpReal::exp(4) * Coeff(q(1, 2)) + ExpReal::exp(5) * Coeff(q(1, 2));
  ASSERT_EQ(mid.terms().size(), 2u);
  EXPECT_EQ(mid.terms()[0].a(), 5);
  EXPECT_EQ(mid.terms()[1].a(), 4);
}

TEST(ExpAdd, SubtractionLeavesSmallTermExactly) {
  ExpReal x = (e_pow(16) + e_pow(12)) - e_pow(16);
  EXPECT_EQ(x, e_pow(12));
}

TEST(ExpTerm, SquareRadicandFoldsIntoLinearPart) {
  ExpReal x = ExpReal::exp(q(1), q(9, 4));
  ASSERT_EQ(x.terms().size(), 1u);
  EXPECT_EQ(x.terms()[0].a(), q(5, 2));
  EXPECT_EQ(x.terms()[0].b(), 0);
  EXPECT_EQ(ExpReal::exp(q(6)), ExpReal::exp(0, 36));
}

TEST(ExpCmp, RootExponentTerms) {
  ExpReal lhs = ExpReal::exp(0, 36) * Coeff(3) + ExpReal::exp(1, 36);
  ExpReal rhs = ExpReal::exp(0, 36) * Coeff(2) + ExpReal::exp(1, 36);
  EXPECT_EQ(exp_cmp(lhs, rhs), std::strong_ordering::greater);
  EXPECT_EQ(exp_cmp(lhs, lhs), std::strong_ordering::equal);
}

TEST(ExpCmp, GapBelowDoublePrecision) {
  const long n = 36;
  ExpReal a5 = (e_pow(n) + e_pow(n + 1)) * Coeff(q(1, 2));
  ExpReal r = ExpReal::exp(0, n);
  ExpReal a1 = a5 - r * Coeff(3) - ExpReal::exp(1, n);
  EXPECT_EQ(exp_cmp(a1, a5), std::strong_ordering::less);
  Big gap = oracle::big(a5) - oracle::big(a1);
  EXPECT_GT(gap, 0);
  EXPECT_NEAR(static_cast<double>(gap), 2306.0, 1.0);
  EXPECT_LT(static_cast<double>(gap / oracle::big(a5)), 1e-12);
}

TEST(ExpCmp, IrrationalExponentComparison) {
  // 1 + sqrt(2) vs sqrt(6): 2.414 < 2.449
  EXPECT_EQ(compare_exponents(1, 2, 0, 6), std::strong_ordering::less);
  EXPECT_EQ(compare_exponents(0, 6, 1, 2), std::strong_ordering::greater);
  // 3 - sqrt(2) vs sqrt(3) - 0: 1.586 < 1.732
  EXPECT_EQ(compare_exponents(3, 0, 0, 3), std::strong_ordering::greater);
  EXPECT_EQ(compare_exponents(q(-1), 8, 0, 3), std::strong_ordering::greater);
  EXPECT_EQ(compare_exponents(q(2), 3, q(2), 3), std::strong_ordering::equal);
}

TEST(ExpToFloat, LibraryConstant) {
  FloatResult r = exp_to_float(e_pow(4));
  EXPECT_FALSE(r.overflow);
  EXPECT_LT(oracle::rel_diff(oracle::big(r.value), exp(Big(4))), 1e-32);
  EXPECT_NEAR(static_cast<double>(r.value), 54.598150033144236, 1e-12);
}

TEST(ExpToFloat, FirstBreakpointOfExampleOne) {
  ExpReal b4 = (e_pow(4) + e_pow(5)) * Coeff(q(1, 2)) + ExpReal::exp(0, 4);
  FloatResult r = exp_to_float(b4);
  Big ref = (exp(Big(4)) + exp(Big(5))) / 2 + exp(Big(2));
  EXPECT_LT(oracle::rel_diff(oracle::big(r.value), ref), 1e-30);
  EXPECT_NEAR(static_cast<double>(r.value), 108.89471066679107, 1e-12);
  EXPECT_LE(r.rel_error, Real(1e-25));
}

TEST(ExpToFloat, OverflowReportsLog) {
  FloatResult r = exp_to_float(ExpReal::exp(900));
  EXPECT_TRUE(r.overflow);
  EXPECT_EQ(r.sign, 1);
  EXPECT_NEAR(static_cast<double>(r.log_abs), 900.0, 1e-12);
}

TEST(ExpToFloat, NearCancellationEscalatesPrecision) {
  // e^r - 3 with r the float128 rounding of log 3: the two terms agree to
  // about 1e-34 relative.
  Rational r = exact_rational(log(Real(3)));
  ExpReal x = ExpReal::exp(r) - ExpReal(3);
  FloatResult f = exp_to_float(x);
  oracle::Wide ref = oracle::big<oracle::Wide>(x);
  oracle::Wide got = oracle::big<oracle::Wide>(exact_rational(f.value));
  EXPECT_LT(oracle::rel_diff(got, ref), 1e-25);
  EXPECT_EQ(f.sign, ref > 0 ? 1 : -1);
}

TEST(Coeff, RadicalArithmetic) {
  Coeff s = Coeff::sqrt_of(q(10));
  EXPECT_EQ(s.m(), 10u);
  EXPECT_EQ(s * s, Coeff(q(10)));
  Coeff t = Coeff::sqrt_of(q(12, 7));  // 2 sqrt(21) / 7
  EXPECT_EQ(t.m(), 21u);
  EXPECT_EQ(t.v(), q(2, 7));
  EXPECT_EQ(Coeff::sqrt_of(q(9, 4)), Coeff(q(3, 2)));
  EXPECT_EQ((Coeff(q(2)) - s).sign(), -1);
  EXPECT_EQ((Coeff(q(4)) - s).sign(), 1);
  EXPECT_THROW(Coeff::sqrt_of(q(2)) + Coeff::sqrt_of(q(3)), NotRepresentable);
  EXPECT_EQ(Coeff::parse(s.str()), s);
  Coeff mixed(q(-3, 4), q(-5, 2), 7);
  EXPECT_EQ(Coeff::parse(mixed.str()), mixed);
}

TEST(ExpMul, ExponentFieldClosure) {
  ExpReal x = ExpReal::exp(2, 3) * ExpReal::exp(1, 12);  // sqrt3 + 2 sqrt3 = sqrt 27
  ASSERT_EQ(x.terms().size(), 1u);
  EXPECT_EQ(x.terms()[0].a(), 3);
  EXPECT_EQ(x.terms()[0].b(), 27);
  EXPECT_THROW(ExpReal::exp(0, 2) * ExpReal::exp(0, 3), NotRepresentable);
}

TEST(ExpAddProperty, AssociativeAndCommutative) {
  RandomExp gen(11);
  for (int i = 0; i < 500; ++i) {
    ExpReal x = gen.value(), y = gen.value(), z = gen.value();
    try {
      EXPECT_EQ(x + y, y + x);
      EXPECT_EQ((x + y) + z, x + (y + z));
    } catch (const NotRepresentable&) {
    }
  }
}

TEST(ExpAddProperty, AddThenSubtractIsIdentity) {
  RandomExp gen(12);
  for (int i = 0; i < 1000; ++i) {
    ExpReal x = gen.value(), y = gen.value();
    try {
      EXPECT_EQ(x + y - y, x);
    } catch (const NotRepresentable&) {
    }
  }
}

TEST(ExpCmpProperty, AgreesWithFiftyDigitOracle) {
  RandomExp gen(13);
  std::uniform_int_distribution<int> gap_exp(1, 90);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    ExpReal x = gen.value();
    ExpReal y;
    if (i % 2 == 0) {
      y = gen.value();
    } else {
      // Perturb by a term far below the leading magnitude.
      if (x.is_zero()) continue;
      Rational lead = x.terms()[0].a();
      ExpReal bump = ExpReal::exp(lead - gap_exp(gen.rng())) * Coeff(i % 4 == 1 ? 1 : -1);
      try {
        y = x + bump;
      } catch (const NotRepresentable&) {
        continue;
      }
    }
    Big bx = oracle::big(x), by = oracle::big(y);
    Big scale = std::max(abs(bx), abs(by));
    if (scale == 0) continue;
    if (abs(bx - by) / scale < Big("1e-40")) continue;
    auto expected = bx < by ? std::strong_ordering::less : std::strong_ordering::greater;
    ASSERT_EQ(exp_cmp(x, y), expected) << x.str() << " vs " << y.str();
    ++checked;
  }
  EXPECT_GT(checked, 9000);
}

TEST(ExpToFloatProperty, WithinReportedBound) {
  RandomExp gen(14);
  for (int i = 0; i < 2000; ++i) {
    ExpReal x = gen.value(6);
    if (x.is_zero()) continue;
    FloatResult f = exp_to_float(x);
    ASSERT_FALSE(f.overflow);
    Big ref = oracle::big(x);
    double err = oracle::rel_diff(oracle::big(f.value), ref);
    EXPECT_LE(err, static_cast<double>(f.rel_error) + 1e-40);
    EXPECT_LE(f.rel_error, Real(1e-25));
  }
}

TEST(Scaled, ExtendedRangeArithmetic) {
  Scaled tiny = Scaled::exp_of(Real(-1e17));
  Scaled prod = tiny * Scaled::exp_of(Real(1e17)) * Scaled(Real(3));
  EXPECT_NEAR(static_cast<double>(prod.value()), 3.0, 1e-12);
  Scaled sum = tiny + tiny;
  EXPECT_NEAR(static_cast<double>(ratio(sum, tiny)), 2.0, 1e-30);
  EXPECT_EQ((Scaled(Real(2)) + tiny).value(), Real(2));
}

TEST(Parsing, RationalForms) {
  EXPECT_EQ(parse_rational("3/4"), q(3, 4));
  EXPECT_EQ(parse_rational("-7"), q(-7));
  EXPECT_EQ(parse_rational("0.125"), q(1, 8));
  EXPECT_EQ(parse_rational("1e-3"), q(1, 1000));
  EXPECT_THROW(parse_rational("x/2"), ParseError);
  EXPECT_THROW(parse_rational("1/0"), ParseError);
}

TEST(Parsing, RealRoundTrip) {
  Real x = exp(Real(1)) / 7;
  EXPECT_EQ(parse_real(format_real(x, 40)), x);
  EXPECT_EQ(exact_rational(Real(0.375)), q(3, 8));
  EXPECT_EQ(to_real(exact_rational(x)), x);
}
