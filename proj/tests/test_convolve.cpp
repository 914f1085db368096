#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "subexp/convolve.hpp"
#include "subexp/errors.hpp"
#include "subexp/gallery.hpp"

using namespace subexp;
using oracle::Big;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

double rel(const Real& a, const Big& b) { return oracle::rel_diff(oracle::big(a), b); }

double rel(const Real& a, const Real& b) { return static_cast<double>(abs(a - b) / abs(b)); }

const Ex1& ex1() {
  static const Ex1 e = build_ex1();
  return e;
}

const Ex2& ex2() {
  static const Ex2 e = build_ex2();
  return e;
}

}  // namespace

TEST(Convolve, ExponentialSelfConvolution) {
  const PiecewiseDensity f = build_oracle_exp(q(1));
  const Big c = 1 - exp(Big(-40));
  for (int k = 1; k <= 100; ++k) {
    const Rational x(2 * k, 5);
    const Big X = oracle::big(x);
    EXPECT_LT(rel(conv_eval(f, f, ExpReal(x)), X * exp(-X) / (c * c)), 1e-28) << k;
  }
  // Beyond 40 the support of f*f is cut by the truncation: int_{x-40}^{40}.
  const Big X(60);
  EXPECT_LT(rel(conv_eval(f, f, ExpReal(q(60))), (80 - X) * exp(-X) / (c * c)), 1e-28);
  EXPECT_EQ(conv_eval(f, f, ExpReal(q(81))), Real(0));
}

TEST(Convolve, ExponentialSubexpRatio) {
  const PiecewiseDensity f = build_oracle_exp(q(1));
  const Big c = 1 - exp(Big(-40));
  for (int x : {1, 5, 17, 35})
    EXPECT_LT(rel(self_conv_ratio(f, 0, ExpReal(q(x))), Big(x) / (2 * c)), 1e-28) << x;
}

TEST(Convolve, RatesOfDifferentSign) {
  const PiecewiseDensity f = build_oracle_exp(q(1));
  const PiecewiseDensity g = build_oracle_exp(q(3));
  // int_0^x e^{-(x-y)} 3 e^{-3y} dy = 3/2 (e^{-x} - e^{-3x})
  const Big cf = 1 - exp(Big(-40)), cg = 1 - exp(Big(-120));
  for (int x : {1, 10, 30}) {
    const Big X(x);
    const Big want = Big(3) / 2 * (exp(-X) - exp(-3 * X)) / (cf * cg);
    EXPECT_LT(rel(conv_eval(f, g, ExpReal(q(x))), want), 1e-28) << x;
  }
}

// Exact closed forms against the brute-force tanh-sinh route.
TEST(Convolve, MatchesQuadratureOnPolylines) {
  for (int n : {5, 7})
    for (int i : {0, 2, 5}) {
      const ExpReal x = named_point("ex1", n, i);
      const Real exact = conv_eval(ex1().f, ex1().g, x);
      const Real brute = conv_eval_quadrature(ex1().f, ex1().g, x.approx(), Real(1e-20));
      EXPECT_LT(rel(exact, brute), 1e-15) << n << "," << i;
    }
}

TEST(Convolve, MatchesQuadratureWithWeibull) {
  const Ex4 e = build_ex4();
  for (int n : {5, 8}) {
    const ExpReal x = named_point("ex2", n, 1);
    const Real exact = conv_eval(e.f, e.g, x);
    const Real brute = conv_eval_quadrature(e.f, e.g, x.approx(), Real(1e-20));
    EXPECT_LT(rel(exact, brute), 1e-12) << n;
  }
  const Real ww = conv_eval(e.g, e.g, ExpReal(q(50)));
  EXPECT_LT(rel(ww, conv_eval_quadrature(e.g, e.g, Real(50), Real(1e-20))), 1e-12);
}

TEST(Convolve, Commutative) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(2, 30);
  const Ex4 e4 = build_ex4();
  for (int k = 0; k < 20; ++k) {
    const ExpReal x = ExpReal::exp(exact_rational(Real(u(rng))));
    EXPECT_LT(rel(conv_eval(ex1().f, ex1().g, x), conv_eval(ex1().g, ex1().f, x)), 1e-28);
    EXPECT_LT(rel(conv_eval(e4.f, e4.g, x), conv_eval(e4.g, e4.f, x)), 1e-20);
  }
}

TEST(Convolve, PartialIsAdditive) {
  const PiecewiseDensity& h = ex1().h;
  for (int n : {10, 20}) {
    const ExpReal x = named_point("ex1", n, 3);
    const ExpReal mid = ExpReal::exp(q(n - 1));
    const Real whole = conv_eval(h, h, x);
    const Real parts = partial_conv(h, h, x, ExpReal(0), mid) + partial_conv(h, h, x, mid, x);
    EXPECT_LT(rel(parts, whole), 1e-28) << n;
  }
  EXPECT_THROW(partial_conv(h, h, ExpReal(q(100)), ExpReal(q(5)), ExpReal(q(4))), PreconditionError);
}

TEST(Convolve, FloatPlanAgreesWithExactPlan) {
  for (int n : {5, 12, 25, 40}) {
    const ExpReal x = named_point("ex1", n, 4) + ExpReal(q(1, 3));
    const Scaled a = conv_scaled(ex1().f, ex1().g, x);
    const Scaled b = conv_scaled_approx(ex1().f, ex1().g, x.approx());
    // x - knot rounds at ulp(x); the head segments are e^-4 wide.
    EXPECT_LT(abs(ratio(b, a) - 1), Real(1e-18)) << n;
  }
}

TEST(Convolve, PlanWindowsTile) {
  const ExpReal x = named_point("ex1", 8, 2);
  const ConvPlan plan = conv_plan(ex1().f, ex1().g, x);
  ASSERT_FALSE(plan.windows.empty());
  for (std::size_t i = 0; i + 1 < plan.windows.size(); ++i) {
    EXPECT_TRUE(plan.windows[i].y_hi == plan.windows[i + 1].y_lo);
    EXPECT_TRUE(plan.windows[i].u_hi.exact == x - plan.windows[i].y_hi.exact);
  }
}

// Reference values: tests/oracle/gallery_oracle.py (mpmath, 60 digits).
TEST(Convolve, SubexpRatioMatchesOracle) {
  const std::vector<std::pair<int, const char*>> h = {
      {10, "0.9010649449344613337175114"},
      {20, "0.9354964256275996931080732"},
      {40, "1.002495381109452278482538"}};
  for (const auto& [n, v] : h)
    EXPECT_LT(rel(self_conv_ratio(ex1().h, 0, named_point("ex1", n, 0)), Big(v)), 1e-22) << n;
  const std::vector<std::pair<int, const char*>> g = {
      {10, "1.100161099361990482780916"}, {15, "0.9992796429766989513338007"},
      {20, "0.9961957875481055896287612"}, {25, "0.9976174895007544786163133"},
      {30, "0.9988271068661500693148164"}, {35, "0.9996432768449196458922249"},
      {40, "1.000188706682305143856928"}};
  for (const auto& [n, v] : g)
    EXPECT_LT(rel(self_conv_ratio(ex2().g, 0, named_point("ex2", n, 0)), Big(v)), 1e-22) << n;
}

TEST(Convolve, ParallelMapKeepsOrder) {
  std::vector<int> in(50);
  for (int i = 0; i < 50; ++i) in[i] = i;
  const std::vector<int> out = parallel_map(in, [](int v) { return v * v; }, 4);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(out[i], i * i);
  EXPECT_THROW(parallel_map(in, [](int v) { return v == 7 ? throw NumericError("x"), 0 : v; }, 3),
               NumericError);
}
