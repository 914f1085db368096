#include <gtest/gtest.h>

#include <cmath>

#include "json.hpp"
#include "oracle.hpp"
#include "subexp/diagnose.hpp"
#include "subexp/errors.hpp"
#include "subexp/gallery.hpp"
#include "subexp/probes.hpp"

using namespace subexp;
using oracle::Big;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

double rel(const Real& a, const Big& b) { return oracle::rel_diff(oracle::big(a), b); }

std::vector<Real> logs(std::initializer_list<double> xs) {
  std::vector<Real> out;
  for (double x : xs) out.push_back(log(Real(x)));
  return out;
}

std::vector<Real> reals(std::initializer_list<double> xs) { return {xs.begin(), xs.end()}; }

const Ex1& ex1() {
  static const Ex1 e = build_ex1();
  return e;
}

}  // namespace

TEST(Verdict, PowerLawSlope) {
  const std::vector<Real> lx = logs({10, 20, 40, 80});
  std::vector<Real> v;
  for (const Real& l : lx) v.push_back(3 * exp(2 * l));
  const TrendFit t = fit_trend(lx, v);
  EXPECT_NEAR(static_cast<double>(t.slope), 2.0, 1e-25);
  EXPECT_NEAR(static_cast<double>(t.stderr_slope), 0.0, 1e-20);
  EXPECT_EQ(t.points, 4);
}

TEST(Verdict, Rules) {
  const std::vector<Real> lx = logs({10, 20, 30, 40, 50});
  EXPECT_EQ(classify(lx, reals({0.99, 0.995, 1.0, 1.0, 1.002})), Verdict::LimitOne);
  EXPECT_EQ(classify(lx, reals({0.5, 0.3, 0.1, 0.05, 0.01})), Verdict::LimitZero);
  EXPECT_EQ(classify(lx, reals({1, 2, 4, 8, 16})), Verdict::Diverging);
  EXPECT_EQ(classify(lx, reals({1, 3, 1, 3, 1})), Verdict::Inconclusive);
  // within 0.15 of one but still climbing fast
  EXPECT_NE(classify(lx, reals({0.2, 0.4, 0.86, 1.0, 1.14})), Verdict::LimitOne);
  // rising but too flat to diverge
  EXPECT_EQ(classify(lx, reals({2.0, 2.01, 2.02, 2.03, 2.04})), Verdict::Inconclusive);
}

TEST(Alpha, ParseRoundTrip) {
  for (const char* s : {"sqrtlog", "interval:1/2", "powlog:1/2", "expsqrtlog", "fixed:3"}) {
    const AlphaFunction a = AlphaFunction::parse(s);
    EXPECT_EQ(AlphaFunction::parse(a.str()).str(), a.str()) << s;
  }
  EXPECT_THROW(AlphaFunction::parse("bogus"), ParseError);
}

TEST(Alpha, IntervalPowerUsesIntervalIndex) {
  const AlphaFunction a = AlphaFunction::interval_power(q(1, 2));
  const Real want = exp(Real(10)) / sqrt(Real(10));
  EXPECT_LT(abs(a.approx(ExpReal::exp(q(10)) + ExpReal(1)) / want - 1), Real(1e-30));
  // x = e^11 still belongs to (e^10, e^11]
  EXPECT_LT(abs(a.approx(ExpReal::exp(q(11))) / want - 1), Real(1e-30));
  EXPECT_THROW(a(ExpReal(2)), PreconditionError);
}

TEST(Alpha, RejectsLargeWindow) {
  EXPECT_THROW(AlphaFunction::fixed(q(10))(ExpReal(q(15))), PreconditionError);
  EXPECT_THROW(AlphaFunction::sqrt_log_shift(0)(ExpReal(q(1, 2))), PreconditionError);
}

TEST(Scan, LongtailFlatInteriorIsOne) {
  const auto probes = parse_probes("m10..m40:5", "ex1", &ex1().h);
  const DiagnosticReport r = longtail_scan(ex1().h, 0, {q(1), q(5)}, probes);
  ASSERT_EQ(r.series.size(), 2u);
  for (const Series& s : r.series)
    for (const Real& v : s.values) EXPECT_EQ(v, Real(1));
}

TEST(Scan, LongtailOfExponential) {
  const PiecewiseDensity f = build_oracle_exp(q(1));
  const auto probes = parse_probes("10,20,30", "oracle");
  const DiagnosticReport r = longtail_scan(f, q(1), {q(1, 2), q(2)}, probes);
  for (const Series& s : r.series)
    for (const Real& v : s.values) EXPECT_LT(abs(v - 1), Real(1e-30));
  EXPECT_THROW(longtail_scan(f, 0, {q(1)}, parse_probes("50", "oracle")), PreconditionError);
}

TEST(Scan, ExponentialDiverges) {
  const PiecewiseDensity f = build_oracle_exp(q(1));
  std::string spec;
  for (int k = 1; k <= 100; ++k) spec += (k > 1 ? "," : "") + std::to_string(k * 39) + "/100";
  const DiagnosticReport r = subexp_scan(f, 0, parse_probes(spec, "oracle"));
  EXPECT_EQ(r.verdict, Verdict::Diverging);
  EXPECT_NEAR(static_cast<double>(r.primary().trend.slope), 1.0, 0.05);
}

// Reference values: tests/oracle/gallery_oracle.py.
TEST(Scan, FkzMatchesOracle) {
  const AlphaFunction a = AlphaFunction::parse("sqrtlog");
  EXPECT_LT(rel(fkz_integral(ex1().f, ex1().f, a, named_point("ex1", 16, 5)),
                Big("106.2040539784535186520784")), 1e-20);
  EXPECT_LT(rel(fkz_integral(ex1().f, ex1().f, a, named_point("ex1", 36, 5)),
                Big("286.8611931106419931474313")), 1e-20);
  const Ex2 e2 = build_ex2();
  EXPECT_LT(rel(fkz_integral(e2.f, e2.f, a, named_point("ex2", 16, 3)),
                Big("104.7068835108814059364007")), 1e-20);
  EXPECT_LT(rel(fkz_integral(e2.f, e2.f, a, named_point("ex2", 36, 3)),
                Big("269.2068021467858950303721")), 1e-20);
  const PiecewiseDensity f6 = build_ex6();
  const AlphaFunction b = AlphaFunction::exp_sqrt_log();
  EXPECT_LT(rel(fkz_integral(f6, f6, b, named_point("ex6", 4, 1)),
                Big("20.80635533354995012210039")), 1e-20);
  EXPECT_LT(rel(fkz_integral(f6, f6, b, named_point("ex6", 9, 1)),
                Big("175957.6956903813049901468")), 1e-20);
}

TEST(Scan, JDecompositionMatchesOracle) {
  const AlphaFunction a = AlphaFunction::interval_power(q(1, 2));
  const auto probes = parse_probes("m10..m40:10", "ex1", &ex1().h);
  const DiagnosticReport r = jdec_scan(ex1().h, a, probes);
  const char* want[] = {"0.1129541519662340010625864", "0.0321276120325643164650887",
                        "0.01523884655576173609128977", "0.008897573325613633384333876"};
  for (int i = 0; i < 4; ++i) EXPECT_LT(rel(r.primary().values[i], Big(want[i])), 1e-20) << i;
  const JDecomposition j = j_decomposition(ex1().h, a, probes[1].x);
  EXPECT_LT(abs((2 * j.j1 + j.j2) / j.total - 1), Real(1e-28));
}

TEST(Scan, AlphaInsensitivityFlatIsZero) {
  const auto probes = parse_probes("m10..m30:10", "ex1", &ex1().h);
  const DiagnosticReport r = alpha_insensitivity(ex1().h, AlphaFunction::parse("sqrtlog"), probes);
  for (const Real& v : r.primary().values) EXPECT_EQ(v, Real(0));
}

TEST(Scan, AldAndAni) {
  const DiagnosticReport ok =
      ald_check(ex1().h, ExpReal::exp(q(4)), Real(2), parse_probes("a10..a40:2", "ex1"));
  EXPECT_TRUE(ok.ok);
  GalleryParams p;
  p.n_max = 120;
  const PiecewiseDensity fp = build_ex3(p).f_plus;
  const DiagnosticReport bad =
      ald_check(fp, ExpReal::exp(q(4)), Real(10), parse_probes("a101..a110@1,a101..a110@2", "ex3"));
  EXPECT_FALSE(bad.ok);
  EXPECT_GE(bad.findings.size(), 10u);
  const DiagnosticReport ani = ani_check(ex1().h, ExpReal::exp(q(4)), parse_probes("a10..a30:10", "ex1"));
  ASSERT_EQ(ani.series.size(), 2u);
  for (const Real& v : ani.series[0].values) EXPECT_LE(v, Real(1) + Real(1e-30));
}

TEST(Witness, ExampleThreeDips) {
  const Ex3 e = build_ex3();
  const WitnessSequence w = dc_witness_search(e.f_plus);
  ASSERT_GE(w.items.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const int n = 4 + static_cast<int>(i);
    EXPECT_LT(abs(w.items[i].c / sqrt(Real(n)) - 1), Real(0.1)) << n;
    EXPECT_TRUE(w.items[i].a == named_point("ex3", n, 1));
  }
  for (std::size_t i = 0; i + 1 < w.items.size(); ++i) EXPECT_LT(w.items[i].c, w.items[i + 1].c);
  EXPECT_THROW(dc_witness_search(ex1().h), NotFoundError);
}

TEST(Witness, NegativePartSteps) {
  WitnessSequence one;
  one.items.push_back({ExpReal(1), ExpReal(2), Real(4)});
  one.normalization = Real(1) / 2;
  const PiecewiseDensity f = build_negative_part(one);
  EXPECT_EQ(eval(f, ExpReal(q(-5, 2))), Real(1));
  EXPECT_EQ(eval(f, ExpReal(q(-7, 2))), Real(0));
  EXPECT_NEAR(static_cast<double>(f.mass() - 1), 0.0, 1e-30);
  WitnessSequence two = one;
  two.items.push_back({ExpReal(5), ExpReal(9), Real(4)});
  two.normalization = 1;
  const PiecewiseDensity g = build_negative_part(two);
  EXPECT_EQ(eval(g, ExpReal(q(-5, 2))), Real(1) / 2);
  EXPECT_EQ(eval(g, ExpReal(q(-19, 2))), Real(1) / 2);
  EXPECT_THROW(build_negative_part(WitnessSequence{}), PreconditionError);
}

TEST(Lemma, TiltIdentity) {
  const auto check = [](const PiecewiseDensity& f, const std::vector<Probe>& probes) {
    const DiagnosticReport r = lemma6_verify(f, q(1, 2), probes);
    ASSERT_EQ(r.series.size(), 2u);
    for (std::size_t i = 0; i < probes.size(); ++i)
      EXPECT_LT(abs(r.series[1].values[i] / r.series[0].values[i] - 1), Real(1e-10));
    EXPECT_TRUE(r.ok);
  };
  check(build_oracle_exp(q(1)), parse_probes("5,10,20,30", "oracle"));
  check(build_ex2().g, parse_probes("a10..a40:10", "ex2"));
}

TEST(Lemma, DominanceExampleFour) {
  const Ex4 e = build_ex4();
  const DiagnosticReport r =
      lemma2_verify(e.f, e.g, AlphaFunction::parse("powlog:1/2"), parse_probes("a20..a40:10", "ex2"));
  EXPECT_EQ(r.verdict, Verdict::LimitOne);
  const Series& mid = r.series[1];
  EXPECT_GT(mid.values[0], mid.values[1]);
  EXPECT_GT(mid.values[1], mid.values[2]);
  EXPECT_THROW(lemma2_verify(e.f, e.f, AlphaFunction::parse("powlog:1/2"), parse_probes("a20..a40:10", "ex2")),
               PreconditionError);
}

TEST(Lemma, ConvRatioExponential) {
  // Exp(1)*Exp(1) is Gamma(2): (f*g)*(f*g)(x) / (2 (f*g)(x)) = x^2 / 12 up to truncation.
  const PiecewiseDensity f = build_oracle_exp(q(1));
  const Real v = conv_subexp_ratio(f, f, ExpReal(q(6)));
  EXPECT_LT(abs(v / 3 - 1), Real(1e-4));
}

TEST(Report, Serializations) {
  const PiecewiseDensity f = build_oracle_exp(q(1));
  const DiagnosticReport r = subexp_scan(f, 0, parse_probes("5,10", "oracle"));
  const std::string csv = report_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "probe_label,x_log_value,functional_value,running_trend");
  EXPECT_NE(csv.find("10,2.3025850929940457e+00,5.0000000000000000e+00,"), std::string::npos);
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["functional"], "subexp");
  EXPECT_EQ(j["series"].size(), 1u);
  EXPECT_NE(report_table(r).find("verdict"), std::string::npos);
  EXPECT_EQ(report_csv(r), report_csv(subexp_scan(f, 0, parse_probes("5,10", "oracle"))));
}

TEST(Lemma, MixtureOfExampleOne) {
  const DiagnosticReport r = lemma1_verify(ex1().f, ex1().g, q(1, 2), AlphaFunction::parse("sqrtlog"),
                                           parse_probes("a6,a8", "ex1"));
  const Series& conv = r.series[0];
  ASSERT_EQ(conv.values.size(), 2u);
  // (f-g)*(f-g) vanishes at a_n, so (f*g)/(f+g) there equals the mixture ratio.
  for (const Series& s : r.series)
    if (s.name == "conv_over_sum")
      for (std::size_t i = 0; i < 2; ++i)
        EXPECT_LT(abs(s.values[i] / self_conv_ratio(mixture(ex1().f, ex1().g, q(1, 2)), 0,
                                                    named_point("ex1", 6 + 2 * static_cast<int>(i), 0)) -
                      1),
                  Real(1e-25));
}

TEST(Lemma, TwoSidedExampleThree) {
  const Ex3 e = build_ex3();
  const WitnessSequence w = dc_witness_search(e.f_plus);
  const ExpReal neg = -(w.items[0].b + ExpReal(q(1, 2)));
  const DiagnosticReport r = lemma45_verify(e.f_two_sided, e.g, q(1, 2), AlphaFunction::parse("sqrtlog"),
                                            parse_probes("a6,a8", "ex3"), {make_probe("neg", neg)});
  ASSERT_GE(r.series.size(), 2u);
  EXPECT_EQ(r.series[1].name, "conv_over_sum_neg");
  EXPECT_TRUE(boost::multiprecision::isfinite(r.series[1].values[0]));
  EXPECT_GT(r.series[1].values[0], Real(0));
  EXPECT_FALSE(r.findings.empty());
}
