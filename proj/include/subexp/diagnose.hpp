#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subexp/convolve.hpp"
#include "subexp/density.hpp"

namespace subexp {

// Truncation functions alpha(x) used to split convolution integrals.
class AlphaFunction {
 public:
  enum class Kind { SqrtLogShift, IntervalPower, PowLog, ExpSqrtLog, Fixed };

  // sqrt(log x - c)
  static AlphaFunction sqrt_log_shift(const Real& c);
  // e^n n^{-delta} for x in (e^n, e^{n+1}]
  static AlphaFunction interval_power(const Rational& delta);
  // (2 log x)^{1/gamma}
  static AlphaFunction pow_log(const Rational& gamma);
  // e^{2 sqrt(log x)}
  static AlphaFunction exp_sqrt_log();
  static AlphaFunction fixed(const Rational& value);

  // Throws PreconditionError unless 0 < alpha(x) < x/2.
  ExpReal operator()(const ExpReal& x) const;
  Real approx(const ExpReal& x) const;

  Kind kind() const { return kind_; }
  std::string str() const;
  // Inverse of str(): "sqrtlog[:c]", "interval:delta", "powlog:gamma",
  // "expsqrtlog", "fixed:value".
  static AlphaFunction parse(const std::string& text);

 private:
  Kind kind_ = Kind::SqrtLogShift;
  Rational q_ = 0;
  Real c_ = 0;
};

enum class Verdict { LimitOne, LimitZero, Diverging, Inconclusive };
std::string to_string(Verdict v);

struct VerdictRules {
  Real limit_tol = Real(0.15);     // last values within this of the limit
  int limit_points = 3;
  Real flat_slope = Real(0.02);    // |slope| bound for limit one
  Real diverge_slope = Real(0.1);  // slope bound for diverging
  int rising_points = 4;           // strictly increasing tail length
  std::map<std::string, std::string> describe() const;
};

// Least-squares slope of log value against log x over the positive values.
struct TrendFit {
  Real slope = 0;
  Real stderr_slope = 0;
  int points = 0;
};
TrendFit fit_trend(const std::vector<Real>& log_x, const std::vector<Real>& values);

// Checked in order: limit one, limit zero, diverging, otherwise inconclusive.
Verdict classify(const std::vector<Real>& log_x, const std::vector<Real>& values,
                 const VerdictRules& rules = {});

struct Probe {
  std::string label;
  ExpReal x;
  Real log_x = 0;
};
Probe make_probe(std::string label, ExpReal x);

struct Series {
  std::string name;
  std::vector<Probe> probes;
  std::vector<Real> values;
  std::vector<Real> running_trend;  // slope over the probes so far; nan for the first
  TrendFit trend;
  Verdict verdict = Verdict::Inconclusive;
};
Series make_series(std::string name, std::vector<Probe> probes, std::vector<Real> values,
                   const VerdictRules& rules = {});

struct DiagnosticReport {
  std::string functional;
  std::vector<Series> series;
  Verdict verdict = Verdict::Inconclusive;
  bool ok = true;  // false when a check found violations or inconsistencies
  std::map<std::string, std::string> params;
  std::vector<std::string> findings;

  const Series& primary() const { return series.front(); }
};

// Serializations: aligned text table, structured JSON summary, and plot csv
// (probe_label, x_log_value, functional_value, running_trend).
std::string report_table(const DiagnosticReport& r);
std::string report_json(const DiagnosticReport& r);
std::string report_csv(const DiagnosticReport& r);

// ---- scans ----------------------------------------------------------------

// One series per shift y: f(x - y) / (f(x) e^{gamma y}).
DiagnosticReport longtail_scan(const PiecewiseDensity& f, const Rational& gamma,
                               const std::vector<Rational>& shifts,
                               const std::vector<Probe>& probes);

// f*f(x) / (2 fhat(gamma) f(x)).
DiagnosticReport subexp_scan(const PiecewiseDensity& f, const Rational& gamma,
                             const std::vector<Probe>& probes);

// int_{alpha}^{x-alpha} f(x-y) g(y) dy / f(x)
Real fkz_integral(const PiecewiseDensity& f, const PiecewiseDensity& g, const AlphaFunction& alpha,
                  const ExpReal& x);
DiagnosticReport fkz_scan(const PiecewiseDensity& f, const PiecewiseDensity& g,
                          const AlphaFunction& alpha, const std::vector<Probe>& probes);

struct JDecomposition {
  Real j1 = 0;     // int_0^alpha h(x-y) h(y) dy
  Real j2 = 0;     // int_alpha^{x-alpha} h(x-y) h(y) dy
  Real total = 0;  // h*h(x)
};
JDecomposition j_decomposition(const PiecewiseDensity& h, const AlphaFunction& alpha,
                               const ExpReal& x);
// Series J2/h(x).
DiagnosticReport jdec_scan(const PiecewiseDensity& h, const AlphaFunction& alpha,
                           const std::vector<Probe>& probes);

// max over s in [0, alpha(x)] of |f(x-s)/f(x) - 1|.
DiagnosticReport alpha_insensitivity(const PiecewiseDensity& f, const AlphaFunction& alpha,
                                     const std::vector<Probe>& probes);

// Violations f(x') > K f(x) over probe pairs x0 < x < x'.  The series holds
// max_{x' > x} f(x')/f(x) per probe.
DiagnosticReport ald_check(const PiecewiseDensity& f, const ExpReal& x0, const Real& K,
                           const std::vector<Probe>& probes);

// sup_{t >= x} f(t)/f(x) and inf_{x0 <= t <= x} f(t)/f(x) from segment extremes.
DiagnosticReport ani_check(const PiecewiseDensity& f, const ExpReal& x0,
                           const std::vector<Probe>& probes);

struct Witness {
  ExpReal a, b;
  Real c = 0;
};

struct WitnessSequence {
  std::vector<Witness> items;
  Real normalization = 0;  // sum of 1/sqrt(c_n)
};

// Dips a_n among the breakpoints followed by peaks whose one-unit window
// (a_n + b_n, a_n + b_n + 1) stays at least c_n f(a_n); c_n strictly increasing
// and above one.  count == 0 keeps every witness found.  Throws NotFoundError
// when none exists.
WitnessSequence dc_witness_search(const PiecewiseDensity& f, int count = 0);

// Step density 1/(c sqrt(c_n)) on (-b_n - 1, -b_n); mass exactly one.
PiecewiseDensity build_negative_part(const WitnessSequence& w);

// ---- lemma verifiers --------------------------------------------------------

// (f*g)*(f*g)(x) / (2 (f*g)(x)) by quadrature over pointwise convolutions.
// Accurate to about 1e-4; seconds per point at large x.
Real conv_subexp_ratio(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x);

DiagnosticReport lemma1_verify(const PiecewiseDensity& f, const PiecewiseDensity& g,
                               const Rational& p, const AlphaFunction& alpha,
                               const std::vector<Probe>& probes);
DiagnosticReport lemma2_verify(const PiecewiseDensity& f, const PiecewiseDensity& g,
                               const AlphaFunction& alpha, const std::vector<Probe>& probes);
DiagnosticReport lemma45_verify(const PiecewiseDensity& f, const PiecewiseDensity& g,
                                const Rational& p, const AlphaFunction& alpha,
                                const std::vector<Probe>& probes_pos,
                                const std::vector<Probe>& probes_neg);
// subexp_scan(f, 0) against subexp_scan(tilt(f, gamma), gamma).
DiagnosticReport lemma6_verify(const PiecewiseDensity& f, const Rational& gamma,
                               const std::vector<Probe>& probes);

}  // namespace subexp
