#include "subexp/diagnose.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "subexp/errors.hpp"

namespace subexp {

namespace mp = boost::multiprecision;

namespace {

const Real kNaN = std::numeric_limits<Real>::quiet_NaN();

std::string num(const Real& x, int digits = 17) {
  if (mp::isnan(x)) return "nan";
  if (mp::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_real(x, digits);
}

Scaled density_at(const PiecewiseDensity& f, const ExpReal& x) { return eval_scaled(f, Knot(x)); }

Scaled positive_density(const PiecewiseDensity& f, const Probe& p) {
  Scaled v = density_at(f, p.x);
  if (!(v.sign() > 0))
    throw PreconditionError("density vanishes at probe " + p.label);
  return v;
}

// One-sided values of f at every knot in [lo, hi], plus interior samples of
// segments whose parts are not plain linear.
std::vector<Scaled> extremes_in(const PiecewiseDensity& f, const Knot& lo, const Knot& hi) {
  std::vector<Scaled> out;
  const auto& segs = f.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    if (compare(s.right, lo) < 0) continue;
    if (compare(s.left, hi) > 0) break;
    auto at = [&](const Knot& k) {
      Scaled v;
      for (const Part& p : s.parts) v += p.value(k);
      return v;
    };
    if (compare(s.left, lo) >= 0) out.push_back(at(s.left));
    if (compare(s.right, hi) <= 0) out.push_back(at(s.right));
    if (i > 0 && compare(segs[i - 1].right, s.left) < 0 && compare(s.left, lo) > 0)
      out.push_back(Scaled());
    bool plain = true;
    for (const Part& p : s.parts)
      if (p.kind() != PartKind::ExpLinear || p.rate() != 0) plain = false;
    if (!plain) {
      const Knot& a = compare(s.left, lo) >= 0 ? s.left : lo;
      const Knot& b = compare(s.right, hi) <= 0 ? s.right : hi;
      const Real w = difference(b, a);
      for (int k = 1; k < 16; ++k) {
        const Knot t(a.exact + ExpReal::from_real(w * k / 16));
        if (compare(t, b) < 0) out.push_back(at(t));
      }
    }
  }
  return out;
}

std::vector<Real> map_probes(const std::vector<Probe>& probes,
                             const std::function<Real(const Probe&)>& fn) {
  return parallel_map(probes, fn);
}

Scaled conv_at(const PiecewiseDensity& f, const PiecewiseDensity& g, const Real& y) {
  return conv_scaled_approx(f, g, y);
}

}  // namespace

// ---- alpha ----------------------------------------------------------------

AlphaFunction AlphaFunction::sqrt_log_shift(const Real& c) {
  AlphaFunction a;
  a.kind_ = Kind::SqrtLogShift;
  a.c_ = c;
  return a;
}

AlphaFunction AlphaFunction::interval_power(const Rational& delta) {
  AlphaFunction a;
  a.kind_ = Kind::IntervalPower;
  a.q_ = delta;
  return a;
}

AlphaFunction AlphaFunction::pow_log(const Rational& gamma) {
  if (!(gamma > 0)) throw PreconditionError("powlog alpha needs gamma > 0");
  AlphaFunction a;
  a.kind_ = Kind::PowLog;
  a.q_ = gamma;
  return a;
}

AlphaFunction AlphaFunction::exp_sqrt_log() {
  AlphaFunction a;
  a.kind_ = Kind::ExpSqrtLog;
  return a;
}

AlphaFunction AlphaFunction::fixed(const Rational& value) {
  AlphaFunction a;
  a.kind_ = Kind::Fixed;
  a.q_ = value;
  return a;
}

ExpReal AlphaFunction::operator()(const ExpReal& x) const {
  if (!(x.sign() > 0)) throw PreconditionError("alpha needs x > 0");
  const Real lx = x.log_abs();
  ExpReal out;
  switch (kind_) {
    case Kind::SqrtLogShift:
      if (!(lx > c_)) throw PreconditionError("sqrtlog alpha needs log x > c");
      out = ExpReal::from_real(sqrt(lx - c_));
      break;
    case Kind::IntervalPower: {
      long n = static_cast<long>(floor(lx));
      while (n > 0 && x <= ExpReal::exp(n)) --n;
      while (x > ExpReal::exp(n + 1)) ++n;
      if (n < 1) throw PreconditionError("interval alpha needs x > e");
      const Rational c = exact_rational(pow(Real(n), -to_real(q_)));
      out = ExpReal::term(Coeff(c), n);
      break;
    }
    case Kind::PowLog:
      if (!(lx > 0)) throw PreconditionError("powlog alpha needs x > 1");
      out = ExpReal::from_real(pow(2 * lx, 1 / to_real(q_)));
      break;
    case Kind::ExpSqrtLog:
      if (!(lx > 0)) throw PreconditionError("expsqrtlog alpha needs x > 1");
      out = ExpReal::from_real(exp(2 * sqrt(lx)));
      break;
    case Kind::Fixed:
      out = ExpReal(q_);
      break;
  }
  if (!(out.sign() > 0) || !(out * Coeff(2) < x))
    throw PreconditionError("alpha(x) must satisfy 0 < alpha(x) < x/2 (" + str() + ")");
  return out;
}

Real AlphaFunction::approx(const ExpReal& x) const { return (*this)(x).approx(); }

std::string AlphaFunction::str() const {
  switch (kind_) {
    case Kind::SqrtLogShift:
      return "sqrtlog:" + format_real(c_, 40);
    case Kind::IntervalPower:
      return "interval:" + to_string(q_);
    case Kind::PowLog:
      return "powlog:" + to_string(q_);
    case Kind::ExpSqrtLog:
      return "expsqrtlog";
    case Kind::Fixed:
      return "fixed:" + to_string(q_);
  }
  return "";
}

AlphaFunction AlphaFunction::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head == "sqrtlog") {
      if (arg.empty()) {
        const Real e = boost::math::constants::e<Real>();
        return sqrt_log_shift(log((e + 1) / 2));
      }
      return sqrt_log_shift(parse_real(arg));
    }
    if (head == "interval") return interval_power(parse_rational(arg));
    if (head == "powlog") return pow_log(parse_rational(arg));
    if (head == "expsqrtlog" && arg.empty()) return exp_sqrt_log();
    if (head == "fixed") return fixed(parse_rational(arg));
  } catch (const PreconditionError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError("bad alpha '" + text + "': " + e.what());
  }
  throw ParseError("bad alpha '" + text + "'");
}

// ---- verdicts -------------------------------------------------------------

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::LimitOne:
      return "consistent-with-limit-1";
    case Verdict::LimitZero:
      return "consistent-with-limit-0";
    case Verdict::Diverging:
      return "diverging";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

std::map<std::string, std::string> VerdictRules::describe() const {
  return {{"limit_tol", num(limit_tol, 6)},
          {"limit_points", std::to_string(limit_points)},
          {"flat_slope", num(flat_slope, 6)},
          {"diverge_slope", num(diverge_slope, 6)},
          {"rising_points", std::to_string(rising_points)}};
}

TrendFit fit_trend(const std::vector<Real>& log_x, const std::vector<Real>& values) {
  std::vector<Real> xs, ys;
  for (std::size_t i = 0; i < values.size() && i < log_x.size(); ++i)
    if (values[i] > 0 && mp::isfinite(values[i]) && mp::isfinite(log_x[i])) {
      xs.push_back(log_x[i]);
      ys.push_back(log(values[i]));
    }
  TrendFit out;
  out.points = static_cast<int>(xs.size());
  if (xs.size() < 2) {
    out.slope = kNaN;
    out.stderr_slope = kNaN;
    return out;
  }
  const Real n = xs.size();
  Real mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  Real sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0)) {
    out.slope = kNaN;
    out.stderr_slope = kNaN;
    return out;
  }
  out.slope = sxy / sxx;
  if (xs.size() > 2) {
    Real sse = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Real r = ys[i] - my - out.slope * (xs[i] - mx);
      sse += r * r;
    }
    out.stderr_slope = sqrt(sse / (n - 2) / sxx);
  } else {
    out.stderr_slope = kNaN;
  }
  return out;
}

Verdict classify(const std::vector<Real>& log_x, const std::vector<Real>& values,
                 const VerdictRules& rules) {
  const int n = static_cast<int>(values.size());
  const TrendFit fit = fit_trend(log_x, values);
  if (n >= rules.limit_points) {
    bool near = true;
    for (int i = n - rules.limit_points; i < n; ++i)
      if (!(abs(values[i] - 1) <= rules.limit_tol)) near = false;
    if (near && abs(fit.slope) <= rules.flat_slope) return Verdict::LimitOne;
    bool small = true;
    for (int i = n - rules.limit_points; i < n; ++i) {
      if (!(values[i] >= 0 && values[i] <= rules.limit_tol)) small = false;
      if (i > n - rules.limit_points && !(values[i] <= values[i - 1])) small = false;
    }
    if (small) return Verdict::LimitZero;
  }
  if (n >= rules.rising_points) {
    bool rising = true;
    for (int i = n - rules.rising_points + 1; i < n; ++i)
      if (!(values[i] > values[i - 1])) rising = false;
    if (rising && fit.slope >= rules.diverge_slope) return Verdict::Diverging;
  }
  return Verdict::Inconclusive;
}

Probe make_probe(std::string label, ExpReal x) {
  Probe p{std::move(label), std::move(x), 0};
  p.log_x = p.x.is_zero() ? -std::numeric_limits<Real>::infinity() : p.x.log_abs();
  return p;
}

Series make_series(std::string name, std::vector<Probe> probes, std::vector<Real> values,
                   const VerdictRules& rules) {
  Series s;
  s.name = std::move(name);
  s.probes = std::move(probes);
  s.values = std::move(values);
  std::vector<Real> lx;
  for (const Probe& p : s.probes) lx.push_back(p.log_x);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    std::vector<Real> a(lx.begin(), lx.begin() + i + 1), b(s.values.begin(), s.values.begin() + i + 1);
    s.running_trend.push_back(i == 0 ? kNaN : fit_trend(a, b).slope);
  }
  s.trend = fit_trend(lx, s.values);
  s.verdict = classify(lx, s.values, rules);
  return s;
}

// ---- serialization --------------------------------------------------------

std::string report_table(const DiagnosticReport& r) {
  std::ostringstream os;
  os << "functional: " << r.functional << "\n";
  os << "verdict: " << to_string(r.verdict) << (r.ok ? "" : " (checks failed)") << "\n";
  for (const auto& [k, v] : r.params) os << "  " << k << " = " << v << "\n";
  for (const Series& s : r.series) {
    os << "\n[" << s.name << "] verdict " << to_string(s.verdict) << ", slope "
       << num(s.trend.slope, 6) << " +- " << num(s.trend.stderr_slope, 3) << "\n";
    os << std::left << std::setw(14) << "probe" << std::setw(26) << "log x" << std::setw(26)
       << "value" << "trend\n";
    for (std::size_t i = 0; i < s.values.size(); ++i)
      os << std::left << std::setw(14) << s.probes[i].label << std::setw(26)
         << num(s.probes[i].log_x) << std::setw(26) << num(s.values[i])
         << num(s.running_trend[i], 6) << "\n";
  }
  if (!r.findings.empty()) {
    os << "\nfindings:\n";
    for (const std::string& f : r.findings) os << "  " << f << "\n";
  }
  return os.str();
}

std::string report_json(const DiagnosticReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["functional"] = r.functional;
  j["verdict"] = to_string(r.verdict);
  j["ok"] = r.ok;
  j["params"] = r.params;
  ordered_json series = ordered_json::array();
  for (const Series& s : r.series) {
    ordered_json js;
    js["name"] = s.name;
    js["verdict"] = to_string(s.verdict);
    js["slope"] = num(s.trend.slope);
    js["slope_stderr"] = num(s.trend.stderr_slope);
    js["fit_points"] = s.trend.points;
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < s.values.size(); ++i)
      rows.push_back({{"label", s.probes[i].label},
                      {"x", s.probes[i].x.str()},
                      {"x_log", num(s.probes[i].log_x)},
                      {"value", num(s.values[i])},
                      {"trend", num(s.running_trend[i])}});
    js["rows"] = rows;
    series.push_back(js);
  }
  j["series"] = series;
  j["findings"] = r.findings;
  return j.dump(2) + "\n";
}

std::string report_csv(const DiagnosticReport& r) {
  std::ostringstream os;
  os << "probe_label,x_log_value,functional_value,running_trend\n";
  const bool tag = r.series.size() > 1;
  for (const Series& s : r.series)
    for (std::size_t i = 0; i < s.values.size(); ++i)
      os << (tag ? s.name + ":" : "") << s.probes[i].label << "," << num(s.probes[i].log_x) << ","
         << num(s.values[i]) << "," << num(s.running_trend[i]) << "\n";
  return os.str();
}

// ---- scans ----------------------------------------------------------------

namespace {

DiagnosticReport single(std::string functional, std::string series_name,
                        const std::vector<Probe>& probes, std::vector<Real> values) {
  DiagnosticReport r;
  r.functional = std::move(functional);
  r.series.push_back(make_series(std::move(series_name), probes, std::move(values)));
  r.verdict = r.series.front().verdict;
  r.params = VerdictRules{}.describe();
  return r;
}

}  // namespace

DiagnosticReport longtail_scan(const PiecewiseDensity& f, const Rational& gamma,
                               const std::vector<Rational>& shifts,
                               const std::vector<Probe>& probes) {
  DiagnosticReport r;
  r.functional = "longtail";
  r.params = VerdictRules{}.describe();
  r.params["gamma"] = to_string(gamma);
  r.params["density"] = f.info().name;
  bool all_one = !shifts.empty();
  for (const Rational& y : shifts) {
    const ExpReal ye(y);
    const Real gy = to_real(gamma * y);
    auto values = map_probes(probes, [&](const Probe& p) {
      const Scaled fx = positive_density(f, p);
      return ratio(density_at(f, p.x - ye), fx * Scaled::exp_of(gy));
    });
    r.series.push_back(make_series("shift=" + to_string(y), probes, std::move(values)));
    if (r.series.back().verdict != Verdict::LimitOne) all_one = false;
  }
  r.verdict = all_one ? Verdict::LimitOne
                      : (r.series.empty() ? Verdict::Inconclusive : r.series.front().verdict);
  return r;
}

DiagnosticReport subexp_scan(const PiecewiseDensity& f, const Rational& gamma,
                             const std::vector<Probe>& probes) {
  auto values = map_probes(probes, [&](const Probe& p) {
    positive_density(f, p);
    return self_conv_ratio(f, gamma, p.x);
  });
  DiagnosticReport r = single("subexp", "self_conv_ratio", probes, std::move(values));
  r.params["gamma"] = to_string(gamma);
  r.params["density"] = f.info().name;
  return r;
}

Real fkz_integral(const PiecewiseDensity& f, const PiecewiseDensity& g, const AlphaFunction& alpha,
                  const ExpReal& x) {
  const ExpReal a = alpha(x);
  const Scaled fx = density_at(f, x);
  if (!(fx.sign() > 0)) throw PreconditionError("fkz integral needs f(x) > 0");
  return ratio(partial_conv_scaled(f, g, x, a, x - a), fx);
}

DiagnosticReport fkz_scan(const PiecewiseDensity& f, const PiecewiseDensity& g,
                          const AlphaFunction& alpha, const std::vector<Probe>& probes) {
  auto values = map_probes(probes, [&](const Probe& p) { return fkz_integral(f, g, alpha, p.x); });
  DiagnosticReport r = single("fkz", "middle_over_f", probes, std::move(values));
  r.params["alpha"] = alpha.str();
  r.params["f"] = f.info().name;
  r.params["g"] = g.info().name;
  return r;
}

JDecomposition j_decomposition(const PiecewiseDensity& h, const AlphaFunction& alpha,
                               const ExpReal& x) {
  if (!h.one_sided()) throw PreconditionError("J decomposition needs a one-sided density");
  const ExpReal a = alpha(x);
  JDecomposition out;
  out.j1 = partial_conv_scaled(h, h, x, std::nullopt, a).value();
  out.j2 = partial_conv_scaled(h, h, x, a, x - a).value();
  out.total = conv_scaled(h, h, x).value();
  return out;
}

DiagnosticReport jdec_scan(const PiecewiseDensity& h, const AlphaFunction& alpha,
                           const std::vector<Probe>& probes) {
  if (!h.one_sided()) throw PreconditionError("J decomposition needs a one-sided density");
  std::vector<JDecomposition> parts = parallel_map(
      probes, [&](const Probe& p) { return j_decomposition(h, alpha, p.x); });
  std::vector<Real> values;
  DiagnosticReport r;
  Real worst = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Real hx = density_at(h, probes[i].x).value();
    if (!(hx > 0)) throw PreconditionError("density vanishes at probe " + probes[i].label);
    values.push_back(parts[i].j2 / hx);
    worst = std::max(worst, abs(2 * parts[i].j1 + parts[i].j2 - parts[i].total) / parts[i].total);
  }
  r = single("jdec", "J2_over_h", probes, std::move(values));
  r.params["alpha"] = alpha.str();
  r.params["density"] = h.info().name;
  r.findings.push_back("max |2 J1 + J2 - h*h| / h*h = " + num(worst, 6));
  if (!(worst <= Real(1e-12))) r.ok = false;
  return r;
}

DiagnosticReport alpha_insensitivity(const PiecewiseDensity& f, const AlphaFunction& alpha,
                                     const std::vector<Probe>& probes) {
  auto values = map_probes(probes, [&](const Probe& p) {
    const Scaled fx = positive_density(f, p);
    const ExpReal a = alpha(p.x);
    Real worst = 0;
    for (const Scaled& v : extremes_in(f, Knot(p.x - a), Knot(p.x)))
      worst = std::max(worst, abs(ratio(v, fx) - 1));
    worst = std::max(worst, abs(ratio(density_at(f, p.x - a), fx) - 1));
    return worst;
  });
  DiagnosticReport r = single("alpha", "max_deviation", probes, std::move(values));
  r.params["alpha"] = alpha.str();
  r.params["density"] = f.info().name;
  return r;
}

DiagnosticReport ald_check(const PiecewiseDensity& f, const ExpReal& x0, const Real& K,
                           const std::vector<Probe>& probes) {
  if (!(K >= 1)) throw PreconditionError("almost-decrease check needs K >= 1");
  std::vector<Probe> use;
  for (const Probe& p : probes)
    if (p.x > x0) use.push_back(p);
  std::vector<Scaled> fv;
  for (const Probe& p : use) fv.push_back(density_at(f, p.x));
  std::vector<Real> values;
  DiagnosticReport r;
  for (std::size_t i = 0; i < use.size(); ++i) {
    Real worst = 0;
    for (std::size_t j = 0; j < use.size(); ++j) {
      if (!(use[j].x > use[i].x)) continue;
      const Real q = fv[i].is_zero() ? (fv[j].is_zero() ? Real(0) : std::numeric_limits<Real>::infinity())
                                     : ratio(fv[j], fv[i]);
      worst = std::max(worst, q);
      if (q > K)
        r.findings.push_back("violation: f(" + use[j].label + ")/f(" + use[i].label + ") = " +
                             num(q, 8) + " > K");
    }
    values.push_back(worst);
  }
  r.functional = "ald";
  r.series.push_back(make_series("max_forward_ratio", use, std::move(values)));
  r.verdict = r.series.front().verdict;
  r.ok = r.findings.empty();
  r.params = VerdictRules{}.describe();
  r.params["K"] = num(K, 8);
  r.params["x0"] = x0.str();
  r.params["density"] = f.info().name;
  r.params["violations"] = std::to_string(r.findings.size());
  return r;
}

DiagnosticReport ani_check(const PiecewiseDensity& f, const ExpReal& x0,
                           const std::vector<Probe>& probes) {
  const Knot k0(x0), top = f.support_hi();
  std::vector<Real> sup, inf;
  for (const Probe& p : probes) {
    const Scaled fx = positive_density(f, p);
    const Knot kx(p.x);
    Real hi = 1, lo = 1;
    for (const Scaled& v : extremes_in(f, kx, top)) hi = std::max(hi, ratio(v, fx));
    if (compare(k0, kx) <= 0) {
      lo = std::min(lo, ratio(density_at(f, x0), fx));
      for (const Scaled& v : extremes_in(f, k0, kx)) lo = std::min(lo, ratio(v, fx));
    }
    sup.push_back(hi);
    inf.push_back(lo);
  }
  DiagnosticReport r;
  r.functional = "ani";
  r.series.push_back(make_series("sup_ratio", probes, std::move(sup)));
  r.series.push_back(make_series("inf_ratio", probes, std::move(inf)));
  const bool both = r.series[0].verdict == Verdict::LimitOne && r.series[1].verdict == Verdict::LimitOne;
  r.verdict = both ? Verdict::LimitOne : Verdict::Inconclusive;
  r.params = VerdictRules{}.describe();
  r.params["x0"] = x0.str();
  r.params["density"] = f.info().name;
  return r;
}

// ---- witnesses ------------------------------------------------------------

WitnessSequence dc_witness_search(const PiecewiseDensity& f, int count) {
  if (!f.one_sided()) throw PreconditionError("witness search needs a one-sided density");
  // Knot values along the support (right-continuous at shared knots).
  std::vector<Knot> pos;
  std::vector<Scaled> val;
  for (const Segment& s : f.segments()) {
    if (pos.empty() || !(pos.back() == s.left)) {
      pos.push_back(s.left);
      val.push_back(eval_scaled(f, s.left));
    }
    pos.push_back(s.right);
    val.push_back(eval_scaled(f, s.right));
  }
  auto less = [](const Scaled& a, const Scaled& b) { return ratio(a, b) < 1; };
  WitnessSequence w;
  const ExpReal half(Rational(1, 2));
  Real last_c = 1;
  std::optional<ExpReal> last_b;
  for (std::size_t k = 1; k + 1 < pos.size(); ++k) {
    if (!(val[k].sign() > 0)) continue;
    if (!(less(val[k], val[k - 1]) && less(val[k], val[k + 1]))) continue;
    std::size_t j = k + 1;
    while (j + 1 < pos.size() && !less(val[j + 1], val[j])) ++j;
    const ExpReal& peak = pos[j].exact;
    const ExpReal b = peak - pos[k].exact - half;
    if (!(b.sign() > 0)) continue;
    const Knot lo(peak - half), hi(peak + half);
    if (compare(hi, f.support_hi()) > 0) continue;
    Real c = std::numeric_limits<Real>::infinity();
    for (const Scaled& v : extremes_in(f, lo, hi)) c = std::min(c, ratio(v, val[k]));
    c = std::min(c, ratio(eval_scaled(f, lo), val[k]));
    c = std::min(c, ratio(eval_scaled(f, hi), val[k]));
    if (!(c > last_c)) continue;
    if (last_b && !(b > *last_b + ExpReal(1))) continue;
    // direct re-check at interior points of the window
    for (int s = 1; s < 8; ++s) {
      const Knot t(pos[k].exact + b + ExpReal(Rational(s, 8)));
      if (ratio(eval_scaled(f, t), val[k]) < c * (1 - Real(1e-25)))
        throw NumericError("witness window check failed");
    }
    w.items.push_back({pos[k].exact, b, c});
    last_c = c;
    last_b = b;
    if (count > 0 && static_cast<int>(w.items.size()) == count) break;
  }
  if (w.items.empty())
    throw NotFoundError("no almost-decrease witness on the truncated support");
  for (const Witness& it : w.items) w.normalization += 1 / sqrt(it.c);
  return w;
}

PiecewiseDensity build_negative_part(const WitnessSequence& w) {
  if (w.items.empty()) throw PreconditionError("negative part needs at least one witness");
  std::vector<Rational> r;
  Rational total = 0;
  for (const Witness& it : w.items) {
    r.push_back(exact_rational(1 / sqrt(it.c)));
    total += r.back();
  }
  std::vector<Segment> segs;
  for (std::size_t i = w.items.size(); i-- > 0;) {
    const ExpReal hi = -w.items[i].b;
    const ExpReal lo = hi - ExpReal(1);
    const ExpReal v(r[i] / total);
    segs.emplace_back(lo, hi, std::vector<Part>{Part::linear(lo, hi, v, v)});
  }
  DensityInfo info;
  info.name = "negative_part";
  info.params["witnesses"] = std::to_string(w.items.size());
  info.params["normalization"] = format_real(w.normalization, 40);
  return PiecewiseDensity(std::move(segs), std::move(info), true);
}

// ---- lemma verifiers -------------------------------------------------------

Real conv_subexp_ratio(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x) {
  const Real lo = f.support_lo().approx + g.support_lo().approx;
  const Real xa = x.approx();
  const Real mid = xa / 2;
  if (!(mid > lo)) throw PreconditionError("conv subexp ratio needs x beyond twice the support start");
  std::vector<Real> cuts{lo, mid};
  for (const PiecewiseDensity* d : {&f, &g})
    for (const Segment& s : d->segments())
      for (const Real& k : {s.left.approx, s.right.approx, s.left.approx + g.support_lo().approx})
        if (k > lo && k < mid) cuts.push_back(k);
  for (Real t = 1; lo + t < mid; t *= 2) cuts.push_back(lo + t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const Scaled cx = conv_scaled(f, g, x);
  if (!(cx.sign() > 0)) throw PreconditionError("convolution vanishes at x");
  Real total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto fn = [&](Real y) {
      const Scaled a = conv_at(f, g, y);
      if (a.is_zero()) return Real(0);
      return ratio(a * conv_at(f, g, xa - y), cx);
    };
    total += boost::math::quadrature::gauss_kronrod<Real, 15>::integrate(fn, cuts[i], cuts[i + 1], 3,
                                                                          Real(1e-6));
  }
  // Symmetric halves; the normalizer is 2 times the unit mass of f*g.
  return total;
}

namespace {

std::vector<Real> conv_over_sum(const PiecewiseDensity& f, const PiecewiseDensity& g,
                                const std::vector<Probe>& probes) {
  return map_probes(probes, [&](const Probe& p) {
    const Scaled s = density_at(f, p.x) + density_at(g, p.x);
    if (!(s.sign() > 0)) throw PreconditionError("f + g vanishes at probe " + p.label);
    return ratio(conv_scaled(f, g, p.x), s);
  });
}

}  // namespace

DiagnosticReport lemma1_verify(const PiecewiseDensity& f, const PiecewiseDensity& g,
                               const Rational& p, const AlphaFunction& alpha,
                               const std::vector<Probe>& probes) {
  if (!f.one_sided() || !g.one_sided()) throw PreconditionError("lemma1_verify needs one-sided inputs");
  if (!f.normalized() || !g.normalized()) throw PreconditionError("lemma1_verify needs normalized inputs");
  const PiecewiseDensity m = mixture(f, g, p);
  DiagnosticReport r;
  r.functional = "lemma1";
  r.series.push_back(make_series(
      "conv_subexp", probes,
      map_probes(probes, [&](const Probe& q) { return conv_subexp_ratio(f, g, q.x); })));
  r.series.push_back(make_series(
      "mixture_subexp", probes,
      map_probes(probes, [&](const Probe& q) { return self_conv_ratio(m, 0, q.x); })));
  r.series.push_back(make_series("conv_over_sum", probes, conv_over_sum(f, g, probes)));
  r.series.push_back(make_series(
      "mixture_middle", probes,
      map_probes(probes, [&](const Probe& q) { return fkz_integral(m, m, alpha, q.x); })));
  const Verdict a = r.series[0].verdict, b = r.series[1].verdict, c = r.series[2].verdict;
  r.verdict = b;
  r.ok = a == b && (a != Verdict::LimitOne || c == Verdict::LimitOne);
  r.findings.push_back(std::string("conv and mixture verdicts ") + (a == b ? "agree" : "differ") +
                       ": " + to_string(a) + " / " + to_string(b));
  r.findings.push_back("(f*g)/(f+g): " + to_string(c));
  r.params = VerdictRules{}.describe();
  r.params["p"] = to_string(p);
  r.params["alpha"] = alpha.str();
  r.params["f"] = f.info().name;
  r.params["g"] = g.info().name;
  return r;
}

DiagnosticReport lemma2_verify(const PiecewiseDensity& f, const PiecewiseDensity& g,
                               const AlphaFunction& alpha, const std::vector<Probe>& probes) {
  std::vector<Real> dom = map_probes(probes, [&](const Probe& q) {
    return ratio(density_at(g, q.x), positive_density(f, q));
  });
  Series ds = make_series("g_over_f", probes, dom);
  if (ds.verdict != Verdict::LimitZero)
    throw PreconditionError("dominance g = o(f) not supported on the probes (g/f " +
                            to_string(ds.verdict) + ")");
  DiagnosticReport r;
  r.functional = "lemma2";
  r.series.push_back(std::move(ds));
  r.series.push_back(make_series(
      "middle_over_f", probes,
      map_probes(probes, [&](const Probe& q) { return fkz_integral(f, g, alpha, q.x); })));
  r.series.push_back(make_series("conv_over_f", probes, map_probes(probes, [&](const Probe& q) {
                                   return ratio(conv_scaled(f, g, q.x), density_at(f, q.x));
                                 })));
  r.verdict = r.series[2].verdict;
  r.ok = r.verdict == Verdict::LimitOne;
  r.findings.push_back("(f*g)/f: " + to_string(r.verdict));
  r.params = VerdictRules{}.describe();
  r.params["alpha"] = alpha.str();
  r.params["f"] = f.info().name;
  r.params["g"] = g.info().name;
  return r;
}

DiagnosticReport lemma45_verify(const PiecewiseDensity& f, const PiecewiseDensity& g,
                                const Rational& p, const AlphaFunction& alpha,
                                const std::vector<Probe>& probes_pos,
                                const std::vector<Probe>& probes_neg) {
  const PiecewiseDensity m = mixture(f, g, p);
  DiagnosticReport r;
  r.functional = "lemma45";
  r.series.push_back(make_series("conv_over_sum_pos", probes_pos, conv_over_sum(f, g, probes_pos)));
  if (!probes_neg.empty())
    r.series.push_back(
        make_series("conv_over_sum_neg", probes_neg, conv_over_sum(f, g, probes_neg)));
  r.series.push_back(make_series(
      "mixture_subexp", probes_pos,
      map_probes(probes_pos, [&](const Probe& q) { return self_conv_ratio(m, 0, q.x); })));
  r.series.push_back(make_series(
      "conv_subexp", probes_pos,
      map_probes(probes_pos, [&](const Probe& q) { return conv_subexp_ratio(f, g, q.x); })));
  r.series.push_back(make_series(
      "mixture_middle", probes_pos,
      map_probes(probes_pos, [&](const Probe& q) { return fkz_integral(m, m, alpha, q.x); })));
  const DiagnosticReport ald = ald_check(m, probes_pos.empty() ? ExpReal(0) : probes_pos.front().x - ExpReal(1),
                                         Real(1), probes_pos);
  Real ald_max = 0;
  for (const Real& v : ald.primary().values) ald_max = std::max(ald_max, v);
  r.findings.push_back("mixture max forward ratio on positive probes = " + num(ald_max, 8));
  if (!probes_neg.empty()) {
    Real sup = 0;
    for (const Real& v : r.series[1].values) sup = std::max(sup, v);
    r.findings.push_back("negative tail sup (f*g)/(f+g) = " + num(sup, 8));
    if (!mp::isfinite(sup)) r.ok = false;
  }
  auto find = [&](const std::string& name) -> const Series& {
    for (const Series& s : r.series)
      if (s.name == name) return s;
    return r.series.front();
  };
  const Verdict vm = find("mixture_subexp").verdict, vc = find("conv_subexp").verdict;
  r.verdict = vm;
  if (vm != vc) r.ok = false;
  r.findings.push_back("mixture / conv subexp verdicts: " + to_string(vm) + " / " + to_string(vc));
  r.params = VerdictRules{}.describe();
  r.params["p"] = to_string(p);
  r.params["alpha"] = alpha.str();
  r.params["f"] = f.info().name;
  r.params["g"] = g.info().name;
  return r;
}

DiagnosticReport lemma6_verify(const PiecewiseDensity& f, const Rational& gamma,
                               const std::vector<Probe>& probes) {
  const PiecewiseDensity t = tilt(f, gamma);
  DiagnosticReport a = subexp_scan(f, 0, probes);
  DiagnosticReport b = subexp_scan(t, gamma, probes);
  DiagnosticReport r;
  r.functional = "lemma6";
  r.series.push_back(a.series.front());
  r.series.back().name = "untilted";
  r.series.push_back(b.series.front());
  r.series.back().name = "tilted";
  Real worst = 0;
  for (std::size_t i = 0; i < probes.size(); ++i)
    worst = std::max(worst, abs(r.series[1].values[i] / r.series[0].values[i] - 1));
  r.ok = worst <= Real(1e-10);
  r.verdict = r.series[0].verdict;
  r.findings.push_back("max relative difference = " + num(worst, 6));
  r.params = VerdictRules{}.describe();
  r.params["gamma"] = to_string(gamma);
  r.params["density"] = f.info().name;
  return r;
}

}  // namespace subexp
