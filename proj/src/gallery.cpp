#include "subexp/gallery.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <functional>

#include "subexp/diagnose.hpp"
#include "subexp/errors.hpp"

namespace subexp {

namespace mp = boost::multiprecision;

namespace {

Rational ipow(int n, long k) {
  Rational out = 1;
  for (long i = 0; i < std::labs(k); ++i) out *= n;
  return k < 0 ? Rational(1) / out : out;
}

// Exact values; n^q is exact when 2q is an integer and rounded otherwise.
struct ExactField {
  using T = ExpReal;
  bool inexact = false;

  T c(const Rational& q) const { return ExpReal(q); }
  T e(const Rational& a, const Rational& b = 0) const { return ExpReal::exp(a, b); }
  T pow(int n, const Rational& q) {
    const Rational k = 2 * q;
    if (mp::denominator(k) == 1) {
      const long kk = static_cast<long>(mp::numerator(k));
      const long fl = kk >= 0 ? kk / 2 : -((-kk + 1) / 2);
      Coeff coef(ipow(n, fl));
      if (kk - 2 * fl == 1) coef = coef * Coeff::sqrt_of(Rational(n));
      return ExpReal::term(coef, 0);
    }
    inexact = true;
    return ExpReal(exact_rational(mp::pow(Real(n), to_real(q))));
  }
  T inv_log(int n) const { return ExpReal(exact_rational(1 / log(Real(n)))); }
};

struct FloatField {
  using T = Real;
  T c(const Rational& q) const { return to_real(q); }
  T e(const Rational& a, const Rational& b = 0) const {
    return exp(to_real(a) + sqrt(to_real(b)));
  }
  T pow(int n, const Rational& q) const { return mp::pow(Real(n), to_real(q)); }
  T inv_log(int n) const { return to_real(exact_rational(1 / log(Real(n)))); }
};

template <class T>
struct Row {
  std::vector<T> x;
  std::vector<std::vector<T>> v;  // one value list per member
};

template <class F>
Row<typename F::T> ex1_row(F& F_, int n, const Rational& eps) {
  using T = typename F::T;
  const T L = F_.e(-n) * F_.pow(n, -2);
  const T low = F_.e(-n) * F_.pow(n, Rational(-3) - eps);
  const T r = F_.e(0, n);
  const T er = F_.e(1, n);
  const T a5 = (F_.e(n) + F_.e(n + 1)) * F_.c(Rational(1, 2));
  Row<T> out;
  out.x = {F_.e(n), a5 - r * F_.c(3) - er, a5 - r * F_.c(2) - er, a5 - r - er, a5 - r, a5, a5 + r};
  const std::vector<T> p = {L, L, L * F_.c(2) - low, L, L, low, L};
  std::vector<T> q;
  for (const T& v : p) q.push_back(L * F_.c(2) - v);
  if (n % 2 == 0)
    out.v = {p, q};
  else
    out.v = {q, p};
  out.v.push_back(std::vector<T>(7, L));
  return out;
}

template <class F>
Row<typename F::T> ex2_row(F& F_, int n, const Rational& eps) {
  using T = typename F::T;
  const T L = F_.e(-n) * F_.pow(n, -2);
  const T M = F_.e(-n) * F_.pow(n, Rational(-3) - eps);
  const T a3 = (F_.e(n) + F_.e(n + 1)) * F_.c(Rational(1, 2));
  Row<T> out;
  out.x = {F_.e(n), F_.e(n) * F_.c(Rational(3, 2)), a3 - F_.e(0, n), a3};
  const T half = F_.c(Rational(1, 2));
  out.v = {{M, M, L, M}, {M, M, M, M}, {M, M, (L + M) * half, M}};
  return out;
}

template <class F>
Row<typename F::T> ex3_row(F& F_, int n, const Rational& eps) {
  using T = typename F::T;
  const T L = F_.e(-n) * F_.pow(n, -2);
  const T dip = L * F_.pow(n, -eps);
  Row<T> out;
  out.x = {F_.e(n), F_.e(n) * (F_.c(1) + F_.inv_log(n)),
           (F_.e(n) + F_.e(n + 1)) * F_.c(Rational(1, 2))};
  out.v = {{L, dip, L}, {L, L * F_.c(2) - dip, L}};
  return out;
}

template <class F>
Row<typename F::T> ex6_row(F& F_, int n, const Rational&) {
  using T = typename F::T;
  auto lev = [&](int k) { return F_.e(-k * k) * F_.pow(k, -4); };
  Row<T> out;
  out.x = {F_.e(n * n), F_.e(n * n) + F_.e(3 * n)};
  out.v = {{lev(n), lev(n + 1)}};
  return out;
}

// A family of densities sharing knots: head points, then one row per interval
// n_lo..n_hi, closed by the first point of row n_hi + 1.
struct Family {
  std::vector<ExpReal> x;
  std::vector<std::vector<ExpReal>> v;
  bool inexact = false;
};

using ExactRowFn = std::function<Row<ExpReal>(ExactField&, int)>;
using FloatRowFn = std::function<Row<Real>(FloatField&, int)>;

Family build_family(std::vector<ExpReal> head_x, std::vector<std::vector<ExpReal>> head_v,
                    const ExactRowFn& row, int n_lo, int n_hi) {
  ExactField F;
  Family fam{std::move(head_x), std::move(head_v), false};
  for (int n = n_lo; n <= n_hi + 1; ++n) {
    const Row<ExpReal> r = row(F, n);
    const std::size_t take = n <= n_hi ? r.x.size() : 1;
    for (std::size_t i = 0; i < take; ++i) {
      fam.x.push_back(r.x[i]);
      for (std::size_t m = 0; m < fam.v.size(); ++m) fam.v[m].push_back(r.v[m][i]);
    }
  }
  fam.inexact = F.inexact;
  return fam;
}

PiecewiseDensity polyline(const std::vector<ExpReal>& x, const std::vector<ExpReal>& v,
                          DensityInfo info) {
  std::vector<Segment> segs;
  segs.reserve(x.size());
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    segs.emplace_back(x[i], x[i + 1], std::vector<Part>{Part::linear(x[i], x[i + 1], v[i], v[i + 1])});
  return PiecewiseDensity(std::move(segs), std::move(info));
}

// Mass of intervals n_from.. beyond the truncation edge, per member, from the
// trapezoid areas of the float rows plus a power-law estimate of the rest.
std::vector<Real> tail_mass(const FloatRowFn& row, int n_from, int n_last) {
  FloatField F;
  std::vector<Real> total;
  std::vector<Real> prev, last;
  Row<Real> cur = row(F, n_from);
  for (int n = n_from; n <= n_last; ++n) {
    const Row<Real> next = row(F, n + 1);
    std::vector<Real> area(cur.v.size(), 0);
    for (std::size_t m = 0; m < cur.v.size(); ++m) {
      for (std::size_t i = 0; i < cur.x.size(); ++i) {
        const Real x1 = i + 1 < cur.x.size() ? cur.x[i + 1] : next.x[0];
        const Real v1 = i + 1 < cur.x.size() ? cur.v[m][i + 1] : next.v[m][0];
        area[m] += (x1 - cur.x[i]) * (cur.v[m][i] + v1) / 2;
      }
    }
    if (total.empty()) total.assign(area.size(), 0);
    for (std::size_t m = 0; m < area.size(); ++m) total[m] += area[m];
    prev = last;
    last = area;
    cur = next;
  }
  if (!prev.empty()) {
    const Real N = n_last;
    for (std::size_t m = 0; m < total.size(); ++m) {
      if (!(last[m] > 0) || !(prev[m] > 0)) continue;
      const Real p = log(prev[m] / last[m]) / log(N / (N - 1));
      if (p > Real(1.05)) total[m] += last[m] * N / (p - 1);
    }
  }
  return total;
}

std::string qstr(const Rational& q) { return to_string(q); }

DensityInfo base_info(const std::string& name, const std::string& example, int n_min, int n_max,
                      const GalleryParams& p) {
  DensityInfo info;
  info.name = name;
  info.params["example"] = example;
  info.params["n_min"] = std::to_string(n_min);
  info.params["n_max"] = std::to_string(n_max);
  info.params["epsilon"] = qstr(p.epsilon);
  return info;
}

PiecewiseDensity finish(const PiecewiseDensity& raw, const Real& tail_raw) {
  PiecewiseDensity f = normalize(raw);
  DensityInfo info = f.info();
  info.mass_deficit = tail_raw * info.scale;
  return f.with_info(std::move(info));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

int nmax_default(const GalleryParams& p) { return p.n_max_or(40); }

// Tail rows run until the float range or a fixed count ends.
constexpr int kTailRows = 2000;

}  // namespace

Rational default_delta(const std::string& example, const Rational& eps) {
  if (example == "ex1") return Rational(1, 2);
  if (example == "ex2" || example == "ex4" || example == "ex5") return (1 - eps) / 4;
  if (example == "ex3") return (1 + eps / 2) / 2;
  return Rational(1, 2);
}

Rational delta_for(const std::string& example, const GalleryParams& p) {
  return p.delta.value_or(default_delta(example, p.epsilon));
}

void validate(const std::string& example, const GalleryParams& p) {
  const Rational& e = p.epsilon;
  const Rational d = delta_for(example, p);
  if (example != "ex6" && example != "oracle") {
    require(p.n_min >= 4, "n_min must be at least 4");
    require(p.n_min < nmax_default(p), "n_min must be below n_max");
    require(nmax_default(p) <= 4000, "n_max beyond the float range of the tail estimate");
  }
  if (example == "ex1") {
    require(e > 0 && e < 1, "ex1 needs epsilon in (0, 1)");
    require(d > 0 && d < 1, "ex1 needs delta in (0, 1)");
  } else if (example == "ex2" || example == "ex4" || example == "ex5") {
    require(e > 0 && e < 1, example + " needs epsilon in (0, 1)");
    require(d > 0 && d < (1 - e) / 2, example + " needs delta in (0, (1-epsilon)/2)");
    if (example != "ex2")
      require(p.weibull_gamma > 0 && p.weibull_gamma < 1, "Weibull gamma must lie in (0, 1)");
  } else if (example == "ex3") {
    require(e > 0 && e < Rational(2, 3), "ex3 needs epsilon in (0, 2/3)");
    require(d > e && d < 1 - e / 2, "ex3 needs delta in (epsilon, 1-epsilon/2)");
    require(p.negative_mix > 0 && p.negative_mix < 1, "negative mix weight must lie in (0, 1)");
  } else if (example == "ex6") {
    require(p.n_max_or(12) >= 1, "ex6 needs n_max >= 1");
    require(p.n_max_or(12) <= 12, "ex6 needs n_max <= 12");
  }
}

Ex1 build_ex1(const GalleryParams& p) {
  validate("ex1", p);
  const int n0 = p.n_min, n1 = nmax_default(p);
  const Rational eps = p.epsilon;
  ExactField F;
  const ExpReal L0 = F.e(-n0) * F.pow(n0, -2);
  const Family fam = build_family({ExpReal(0), ExpReal::exp(-n0)}, {{L0, L0}, {L0, L0}, {L0, L0}},
                                  [&](ExactField& f, int n) { return ex1_row(f, n, eps); }, n0, n1);
  const std::vector<Real> tail = tail_mass(
      [&](FloatField& f, int n) { return ex1_row(f, n, eps); }, n1 + 1, n1 + kTailRows);
  Ex1 out;
  const char* names[] = {"ex1.f", "ex1.g", "ex1.h"};
  PiecewiseDensity* dst[] = {&out.f, &out.g, &out.h};
  for (int m = 0; m < 3; ++m) {
    DensityInfo info = base_info(names[m], "ex1", n0, n1, p);
    info.params["delta"] = qstr(delta_for("ex1", p));
    info.notes["head"] = "constant e^-n_min n_min^-2 on [0, e^-n_min] and [e^-n_min, e^n_min]";
    if (fam.inexact) info.notes["powers"] = "n^-epsilon rounded to float128";
    *dst[m] = finish(polyline(fam.x, fam.v[m], std::move(info)), tail[m]);
  }
  return out;
}

Ex2 build_ex2(const GalleryParams& p) {
  validate("ex2", p);
  const int n0 = p.n_min, n1 = nmax_default(p);
  const Rational eps = p.epsilon;
  ExactField F;
  const ExpReal M0 = F.e(-n0) * F.pow(n0, Rational(-3) - eps);
  const Family fam = build_family({ExpReal(0)}, {{M0}, {M0}, {M0}},
                                  [&](ExactField& f, int n) { return ex2_row(f, n, eps); }, n0, n1);
  const std::vector<Real> tail = tail_mass(
      [&](FloatField& f, int n) { return ex2_row(f, n, eps); }, n1 + 1, n1 + kTailRows);
  Ex2 out;
  const char* names[] = {"ex2.f", "ex2.g", "ex2.h"};
  PiecewiseDensity* dst[] = {&out.f, &out.g, &out.h};
  for (int m = 0; m < 3; ++m) {
    DensityInfo info = base_info(names[m], "ex2", n0, n1, p);
    info.params["delta"] = qstr(delta_for("ex2", p));
    info.notes["head"] = "constant e^-n_min n_min^-(3+epsilon) on [0, e^n_min]";
    if (fam.inexact) info.notes["powers"] = "n^-(3+epsilon) rounded to float128";
    *dst[m] = finish(polyline(fam.x, fam.v[m], std::move(info)), tail[m]);
  }
  return out;
}

Ex3 build_ex3(const GalleryParams& p) {
  validate("ex3", p);
  const int n0 = p.n_min, n1 = nmax_default(p);
  const Rational eps = p.epsilon;
  ExactField F;
  const ExpReal L0 = F.e(-n0) * F.pow(n0, -2);
  const Family fam = build_family({ExpReal(0)}, {{L0}, {L0}},
                                  [&](ExactField& f, int n) { return ex3_row(f, n, eps); }, n0, n1);
  const std::vector<Real> tail = tail_mass(
      [&](FloatField& f, int n) { return ex3_row(f, n, eps); }, n1 + 1, n1 + kTailRows);
  auto info_for = [&](const std::string& name) {
    DensityInfo info = base_info(name, "ex3", n0, n1, p);
    info.params["delta"] = qstr(delta_for("ex3", p));
    info.notes["head"] = "constant e^-n_min n_min^-2 on [0, e^n_min]";
    info.notes["breakpoints"] = "a(n,1) = e^n (1 + r_n), r_n the float128 value of 1/log n as a rational";
    if (fam.inexact) info.notes["powers"] = "n^-epsilon rounded to float128";
    return info;
  };
  Ex3 out;
  out.f_plus_raw = polyline(fam.x, fam.v[0], info_for("ex3.f+"));
  out.g_raw = polyline(fam.x, fam.v[1], info_for("ex3.g"));
  out.f_plus = finish(out.f_plus_raw, tail[0]);
  out.g = finish(out.g_raw, tail[1]);

  PiecewiseDensity sum = exact_sum(out.f_plus_raw, out.g_raw);
  sum = sum.with_info(info_for("ex3.h+"));
  out.h_plus = finish(sum, tail[0] + tail[1]);

  const WitnessSequence w = dc_witness_search(out.f_plus);
  out.f_minus = build_negative_part(w);
  {
    DensityInfo info = out.f_minus.info();
    info.name = "ex3.f-";
    info.params["example"] = "ex3";
    info.params["witnesses"] = std::to_string(w.items.size());
    out.f_minus = out.f_minus.with_info(std::move(info));
  }
  out.f_two_sided = mixture(out.f_plus, out.f_minus, p.negative_mix);
  {
    DensityInfo info = info_for("ex3.f");
    info.params["negative_mix"] = qstr(p.negative_mix);
    info.params["witnesses"] = std::to_string(w.items.size());
    out.f_two_sided = out.f_two_sided.with_info(std::move(info));
  }
  // Weight of the two-sided f in h so that its positive part is a multiple of
  // f+ + g: P p / m+ = (1 - P) / m_g.
  const Real mp_ = out.f_plus_raw.mass(), mg = out.g_raw.mass();
  const Rational P = exact_rational(mp_ / (mp_ + to_real(p.negative_mix) * mg));
  out.h = mixture(out.f_two_sided, out.g, P);
  {
    DensityInfo info = info_for("ex3.h");
    info.params["p"] = qstr(P);
    info.params["negative_mix"] = qstr(p.negative_mix);
    out.h = out.h.with_info(std::move(info));
  }
  return out;
}

Ex4 build_ex4(const GalleryParams& p) {
  validate("ex4", p);
  Ex4 out;
  const Ex2 e2 = build_ex2(p);
  DensityInfo fi = e2.f.info();
  fi.name = "ex4.f";
  fi.params["example"] = "ex4";
  fi.params["delta"] = qstr(delta_for("ex4", p));
  out.f = e2.f.with_info(std::move(fi));
  const ExpReal edge = e2.f.support_hi().exact;
  DensityInfo gi = base_info("ex4.g", "ex4", p.n_min, nmax_default(p), p);
  gi.params["weibull_gamma"] = qstr(p.weibull_gamma);
  const PiecewiseDensity raw(
      {Segment(ExpReal(0), edge, {Part::weibull(p.weibull_gamma)})}, std::move(gi));
  const Real deficit = exp(-pow(edge.approx(), to_real(p.weibull_gamma)));
  out.g = finish(raw, deficit);
  return out;
}

Ex5 build_ex5(const GalleryParams& p) {
  validate("ex5", p);
  const Ex4 e4 = build_ex4(p);
  Ex5 out;
  out.F = tilt(e4.f, p.tilt_gamma);
  out.G = tilt(e4.g, p.tilt_gamma);
  for (auto [d, name] : {std::pair{&out.F, "ex5.F"}, std::pair{&out.G, "ex5.G"}}) {
    DensityInfo info = d->info();
    info.name = name;
    info.params["example"] = "ex5";
    info.params["tilt_gamma"] = qstr(p.tilt_gamma);
    *d = d->with_info(std::move(info));
  }
  return out;
}

PiecewiseDensity build_ex6(const GalleryParams& p) {
  validate("ex6", p);
  const int n1 = p.n_max_or(12);
  ExactField F;
  const ExpReal lev1 = F.e(-1);
  const Family fam = build_family({ExpReal(0)}, {{lev1}},
                                  [](ExactField& f, int n) { return ex6_row(f, n, 0); }, 1, n1);
  // (n+1)^2 must stay inside the float128 exponent range.
  const std::vector<Real> tail =
      tail_mass([](FloatField& f, int n) { return ex6_row(f, n, 0); }, n1 + 1, 100);
  DensityInfo info = base_info("ex6.f", "ex6", 1, n1, p);
  info.params.erase("epsilon");
  info.notes["head"] = "constant e^-1 on [0, e]";
  return finish(polyline(fam.x, fam.v[0], std::move(info)), tail[0]);
}

PiecewiseDensity build_oracle_exp(const Rational& rate) {
  require(rate > 0, "oracle.exp needs a positive rate");
  const ExpReal r(rate);
  DensityInfo info;
  info.name = "oracle.exp" + qstr(rate);
  info.params["example"] = "oracle";
  info.params["rate"] = qstr(rate);
  info.params["truncation"] = "40";
  const PiecewiseDensity raw(
      {Segment(ExpReal(0), ExpReal(40), {Part::linear(ExpReal(0), ExpReal(40), r, r, Scaled(Real(1)), rate)})},
      std::move(info));
  return finish(raw, exp(-40 * to_real(rate)));
}

int points_per_interval(const std::string& example) {
  if (example == "ex1") return 7;
  if (example == "ex2" || example == "ex4" || example == "ex5") return 4;
  if (example == "ex3") return 3;
  if (example == "ex6") return 2;
  throw NotFoundError("no named points for " + example);
}

ExpReal named_point(const std::string& example, int n, int i) {
  const int count = points_per_interval(example);
  if (i < 0 || i >= count)
    throw PreconditionError("point index " + std::to_string(i) + " out of range for " + example);
  if (n < 1) throw PreconditionError("interval index must be positive");
  ExactField F;
  const Rational eps(1, 2);
  if (example == "ex1") return ex1_row(F, n, eps).x[i];
  if (example == "ex3") return ex3_row(F, n, eps).x[i];
  if (example == "ex6") return ex6_row(F, n, eps).x[i];
  return ex2_row(F, n, eps).x[i];
}

std::vector<std::string> gallery_names() {
  return {"ex1.f", "ex1.g", "ex1.h", "ex2.f", "ex2.g", "ex2.h", "ex3.f+", "ex3.g", "ex3.f",
          "ex3.f-", "ex3.h", "ex3.h+", "ex4.f", "ex4.g", "ex5.F", "ex5.G", "ex6.f", "oracle.exp1"};
}

std::string example_of(const std::string& name) {
  const auto dot = name.find('.');
  return name.substr(0, dot);
}

PiecewiseDensity gallery_density(const std::string& name, const GalleryParams& p) {
  if (name.rfind("oracle.exp", 0) == 0) {
    const std::string rate = name.substr(10);
    return build_oracle_exp(rate.empty() ? Rational(1) : parse_rational(rate));
  }
  const std::string ex = example_of(name);
  const std::string member = name.size() > ex.size() ? name.substr(ex.size() + 1) : "";
  if (ex == "ex1") {
    const Ex1 e = build_ex1(p);
    if (member == "f") return e.f;
    if (member == "g") return e.g;
    if (member == "h") return e.h;
  } else if (ex == "ex2") {
    const Ex2 e = build_ex2(p);
    if (member == "f") return e.f;
    if (member == "g") return e.g;
    if (member == "h") return e.h;
  } else if (ex == "ex3") {
    const Ex3 e = build_ex3(p);
    if (member == "f+" || member == "fplus") return e.f_plus;
    if (member == "g") return e.g;
    if (member == "f") return e.f_two_sided;
    if (member == "f-" || member == "fminus") return e.f_minus;
    if (member == "h") return e.h;
    if (member == "h+" || member == "hplus") return e.h_plus;
  } else if (ex == "ex4") {
    const Ex4 e = build_ex4(p);
    if (member == "f") return e.f;
    if (member == "g") return e.g;
  } else if (ex == "ex5") {
    const Ex5 e = build_ex5(p);
    if (member == "F" || member == "f") return e.F;
    if (member == "G" || member == "g") return e.G;
  } else if (ex == "ex6") {
    if (member == "f") return build_ex6(p);
  }
  throw NotFoundError("unknown gallery density '" + name + "'");
}

Envelope gallery_envelope(const std::string& name, const PiecewiseDensity& f,
                          const GalleryParams& p) {
  const Real e = boost::math::constants::e<Real>();
  const Real scale = f.info().scale;
  if (name == "ex1.l") return {name, 2 * (1 + e) * scale, 2, true};
  if (name == "ex2.l") return {name, (1 + e) * scale, 2, true};
  if (name == "ex3.u") return {name, 2 * (1 + e) * scale, 2, true};
  if (name == "ex4.lower") return {name, scale, 3 + to_real(p.epsilon), false};
  throw NotFoundError("unknown envelope '" + name + "'");
}

}  // namespace subexp
