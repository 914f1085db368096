#include "subexp/convolve.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <limits>

#include "integrals.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "subexp/errors.hpp"

namespace subexp {

namespace {

struct Breakpoint {
  Knot y, u;
};

const Knot& kmax(const Knot& a, const Knot& b) { return compare(a, b) >= 0 ? a : b; }
const Knot& kmin(const Knot& a, const Knot& b) { return compare(a, b) <= 0 ? a : b; }

std::vector<Knot> knots_of(const PiecewiseDensity& d) {
  std::vector<Knot> out;
  for (const Segment& s : d.segments()) {
    if (out.empty() || !(out.back() == s.left)) out.push_back(s.left);
    out.push_back(s.right);
  }
  return out;
}

int find_segment(const PiecewiseDensity& d, const Knot& lo, const Knot& hi) {
  const auto& segs = d.segments();
  auto it = std::lower_bound(segs.begin(), segs.end(), hi,
                             [](const Segment& s, const Knot& k) { return compare(s.right, k) < 0; });
  if (it == segs.end() || compare(it->left, lo) > 0) return -1;
  return static_cast<int>(it - segs.begin());
}

Knot approx_knot(const Real& v) {
  Knot k;
  k.approx = v;
  return k;
}

// Segment holding the window midpoint m; rounding in x - (x - k) rules out
// matching the window ends against the knots.
int find_segment_approx(const PiecewiseDensity& d, const Real& m) {
  const auto& segs = d.segments();
  auto it = std::lower_bound(segs.begin(), segs.end(), m,
                             [](const Segment& s, const Real& k) { return s.right.approx < k; });
  if (it == segs.end() || it->left.approx > m) return -1;
  return static_cast<int>(it - segs.begin());
}

Scaled weibull_value(const Part& p, const Real& u) {
  if (!(u > 0)) return Scaled();
  const Real s = p.shape_approx();
  const Real lu = log(u);
  return p.weight() * Scaled(s, (s - 1) * lu - exp(s * lu) - p.rate_approx() * u);
}

// Width of the first panel at `at`: the distance over which the log of the
// integrand changes by about one.
Real end_scale(const detail::ScaledIntegrand& fn, const Real& at, const Real& other) {
  const Real width = abs(other - at);
  const Real dir = other > at ? 1 : -1;
  const Real d = width * Real(1e-9);
  const Real l0 = fn(at + dir * d * Real(1e-3)).log_abs();
  const Real l1 = fn(at + dir * d).log_abs();
  Real scale = width / 2;
  if (boost::multiprecision::isfinite(l0) && boost::multiprecision::isfinite(l1)) {
    const Real slope = abs(l1 - l0) / (d * (1 - Real(1e-3)));
    if (slope > 0) scale = 1 / slope;
  }
  return std::clamp(scale, width * Real(1e-30), width / 2);
}

Scaled smooth(const detail::ScaledIntegrand& fn, const Real& a, const Real& b) {
  if (!(b > a)) return Scaled();
  return detail::integrate_smooth(fn, a, b, end_scale(fn, a, b), end_scale(fn, b, a));
}

// Integral over y in [a, b] of other(y) * W(y) with W the Weibull part pw,
// by the substitution sigma = y^s, which absorbs the y^{s-1} singularity.
Scaled integrate_weibull_side(const Part& pw, const Real& a, const Real& b,
                              const std::function<Scaled(const Real&)>& other) {
  const Real s = pw.shape_approx();
  const Real inv = 1 / s;
  const Real r = pw.rate_approx();
  auto fn = [&](const Real& sigma) {
    const Real y = pow(sigma, inv);
    const Scaled o = other(y);
    if (o.is_zero()) return o;
    return o * Scaled(Real(1), -sigma - r * y);
  };
  const Real sa = a > 0 ? pow(a, s) : Real(0);
  return pw.weight() * smooth(fn, sa, pow(b, s));
}

struct Task {
  std::optional<Scaled> bound;  // nullopt when no cheap bound exists
  std::function<Scaled()> run;
};

struct LinearSide {
  const Part* p;
  Real t0, s0;  // distances to the anchors at the window's left end (h = 0)
  int dir;      // +1 when the coordinate grows with h, -1 otherwise

  Real base(const Real& h) const { return p->base(t0 + dir * h, s0 - dir * h); }
};

Scaled linear_sup(const Part& p, const Real& v0, const Real& v1, const Real& pos0,
                  const Real& pos1) {
  const Real r = p.rate_approx();
  const Real e = std::max(-r * pos0, -r * pos1);
  return p.weight() * Scaled(std::max(v0, v1), e);
}

std::optional<Scaled> weibull_sup(const Part& p, const Real& lo) {
  if (!(lo > 0) || p.rate_approx() < 0) return std::nullopt;
  return weibull_value(p, lo);
}

std::optional<Scaled> weibull_mass(const Part& p, const Real& lo, const Real& hi) {
  const Real r = p.rate_approx();
  if (r < 0) return std::nullopt;
  return p.weight() * detail::weibull_integral(p.shape_approx(), 0, lo, hi) *
         Scaled::exp_of(-r * lo);
}

std::optional<Scaled> mul(const std::optional<Scaled>& a, const std::optional<Scaled>& b) {
  if (!a || !b) return std::nullopt;
  return *a * *b;
}

}  // namespace

ConvPlan conv_plan(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x,
                   const Bound& y_lo, const Bound& y_hi) {
  ConvPlan plan{x, {}};
  if (f.empty() || g.empty()) return plan;
  const Knot a0(x - f.support_hi().exact), a1(x - f.support_lo().exact);
  Knot y0 = kmax(g.support_lo(), a0);
  Knot y1 = kmin(g.support_hi(), a1);
  if (y_lo) y0 = kmax(y0, Knot(*y_lo));
  if (y_hi) y1 = kmin(y1, Knot(*y_hi));
  if (compare(y0, y1) >= 0) return plan;
  const Knot u0(x - y1.exact), u1(x - y0.exact);

  std::vector<Breakpoint> gb;
  for (const Knot& k : knots_of(g))
    if (compare(k, y0) > 0 && compare(k, y1) < 0) gb.push_back({k, Knot(x - k.exact)});
  std::vector<Breakpoint> fb;
  for (const Knot& k : knots_of(f))
    if (compare(k, u0) > 0 && compare(k, u1) < 0) fb.push_back({Knot(x - k.exact), k});
  std::reverse(fb.begin(), fb.end());

  std::vector<Breakpoint> all;
  all.reserve(gb.size() + fb.size() + 2);
  all.push_back({y0, u1});
  std::size_t i = 0, j = 0;
  while (i < gb.size() || j < fb.size()) {
    const Breakpoint* next;
    if (j == fb.size() || (i < gb.size() && compare(gb[i].y, fb[j].y) <= 0))
      next = &gb[i++];
    else
      next = &fb[j++];
    if (compare(next->y, all.back().y) > 0) all.push_back(*next);
  }
  all.push_back({y1, u0});
  if (compare(all[all.size() - 2].y, y1) == 0 && all.size() > 2) all.erase(all.end() - 2);

  for (std::size_t k = 0; k + 1 < all.size(); ++k) {
    ConvWindow w{all[k].y, all[k + 1].y, all[k].u, all[k + 1].u, -1, -1};
    w.g_seg = find_segment(g, w.y_lo, w.y_hi);
    if (w.g_seg < 0) continue;
    w.f_seg = find_segment(f, w.u_hi, w.u_lo);
    if (w.f_seg < 0) continue;
    plan.windows.push_back(std::move(w));
  }
  return plan;
}

namespace {

// Closed forms and pruned quadrature over the windows of a plan.  With
// exact == false the knots carry float positions only.
Scaled integrate_plan(const PiecewiseDensity& f, const PiecewiseDensity& g, const ConvPlan& plan,
                      bool exact) {
  auto difference = [exact](const Knot& a, const Knot& b) {
    return exact ? subexp::difference(a, b) : a.approx - b.approx;
  };
  Scaled total;
  std::vector<Task> tasks;
  for (const ConvWindow& w : plan.windows) {
    const Real width = difference(w.y_hi, w.y_lo);
    if (!(width > 0)) continue;
    const Real ya = w.y_lo.approx, yb = w.y_hi.approx;
    const Real ua = w.u_lo.approx, ub = w.u_hi.approx;
    for (const Part& pf : f.segments()[w.f_seg].parts) {
      for (const Part& pg : g.segments()[w.g_seg].parts) {
        const bool lf = pf.kind() == PartKind::ExpLinear;
        const bool lg = pg.kind() == PartKind::ExpLinear;
        const Real rf = pf.rate_approx(), rg = pg.rate_approx();
        std::optional<LinearSide> sf, sg;
        if (lf)
          sf = LinearSide{&pf, difference(w.u_lo, pf.anchor_left()),
                          difference(pf.anchor_right(), w.u_lo), -1};
        if (lg)
          sg = LinearSide{&pg, difference(w.y_lo, pg.anchor_left()),
                          difference(pg.anchor_right(), w.y_lo), +1};
        if (lf && lg) {
          const Real f0 = sf->base(0), f1 = sf->base(width);
          const Real g0 = sg->base(0), g1 = sg->base(width);
          const detail::Kernel k = detail::bernstein_kernel((rf - rg) * width);
          const Real sum = f0 * g0 * k.k[0] + (f0 * g1 + f1 * g0) / 2 * k.k[1] + f1 * g1 * k.k[2];
          const Real e0 = -rf * ua - rg * ya;
          total += pf.weight() * pg.weight() * Scaled(width * sum, e0 + k.log_scale);
          continue;
        }
        if (lf) {
          // Weibull g: substitute on y.
          const Real f0 = sf->base(0), f1 = sf->base(width);
          Task t;
          t.bound = mul(linear_sup(pf, f0, f1, ua, ub), weibull_mass(pg, ya, yb));
          t.run = [&pf, &pg, side = *sf, ya, yb, ua, rf] {
            return integrate_weibull_side(pg, ya, yb, [&](const Real& y) {
              const Real h = y - ya;
              return pf.weight() * Scaled(side.base(h), -rf * (ua - h));
            });
          };
          tasks.push_back(std::move(t));
          continue;
        }
        if (lg) {
          // Weibull f: substitute on u = x - y.
          const Real g0 = sg->base(0), g1 = sg->base(width);
          Task t;
          t.bound = mul(linear_sup(pg, g0, g1, ya, yb), weibull_mass(pf, ub, ua));
          t.run = [&pf, &pg, side = *sg, ya, ua, ub, rg] {
            return integrate_weibull_side(pf, ub, ua, [&](const Real& u) {
              const Real h = ua - u;
              return pg.weight() * Scaled(side.base(h), -rg * (ya + h));
            });
          };
          tasks.push_back(std::move(t));
          continue;
        }
        // Both Weibull: split at the midpoint and substitute on the factor
        // whose singular end lies in each half.
        const Real ym = ya + width / 2;
        const Real um = ua - width / 2;
        Task left;
        left.bound = mul(weibull_sup(pf, um), weibull_mass(pg, ya, ym));
        left.run = [&pf, &pg, ya, ym, ua] {
          return integrate_weibull_side(pg, ya, ym, [&](const Real& y) {
            return weibull_value(pf, ua - (y - ya));
          });
        };
        tasks.push_back(std::move(left));
        Task right;
        right.bound = mul(weibull_sup(pg, ym), weibull_mass(pf, ub, um));
        right.run = [&pf, &pg, ya, ub, um, ua] {
          return integrate_weibull_side(pf, ub, um, [&](const Real& u) {
            return weibull_value(pg, ya + (ua - u));
          });
        };
        tasks.push_back(std::move(right));
      }
    }
  }
  if (tasks.empty()) return total;

  // Quadrature windows in decreasing order of their bounds; stop once the
  // bounds left over cannot move the total.
  std::stable_sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    if (!a.bound || !b.bound) return !a.bound && b.bound;
    return a.bound->log_abs() > b.bound->log_abs();
  });
  std::vector<Scaled> rest(tasks.size() + 1);
  for (std::size_t i = tasks.size(); i-- > 0;)
    rest[i] = rest[i + 1] + (tasks[i].bound ? *tasks[i].bound : Scaled());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].bound && !total.is_zero() &&
        rest[i].log_abs() < total.log_abs() + log(Real(1e-32)))
      break;
    total += tasks[i].run();
  }
  return total;
}

}  // namespace

Scaled partial_conv_scaled(const PiecewiseDensity& f, const PiecewiseDensity& g,
                           const ExpReal& x, const Bound& y_lo, const Bound& y_hi) {
  return integrate_plan(f, g, conv_plan(f, g, x, y_lo, y_hi), true);
}

ConvPlan conv_plan_approx(const PiecewiseDensity& f, const PiecewiseDensity& g, const Real& x) {
  ConvPlan plan{ExpReal::from_real(x), {}};
  if (f.empty() || g.empty()) return plan;
  const Real y0 = std::max(g.support_lo().approx, x - f.support_hi().approx);
  const Real y1 = std::min(g.support_hi().approx, x - f.support_lo().approx);
  if (!(y1 > y0)) return plan;
  std::vector<Real> ys{y0, y1};
  for (const Segment& s : g.segments())
    for (const Real& k : {s.left.approx, s.right.approx})
      if (k > y0 && k < y1) ys.push_back(k);
  for (const Segment& s : f.segments())
    for (const Real& k : {s.left.approx, s.right.approx})
      if (x - k > y0 && x - k < y1) ys.push_back(x - k);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
    const Real a = ys[k], b = ys[k + 1];
    ConvWindow w{approx_knot(a), approx_knot(b), approx_knot(x - a), approx_knot(x - b), -1, -1};
    w.g_seg = find_segment_approx(g, a + (b - a) / 2);
    if (w.g_seg < 0) continue;
    w.f_seg = find_segment_approx(f, x - a - (b - a) / 2);
    if (w.f_seg < 0) continue;
    plan.windows.push_back(std::move(w));
  }
  return plan;
}

Scaled conv_scaled_approx(const PiecewiseDensity& f, const PiecewiseDensity& g, const Real& x) {
  return integrate_plan(f, g, conv_plan_approx(f, g, x), false);
}

Scaled conv_scaled(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x) {
  return partial_conv_scaled(f, g, x, std::nullopt, std::nullopt);
}

Real partial_conv(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x,
                  const ExpReal& y_lo, const ExpReal& y_hi) {
  if (y_lo > y_hi) throw PreconditionError("partial_conv needs y_lo <= y_hi");
  return partial_conv_scaled(f, g, x, y_lo, y_hi).value();
}

Real conv_eval(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x) {
  return conv_scaled(f, g, x).value();
}

Real self_conv_ratio(const PiecewiseDensity& f, const Rational& gamma, const ExpReal& x) {
  const Scaled fx = eval_scaled(f, Knot(x));
  if (fx.is_zero()) throw PreconditionError("self_conv_ratio: density vanishes at x");
  const Scaled m = moment(f, gamma).value;
  return ratio(conv_scaled(f, f, x), Scaled(Real(2)) * m * fx);
}

Real conv_eval_quadrature(const PiecewiseDensity& f, const PiecewiseDensity& g, const Real& x,
                          const Real& tol) {
  std::vector<Real> pts;
  for (const Segment& s : g.segments()) {
    pts.push_back(s.left.approx);
    pts.push_back(s.right.approx);
  }
  for (const Segment& s : f.segments()) {
    pts.push_back(x - s.left.approx);
    pts.push_back(x - s.right.approx);
  }
  const Real lo = std::max(g.support_lo().approx, x - f.support_hi().approx);
  const Real hi = std::min(g.support_hi().approx, x - f.support_lo().approx);
  if (!(hi > lo)) return 0;
  std::vector<Real> cut{lo, hi};
  for (const Real& p : pts)
    if (p > lo && p < hi) cut.push_back(p);
  std::sort(cut.begin(), cut.end());
  cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
  boost::math::quadrature::tanh_sinh<Real> ts;
  Real total = 0;
  for (std::size_t i = 0; i + 1 < cut.size(); ++i) {
    const Real a = cut[i], b = cut[i + 1];
    auto fn = [&](Real y) {
      const Scaled fy = eval_scaled(f, Knot(ExpReal::from_real(x - y)));
      if (fy.is_zero()) return Real(0);
      return (fy * eval_scaled(g, Knot(ExpReal::from_real(y)))).value();
    };
    total += ts.integrate(fn, a, b, static_cast<Real>(tol));
  }
  return total;
}

}  // namespace subexp
