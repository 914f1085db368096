#include "subexp/density.hpp"

#include <algorithm>
#include <cmath>

#include "integrals.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"
#include "subexp/errors.hpp"

namespace subexp {

namespace mp = boost::multiprecision;

Real difference(const Knot& a, const Knot& b) {
  const Real d = a.approx - b.approx;
  const Real scale = std::max(abs(a.approx), abs(b.approx));
  if (abs(d) > scale * Real(0x1p-20)) return d;
  if (a.exact == b.exact) return 0;
  return (a.exact - b.exact).approx();
}

std::strong_ordering compare(const Knot& a, const Knot& b) {
  const Real d = a.approx - b.approx;
  const Real tol = std::max(abs(a.approx), abs(b.approx)) * Real(1e-25);
  if (d > tol) return std::strong_ordering::greater;
  if (d < -tol) return std::strong_ordering::less;
  return a.exact <=> b.exact;
}

// --- Part ------------------------------------------------------------------

Part Part::linear(ExpReal anchor_left, ExpReal anchor_right, ExpReal v0, ExpReal v1,
                  Scaled weight, Rational rate) {
  Part p;
  p.kind_ = PartKind::ExpLinear;
  p.anchor_left_ = Knot(std::move(anchor_left));
  p.anchor_right_ = Knot(std::move(anchor_right));
  if (compare(p.anchor_left_, p.anchor_right_) >= 0)
    throw PreconditionError("linear part needs anchor_left < anchor_right");
  if (v0.sign() < 0 || v1.sign() < 0) throw PreconditionError("negative density value");
  if (weight.sign() < 0) throw PreconditionError("negative part weight");
  p.v0_hp_ = v0.approx();
  p.v1_hp_ = v1.approx();
  p.flat_ = v0 == v1;
  p.v0_ = std::move(v0);
  p.v1_ = std::move(v1);
  p.width_ = difference(p.anchor_right_, p.anchor_left_);
  p.weight_ = weight;
  p.rate_ = std::move(rate);
  p.rate_hp_ = to_real(p.rate_);
  return p;
}

Part Part::weibull(Rational shape, Scaled weight, Rational rate) {
  if (!(shape > 0 && shape < 1)) throw PreconditionError("Weibull shape must lie in (0, 1)");
  if (weight.sign() < 0) throw PreconditionError("negative part weight");
  Part p;
  p.kind_ = PartKind::Weibull;
  p.shape_ = std::move(shape);
  p.shape_hp_ = to_real(p.shape_);
  p.weight_ = weight;
  p.rate_ = std::move(rate);
  p.rate_hp_ = to_real(p.rate_);
  return p;
}

Part Part::with_weight(Scaled w) const {
  Part p = *this;
  p.weight_ = w;
  return p;
}

Part Part::with_rate(Rational r) const {
  Part p = *this;
  p.rate_ = std::move(r);
  p.rate_hp_ = to_real(p.rate_);
  return p;
}

bool Part::same_shape(const Part& o) const {
  if (kind_ != o.kind_ || rate_ != o.rate_) return false;
  if (kind_ == PartKind::Weibull) return shape_ == o.shape_;
  return anchor_left_ == o.anchor_left_ && anchor_right_ == o.anchor_right_ && v0_ == o.v0_ &&
         v1_ == o.v1_;
}

bool operator==(const Part& a, const Part& b) {
  return a.same_shape(b) && a.weight_ == b.weight_;
}

Real Part::base(const Real& t, const Real& s) const {
  if (flat_) return v0_hp_;
  return (s * v0_hp_ + t * v1_hp_) / width_;
}

Scaled Part::value(const Knot& x) const {
  if (kind_ == PartKind::Weibull) {
    if (!(x.approx > 0)) return Scaled();
    const Real lx = log(x.approx);
    const Real xs = exp(shape_hp_ * lx);
    return weight_ * Scaled(shape_hp_, (shape_hp_ - 1) * lx - xs - rate_hp_ * x.approx);
  }
  const Real b = base(difference(x, anchor_left_), difference(anchor_right_, x));
  if (rate_hp_ == 0) return weight_ * Scaled(b);
  return weight_ * Scaled(b, -rate_hp_ * x.approx);
}

// --- integrals -------------------------------------------------------------

namespace detail {

Scaled weibull_integral(const Real& shape, const Real& rate, const Real& lo, const Real& hi) {
  if (!(hi > lo)) return Scaled();
  const Real a = lo > 0 ? pow(lo, shape) : Real(0);
  if (rate == 0) {
    const Real delta = lo > 0 ? a * expm1(shape * log1p((hi - lo) / lo)) : pow(hi, shape);
    return Scaled(-expm1(-delta), -a);
  }
  const Real b = pow(hi, shape);
  const Real inv = 1 / shape;
  auto psi = [&](const Real& s) { return -s - rate * pow(s, inv); };
  auto slope = [&](const Real& s) {
    return s > 0 ? -1 - rate * inv * pow(s, inv - 1) : Real(-1);
  };
  auto scale = [&](const Real& s) {
    const Real d = abs(slope(s));
    return d > 0 ? 1 / d : b - a;
  };
  return integrate_smooth([&](const Real& s) { return Scaled::exp_of(psi(s)); }, a, b,
                          scale(a), scale(b));
}

Scaled part_integral(const Part& p, const Knot& lo, const Knot& hi, const Real& shift) {
  const Real rate = p.rate_approx() - shift;
  if (p.kind() == PartKind::Weibull) {
    return p.weight() * weibull_integral(p.shape_approx(), rate, lo.approx, hi.approx);
  }
  const Real w = difference(hi, lo);
  if (!(w > 0)) return Scaled();
  const Real l0 = p.base(difference(lo, p.anchor_left()), difference(p.anchor_right(), lo));
  const Real l1 = p.base(difference(hi, p.anchor_left()), difference(p.anchor_right(), hi));
  if (rate == 0) return p.weight() * Scaled(w * (l0 + l1) / 2);
  const Kernel k = bernstein_kernel(-rate * w);
  const Real sum = l0 * k.k[0] + (l0 + l1) / 2 * k.k[1] + l1 * k.k[2];
  return p.weight() * Scaled(w * sum, k.log_scale - rate * lo.approx);
}

bool linear_value(const Segment& s, const Knot& x, Real* value, Real* slope) {
  Real v = 0, d = 0;
  for (const Part& p : s.parts) {
    if (p.kind() != PartKind::ExpLinear || p.rate() != 0) return false;
    const Real w = p.weight().value();
    v += w * p.base(difference(x, p.anchor_left()), difference(p.anchor_right(), x));
    if (!p.flat()) d += w * (p.v1_approx() - p.v0_approx()) / p.width();
  }
  if (value) *value = v;
  if (slope) *slope = d;
  return true;
}

}  // namespace detail

namespace {

Scaled segment_integral(const Segment& s, const Knot& lo, const Knot& hi, const Real& shift) {
  Scaled total;
  for (const Part& p : s.parts) total += detail::part_integral(p, lo, hi, shift);
  return total;
}

// Exact value of a unit-weight, untilted linear part at one of its anchors.
const ExpReal* anchor_value(const Part& p, const Knot& x) {
  if (p.kind() != PartKind::ExpLinear || p.rate() != 0 || !(p.weight() == Scaled(Real(1))))
    return nullptr;
  if (x == p.anchor_left()) return &p.v0();
  if (x == p.anchor_right()) return &p.v1();
  return nullptr;
}

std::optional<ExpReal> exact_segment_integral(const Segment& s, const Knot& lo, const Knot& hi) {
  ExpReal heights;
  for (const Part& p : s.parts) {
    const ExpReal* a = anchor_value(p, lo);
    const ExpReal* b = anchor_value(p, hi);
    if (!a || !b) return std::nullopt;
    heights += *a + *b;
  }
  try {
    return (hi.exact - lo.exact) * heights * Coeff(Rational(1, 2));
  } catch (const NotRepresentable&) {
    return std::nullopt;
  }
}

}  // namespace

// --- PiecewiseDensity ------------------------------------------------------

PiecewiseDensity::PiecewiseDensity(std::vector<Segment> segments, DensityInfo info,
                                   bool normalized)
    : segments_(std::move(segments)), info_(std::move(info)), normalized_(normalized) {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (compare(s.left, s.right) >= 0)
      throw PreconditionError("segment " + std::to_string(i) + " is empty or reversed");
    if (i > 0 && compare(segments_[i - 1].right, s.left) > 0)
      throw PreconditionError("segments " + std::to_string(i - 1) + " and " +
                              std::to_string(i) + " overlap");
    if (s.parts.empty()) throw PreconditionError("segment without parts");
    for (const Part& p : s.parts) {
      if (p.kind() == PartKind::Weibull) {
        if (s.left.exact.sign() < 0)
          throw PreconditionError("Weibull part on negative support");
        continue;
      }
      if (compare(p.anchor_left(), s.left) > 0 || compare(s.right, p.anchor_right()) > 0)
        throw PreconditionError("linear part anchors do not cover segment " +
                                std::to_string(i));
    }
  }
  Scaled total;
  for (const Segment& s : segments_) total += segment_integral(s, s.left, s.right, 0);
  mass_ = total.value();
  if (!mp::isfinite(mass_)) throw NumericError("density mass is not finite");
  std::optional<ExpReal> exact = ExpReal();
  for (const Segment& s : segments_) {
    auto part = exact_segment_integral(s, s.left, s.right);
    if (!part) {
      exact.reset();
      break;
    }
    try {
      *exact += *part;
    } catch (const NotRepresentable&) {
      exact.reset();
      break;
    }
  }
  exact_mass_ = std::move(exact);
  if (normalized_ && !(abs(mass_ - 1) <= Real(1e-20)))
    throw NumericError("density flagged normalized has mass " + format_real(mass_, 25));
}

PiecewiseDensity PiecewiseDensity::with_info(DensityInfo info) const {
  PiecewiseDensity out = *this;
  out.info_ = std::move(info);
  return out;
}

int PiecewiseDensity::locate(const Knot& x) const {
  auto it = std::lower_bound(segments_.begin(), segments_.end(), x,
                             [](const Segment& s, const Knot& k) { return compare(s.right, k) < 0; });
  if (it == segments_.end()) return -1;
  const auto c = compare(x, it->left);
  if (c > 0 || (c == 0 && it == segments_.begin())) return static_cast<int>(it - segments_.begin());
  return -1;
}

bool operator==(const PiecewiseDensity& a, const PiecewiseDensity& b) {
  return a.normalized_ == b.normalized_ && a.info_ == b.info_ && a.segments_ == b.segments_;
}

// --- operations ------------------------------------------------------------

Scaled eval_scaled(const PiecewiseDensity& f, const Knot& x) {
  const int i = f.locate(x);
  if (i < 0) return Scaled();
  Scaled total;
  for (const Part& p : f.segments()[i].parts) total += p.value(x);
  return total;
}

Real eval(const PiecewiseDensity& f, const ExpReal& x) { return eval_scaled(f, Knot(x)).value(); }

namespace {

template <class Fn>
void for_each_piece(const PiecewiseDensity& f, const Knot& a, const Knot& b, Fn fn) {
  for (const Segment& s : f.segments()) {
    if (compare(s.right, a) <= 0) continue;
    if (compare(s.left, b) >= 0) break;
    const Knot& lo = compare(s.left, a) >= 0 ? s.left : a;
    const Knot& hi = compare(s.right, b) <= 0 ? s.right : b;
    fn(s, lo, hi);
  }
}

}  // namespace

Scaled integrate(const PiecewiseDensity& f, const ExpReal& a, const ExpReal& b) {
  const Knot ka(a), kb(b);
  if (compare(ka, kb) > 0) throw PreconditionError("integrate needs a <= b");
  Scaled total;
  for_each_piece(f, ka, kb, [&](const Segment& s, const Knot& lo, const Knot& hi) {
    total += segment_integral(s, lo, hi, 0);
  });
  return total;
}

std::optional<ExpReal> integrate_exact(const PiecewiseDensity& f, const ExpReal& a,
                                       const ExpReal& b) {
  const Knot ka(a), kb(b);
  if (compare(ka, kb) > 0) throw PreconditionError("integrate needs a <= b");
  std::optional<ExpReal> total = ExpReal();
  for_each_piece(f, ka, kb, [&](const Segment& s, const Knot& lo, const Knot& hi) {
    if (!total) return;
    auto part = exact_segment_integral(s, lo, hi);
    if (!part) {
      total.reset();
      return;
    }
    try {
      *total += *part;
    } catch (const NotRepresentable&) {
      total.reset();
    }
  });
  return total;
}

PiecewiseDensity scale_density(const PiecewiseDensity& f, const Scaled& factor) {
  std::vector<Segment> segs = f.segments();
  for (Segment& s : segs)
    for (Part& p : s.parts) p = p.with_weight(p.weight() * factor);
  DensityInfo info = f.info();
  info.scale *= factor.value();
  return PiecewiseDensity(std::move(segs), std::move(info));
}

PiecewiseDensity normalize(const PiecewiseDensity& f) {
  if (f.normalized()) return f;
  const Real m = f.exact_mass() ? f.exact_mass()->approx() : f.mass();
  if (!(m > 0) || !mp::isfinite(m)) throw PreconditionError("cannot normalize: mass is zero or not finite");
  std::vector<Segment> segs = f.segments();
  const Scaled factor(1 / m);
  for (Segment& s : segs)
    for (Part& p : s.parts) p = p.with_weight(p.weight() * factor);
  DensityInfo info = f.info();
  info.scale *= 1 / m;
  return PiecewiseDensity(std::move(segs), std::move(info), true);
}

namespace {

std::vector<Knot> merged_knots(const PiecewiseDensity& f, const PiecewiseDensity& g) {
  std::vector<Knot> out;
  for (const PiecewiseDensity* d : {&f, &g})
    for (const Segment& s : d->segments()) {
      out.push_back(s.left);
      out.push_back(s.right);
    }
  std::sort(out.begin(), out.end(), [](const Knot& a, const Knot& b) { return compare(a, b) < 0; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Knot& a, const Knot& b) { return compare(a, b) == 0; }),
            out.end());
  return out;
}

const Segment* covering(const PiecewiseDensity& f, std::size_t& j, const Knot& lo, const Knot& hi) {
  const auto& segs = f.segments();
  while (j < segs.size() && compare(segs[j].right, hi) < 0) ++j;
  if (j < segs.size() && compare(segs[j].left, lo) <= 0) return &segs[j];
  return nullptr;
}

// cf * f + cg * g, merging linear parts that share anchors, rate and weight
// into a single part with exact combined values.
PiecewiseDensity combine(const PiecewiseDensity& f, const PiecewiseDensity& g, const Rational& cf,
                         const Rational& cg, DensityInfo info, bool normalized) {
  const std::vector<Knot> knots = merged_knots(f, g);
  const Scaled sf(to_real(cf)), sg(to_real(cg));
  std::vector<Segment> out;
  std::size_t jf = 0, jg = 0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const Segment* a = covering(f, jf, knots[i], knots[i + 1]);
    const Segment* b = covering(g, jg, knots[i], knots[i + 1]);
    std::vector<Part> parts;
    std::vector<bool> used(b ? b->parts.size() : 0, false);
    if (a) {
      for (const Part& p : a->parts) {
        bool merged = false;
        for (std::size_t k = 0; b && k < b->parts.size() && !merged; ++k) {
          const Part& q = b->parts[k];
          if (used[k] || p.kind() != q.kind() || p.rate() != q.rate()) continue;
          if (p.kind() == PartKind::ExpLinear && p.anchor_left() == q.anchor_left() &&
              p.anchor_right() == q.anchor_right() && p.weight() == q.weight()) {
            parts.push_back(Part::linear(p.anchor_left().exact, p.anchor_right().exact,
                                         p.v0() * Coeff(cf) + q.v0() * Coeff(cg),
                                         p.v1() * Coeff(cf) + q.v1() * Coeff(cg), p.weight(),
                                         p.rate()));
            used[k] = merged = true;
          } else if (p.same_shape(q)) {
            parts.push_back(p.with_weight(p.weight() * sf + q.weight() * sg));
            used[k] = merged = true;
          }
        }
        if (!merged) parts.push_back(p.with_weight(p.weight() * sf));
      }
    }
    for (std::size_t k = 0; b && k < b->parts.size(); ++k)
      if (!used[k]) parts.push_back(b->parts[k].with_weight(b->parts[k].weight() * sg));
    if (parts.empty()) continue;
    out.emplace_back(knots[i].exact, knots[i + 1].exact, std::move(parts));
  }
  return PiecewiseDensity(std::move(out), std::move(info), normalized);
}

}  // namespace

PiecewiseDensity mixture(const PiecewiseDensity& f, const PiecewiseDensity& g, const Rational& p) {
  if (!(p > 0 && p < 1)) throw PreconditionError("mixture weight must lie in (0, 1)");
  if (!f.normalized() || !g.normalized())
    throw PreconditionError("mixture needs normalized inputs");
  DensityInfo info;
  info.name = "mixture(" + f.info().name + "," + g.info().name + ")";
  info.params["p"] = to_string(p);
  return combine(f, g, p, 1 - p, std::move(info), true);
}

PiecewiseDensity exact_sum(const PiecewiseDensity& f, const PiecewiseDensity& g) {
  DensityInfo info;
  info.name = f.info().name + "+" + g.info().name;
  return combine(f, g, 1, 1, std::move(info), false);
}

PiecewiseDensity tilt(const PiecewiseDensity& f, const Rational& gamma) {
  if (gamma == 0) return f;
  std::vector<Segment> segs = f.segments();
  for (Segment& s : segs)
    for (Part& p : s.parts) p = p.with_rate(p.rate() + gamma);
  DensityInfo info = f.info();
  info.params["tilt"] = to_string(gamma);
  PiecewiseDensity raw(std::move(segs), info);
  const Real m = raw.mass();
  if (!(m > 0) || !mp::isfinite(m)) throw NumericError("tilted mass is not finite");
  std::vector<Segment> out = raw.segments();
  const Scaled factor(1 / m);
  for (Segment& s : out)
    for (Part& p : s.parts) p = p.with_weight(p.weight() * factor);
  info.scale *= 1 / m;
  return PiecewiseDensity(std::move(out), std::move(info), f.normalized());
}

MomentValue moment(const PiecewiseDensity& f, const Rational& gamma) {
  MomentValue out{gamma, Scaled()};
  const Real shift = to_real(gamma);
  for (const Segment& s : f.segments()) out.value += segment_integral(s, s.left, s.right, shift);
  if (!mp::isfinite(out.value.log_abs())) throw NumericError("moment is not finite");
  return out;
}

// --- envelopes -------------------------------------------------------------

Real Envelope::value(const Real& x) const {
  const Real lx = log(x);
  return constant / (x * pow(lx, log_power));
}

Real Envelope::derivative(const Real& x) const {
  const Real lx = log(x);
  return -constant / (x * x * pow(lx, log_power)) * (1 + log_power / lx);
}

EnvelopeReport envelope_compare(const PiecewiseDensity& f, const Envelope& env,
                                const ExpReal& xmin) {
  EnvelopeReport rep;
  rep.envelope = env.name;
  rep.min_ratio = std::numeric_limits<Real>::infinity();
  const Knot kmin(xmin);
  if (!(kmin.approx > 1)) throw PreconditionError("envelope needs xmin > 1");
  const Real tol = Real(1e-24);
  auto violates = [&](const Real& fv, const Real& ev) {
    return env.upper ? fv > ev * (1 + tol) : fv < ev * (1 - tol);
  };
  auto record = [&](const ExpReal& x, const Real& fv, const Real& ev) {
    if (!rep.first_violation) rep.first_violation = EnvelopeViolation{x, fv, ev};
  };
  for (const Segment& s : f.segments()) {
    if (rep.first_violation) break;
    if (compare(s.right, kmin) <= 0) continue;
    const Knot& lo = compare(s.left, kmin) >= 0 ? s.left : kmin;
    const Knot& hi = s.right;
    Real fl = 0, fr = 0, slope = 0;
    const bool linear = detail::linear_value(s, lo, &fl, &slope) &&
                        detail::linear_value(s, hi, &fr, nullptr);
    if (!linear) {
      // Analytic or tilted parts: dense sampling.
      const int n = 64;
      for (int k = 0; k <= n; ++k) {
        const Real x = lo.approx + (hi.approx - lo.approx) * k / n;
        const Knot kx(ExpReal::from_real(x));
        const Real fv = eval_scaled(f, kx).value();
        const Real ev = env.value(x);
        if (violates(fv, ev)) {
          record(kx.exact, fv, ev);
          break;
        }
      }
      ++rep.segments_checked;
      continue;
    }
    rep.breakpoints_checked += 2;
    const Real el = env.value(lo.approx), er = env.value(hi.approx);
    for (auto [x, fv, ev] : {std::tuple{&lo, fl, el}, std::tuple{&hi, fr, er}}) {
      if (fv > 0) rep.min_ratio = std::min(rep.min_ratio, env.upper ? ev / fv : fv / ev);
      if (violates(fv, ev)) {
        record(x->exact, fv, ev);
        break;
      }
    }
    if (rep.first_violation) break;
    ++rep.segments_checked;
    if (!env.upper) continue;  // env - f is convex: its maximum sits at an endpoint
    // env - f is convex; its minimum is at an endpoint unless the slopes cross.
    const Real dl = env.derivative(lo.approx) - slope;
    const Real dr = env.derivative(hi.approx) - slope;
    if (dl >= 0 || dr <= 0) {
      ++rep.slope_dominated;
      continue;
    }
    ++rep.interior_checked;
    Real a = lo.approx, b = hi.approx;
    for (int it = 0; it < 200 && b - a > a * Real(1e-32); ++it) {
      const Real m = a + (b - a) / 2;
      (env.derivative(m) - slope < 0 ? a : b) = m;
    }
    const Real xs = a + (b - a) / 2;
    const Real fv = fl + slope * (xs - lo.approx);
    const Real ev = env.value(xs);
    if (violates(fv, ev)) record(ExpReal::from_real(xs), fv, ev);
  }
  return rep;
}

}  // namespace subexp
