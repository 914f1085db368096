#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subexp/hireal.hpp"

namespace subexp {

// Exact position with a cached float128 value.
struct Knot {
  ExpReal exact;
  Real approx = 0;

  Knot() = default;
  explicit Knot(ExpReal x) : exact(std::move(x)), approx(exact.approx()) {}
  friend bool operator==(const Knot& a, const Knot& b) { return a.exact == b.exact; }
};

// a - b in float128, recomputed exactly when the operands nearly cancel.
Real difference(const Knot& a, const Knot& b);
std::strong_ordering compare(const Knot& a, const Knot& b);

enum class PartKind { ExpLinear, Weibull };

// One additive piece of a segment's density:
//   ExpLinear: weight * e^{-rate x} * (linear interpolation of v0 at
//              anchor_left to v1 at anchor_right)
//   Weibull:   weight * e^{-rate x} * shape x^{shape-1} e^{-x^shape}
// Anchors may be wider than the segment after refinement by a mixture; the
// exact endpoint values then stay untouched.
class Part {
 public:
  static Part linear(ExpReal anchor_left, ExpReal anchor_right, ExpReal v0, ExpReal v1,
                     Scaled weight = Scaled(Real(1)), Rational rate = 0);
  static Part weibull(Rational shape, Scaled weight = Scaled(Real(1)), Rational rate = 0);

  PartKind kind() const { return kind_; }
  const Scaled& weight() const { return weight_; }
  const Rational& rate() const { return rate_; }
  const Real& rate_approx() const { return rate_hp_; }
  const Knot& anchor_left() const { return anchor_left_; }
  const Knot& anchor_right() const { return anchor_right_; }
  const ExpReal& v0() const { return v0_; }
  const ExpReal& v1() const { return v1_; }
  const Real& v0_approx() const { return v0_hp_; }
  const Real& v1_approx() const { return v1_hp_; }
  const Real& width() const { return width_; }
  bool flat() const { return flat_; }
  const Rational& shape() const { return shape_; }
  const Real& shape_approx() const { return shape_hp_; }

  Part with_weight(Scaled w) const;
  Part with_rate(Rational r) const;
  // Same kind, geometry, values, rate and shape; weights may differ.
  bool same_shape(const Part& other) const;

  // Base value (no weight, no exponential factor) of a linear part from the
  // distances t to anchor_left and s to anchor_right.
  Real base(const Real& t, const Real& s) const;
  // Full value at x.
  Scaled value(const Knot& x) const;

  friend bool operator==(const Part& a, const Part& b);

 private:
  PartKind kind_ = PartKind::ExpLinear;
  Scaled weight_{Real(1)};
  Rational rate_ = 0;
  Real rate_hp_ = 0;
  Knot anchor_left_, anchor_right_;
  ExpReal v0_, v1_;
  Real v0_hp_ = 0, v1_hp_ = 0, width_ = 0;
  bool flat_ = false;
  Rational shape_ = 0;
  Real shape_hp_ = 0;
};

struct Segment {
  Knot left, right;
  std::vector<Part> parts;

  Segment() = default;
  Segment(ExpReal l, ExpReal r, std::vector<Part> p)
      : left(std::move(l)), right(std::move(r)), parts(std::move(p)) {}
  friend bool operator==(const Segment& a, const Segment& b) = default;
};

struct DensityInfo {
  std::string name;
  std::map<std::string, std::string> params;
  Real scale = 1;         // product of normalization factors applied so far
  Real mass_deficit = 0;  // untruncated mass beyond the support, when known
  std::map<std::string, std::string> notes;
  friend bool operator==(const DensityInfo&, const DensityInfo&) = default;
};

class PiecewiseDensity {
 public:
  PiecewiseDensity() = default;
  // Validates ordering, anchor coverage and non-negativity.
  PiecewiseDensity(std::vector<Segment> segments, DensityInfo info = {},
                   bool normalized = false);

  const std::vector<Segment>& segments() const { return segments_; }
  const DensityInfo& info() const { return info_; }
  PiecewiseDensity with_info(DensityInfo info) const;
  bool normalized() const { return normalized_; }
  bool empty() const { return segments_.empty(); }
  Real mass() const { return mass_; }
  // Closed-form total integral for unit-weight, untilted linear densities.
  const std::optional<ExpReal>& exact_mass() const { return exact_mass_; }
  const Knot& support_lo() const { return segments_.front().left; }
  const Knot& support_hi() const { return segments_.back().right; }
  bool one_sided() const { return empty() || support_lo().exact.sign() >= 0; }

  // Segment whose interval (left, right] holds x; the first segment also owns
  // its left endpoint.  -1 outside the support or in a gap.
  int locate(const Knot& x) const;

  friend bool operator==(const PiecewiseDensity& a, const PiecewiseDensity& b);

 private:
  std::vector<Segment> segments_;
  DensityInfo info_;
  bool normalized_ = false;
  Real mass_ = 0;
  std::optional<ExpReal> exact_mass_;
};

struct MomentValue {
  Rational gamma;
  Scaled value;
};

Real eval(const PiecewiseDensity& f, const ExpReal& x);
Scaled eval_scaled(const PiecewiseDensity& f, const Knot& x);
Scaled integrate(const PiecewiseDensity& f, const ExpReal& a, const ExpReal& b);
// Exact integral over [a, b] when both ends are knots of unit-weight linear
// parts; nullopt otherwise.
std::optional<ExpReal> integrate_exact(const PiecewiseDensity& f, const ExpReal& a,
                                       const ExpReal& b);
PiecewiseDensity normalize(const PiecewiseDensity& f);
PiecewiseDensity scale_density(const PiecewiseDensity& f, const Scaled& factor);
PiecewiseDensity mixture(const PiecewiseDensity& f, const PiecewiseDensity& g, const Rational& p);
// Pointwise sum of unit-weight linear densities sharing their knots, with
// exact endpoint values f.v + g.v.
PiecewiseDensity exact_sum(const PiecewiseDensity& f, const PiecewiseDensity& g);
PiecewiseDensity tilt(const PiecewiseDensity& f, const Rational& gamma);
MomentValue moment(const PiecewiseDensity& f, const Rational& gamma);

// Envelope C x^{-1} (log x)^{-k}; convex and decreasing once log x > 0.
struct Envelope {
  std::string name;
  Real constant = 1;
  Real log_power = 2;
  bool upper = true;  // f <= env when true, f >= env otherwise

  Real value(const Real& x) const;
  Real derivative(const Real& x) const;
};

struct EnvelopeViolation {
  ExpReal x;
  Real density = 0;
  Real envelope = 0;
};

struct EnvelopeReport {
  std::string envelope;
  int breakpoints_checked = 0;
  int segments_checked = 0;
  // Segments settled by |env'| dominating |f'| at the relevant endpoint.
  int slope_dominated = 0;
  // Segments settled by checking an interior tangency point.
  int interior_checked = 0;
  std::optional<EnvelopeViolation> first_violation;
  Real min_ratio = 0;  // min over breakpoints of env/f (upper) or f/env (lower)
  bool ok() const { return !first_violation.has_value(); }
};

EnvelopeReport envelope_compare(const PiecewiseDensity& f, const Envelope& env,
                                const ExpReal& xmin);

}  // namespace subexp
