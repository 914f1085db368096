#pragma once

#include "subexp/density.hpp"

namespace subexp::detail {

// Integral of one part over [lo, hi] (inside its segment) after multiplying
// by e^{shift x}.
Scaled part_integral(const Part& p, const Knot& lo, const Knot& hi, const Real& shift = 0);

// Integral over [lo, hi] of s y^{s-1} e^{-y^s} e^{-rate y}, lo >= 0.
Scaled weibull_integral(const Real& shape, const Real& rate, const Real& lo, const Real& hi);

// Sum of the parts' linear bases at x, for segments made of untilted linear
// parts only; the slope is returned through slope when non-null.
bool linear_value(const Segment& s, const Knot& x, Real* value, Real* slope);

}  // namespace subexp::detail
