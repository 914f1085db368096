#pragma once

#include <functional>

#include "subexp/hireal.hpp"

namespace subexp::detail {

struct QuadConfig {
  Real rel_tol;
  Real abs_tol;  // relative to the integrand's peak times the panel width
  unsigned max_depth;
};

// Defaults rel 1e-10 / abs 1e-14; SUBEXP_PRECISION=<rel>[,<abs>] overrides.
const QuadConfig& quad_config();

using ScaledIntegrand = std::function<Scaled(const Real&)>;

// Integral over [a, b] of a log-smooth integrand whose mass may sit in thin
// layers at either end.  Panels grow geometrically from both ends starting at
// widths scale_a and scale_b; panels far below the peak are skipped.
Scaled integrate_smooth(const ScaledIntegrand& f, Real a, Real b, Real scale_a,
                        Real scale_b);

}  // namespace subexp::detail
