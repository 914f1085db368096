#pragma once

#include <string>
#include <vector>

#include "subexp/density.hpp"
#include "subexp/diagnose.hpp"

namespace subexp {

// Probe-grid mini language.  Tokens separated by commas:
//   a10..a40[:step][@i]  a(n, i) for n = 10..40, i defaulting to 0; a10 alone is one point
//   m10..m40[:step]   midpoint of the maximal flat run of f starting at a(n, 0)
//   sK,L              a(k^2, i) for k = K, K+2, ..., L with the example's
//                     special index i (ex1 5, ex2/ex4 3, ex3 2, ex6 1)
//   a(n,i)  b(n)  m(n)  single points; b(n) is the last point of interval n
//   3/2  1e3          plain rationals
// Labels carry no commas so they can go straight into csv rows.
std::vector<Probe> parse_probes(const std::string& spec, const std::string& example,
                                const PiecewiseDensity* f = nullptr);

// Midpoint of the maximal run of flat segments of f that starts at x.
// Throws PreconditionError when no flat segment starts at x.
ExpReal flat_midpoint(const PiecewiseDensity& f, const ExpReal& x);

int special_index(const std::string& example);

}  // namespace subexp
