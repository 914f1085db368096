#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subexp/density.hpp"

namespace subexp {

struct GalleryParams {
  int n_min = 4;
  std::optional<int> n_max;        // 40, or 12 for ex6
  Rational epsilon{1, 2};
  std::optional<Rational> delta;   // per-example default, see default_delta
  Rational weibull_gamma{1, 2};
  Rational tilt_gamma = 1;
  Rational negative_mix{1, 2};     // weight of f+ in the two-sided ex3 f

  int n_max_or(int fallback) const { return n_max.value_or(fallback); }
};

// Midpoint of the admissible range: ex1 (0, 1), ex2 (0, (1-eps)/2),
// ex3 (eps, 1-eps/2).  At eps = 1/2 these are 1/2, 1/8 and 5/8.
Rational default_delta(const std::string& example, const Rational& epsilon);
Rational delta_for(const std::string& example, const GalleryParams& p);
// Throws PreconditionError when a parameter leaves the example's admissible range.
void validate(const std::string& example, const GalleryParams& p);

struct Ex1 {
  PiecewiseDensity f, g, h;
};
struct Ex2 {
  PiecewiseDensity f, g, h;
};
struct Ex3 {
  PiecewiseDensity f_plus, g, f_two_sided, h;
  PiecewiseDensity f_minus;  // negative part built from the witnesses
  PiecewiseDensity h_plus;   // normalized f+ + g, flat on [a_n, a_{n,2}]
  // Unnormalized f+ and g sharing the knots, for exact flatness checks.
  PiecewiseDensity f_plus_raw, g_raw;
};
struct Ex4 {
  PiecewiseDensity f, g;
};
struct Ex5 {
  PiecewiseDensity F, G;
};

Ex1 build_ex1(const GalleryParams& p = {});
Ex2 build_ex2(const GalleryParams& p = {});
Ex3 build_ex3(const GalleryParams& p = {});
Ex4 build_ex4(const GalleryParams& p = {});
Ex5 build_ex5(const GalleryParams& p = {});
PiecewiseDensity build_ex6(const GalleryParams& p = {});
// rate e^{-rate x} on [0, 40], normalized.
PiecewiseDensity build_oracle_exp(const Rational& rate);

// Named breakpoints.  ex1: a(n,0..6), b_n = a(n,6); ex2/ex4: a(n,0..3);
// ex3: a(n,0..2); ex6: a(n,0) = e^{n^2}, a(n,1) = b_n = e^{n^2} + e^{3n}.
ExpReal named_point(const std::string& example, int n, int i);
int points_per_interval(const std::string& example);

// Registry: ex1.f ex1.g ex1.h ex2.f ex2.g ex2.h ex3.f+ ex3.g ex3.f ex3.f- ex3.h
// ex3.h+ ex4.f ex4.g ex5.F ex5.G ex6.f oracle.exp1 (oracle.exp<rate> for any
// positive rational rate).
std::vector<std::string> gallery_names();
PiecewiseDensity gallery_density(const std::string& name, const GalleryParams& p = {});
// "ex1" for "ex1.h", "oracle" for oracle densities.
std::string example_of(const std::string& name);

// Envelopes: ex1.l = 2(1+e) x^{-1} (log x)^{-2}, ex2.l = (1+e) x^{-1}
// (log x)^{-2}, ex3.u = 2(1+e) x^{-1} (log x)^{-2} (all upper, for the
// unnormalized densities scaled by the density's normalization constant), and
// ex4.lower = c_f x^{-1} (log x)^{-(3+eps)}.
Envelope gallery_envelope(const std::string& name, const PiecewiseDensity& f,
                          const GalleryParams& p = {});

}  // namespace subexp
