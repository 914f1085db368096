#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "subexp/density.hpp"

namespace subexp {

// One overlap window: y in [y_lo, y_hi] with g(y) in g's segment g_seg and
// f(x - y) in f's segment f_seg.  u = x - y is carried exactly alongside.
struct ConvWindow {
  Knot y_lo, y_hi;
  Knot u_lo, u_hi;  // u_lo = x - y_lo, u_hi = x - y_hi
  int f_seg = -1;
  int g_seg = -1;
};

struct ConvPlan {
  ExpReal x;
  std::vector<ConvWindow> windows;
};

using Bound = std::optional<ExpReal>;

ConvPlan conv_plan(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x,
                   const Bound& y_lo = std::nullopt, const Bound& y_hi = std::nullopt);

// int_{y_lo}^{y_hi} f(x - y) g(y) dy; unbounded ends when nullopt.
Scaled partial_conv_scaled(const PiecewiseDensity& f, const PiecewiseDensity& g,
                           const ExpReal& x, const Bound& y_lo, const Bound& y_hi);
Scaled conv_scaled(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x);
// Same closed forms over float breakpoints; for outer integrals over x where
// exact knot positions do not matter.  Loses accuracy when x - knot cancels.
ConvPlan conv_plan_approx(const PiecewiseDensity& f, const PiecewiseDensity& g, const Real& x);
Scaled conv_scaled_approx(const PiecewiseDensity& f, const PiecewiseDensity& g, const Real& x);

Real partial_conv(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x,
                  const ExpReal& y_lo, const ExpReal& y_hi);
Real conv_eval(const PiecewiseDensity& f, const PiecewiseDensity& g, const ExpReal& x);

// f*f(x) / (2 fhat(gamma) f(x))
Real self_conv_ratio(const PiecewiseDensity& f, const Rational& gamma, const ExpReal& x);

// Brute-force route: pointwise products integrated by adaptive quadrature
// between the float breakpoints.  Slow; used to cross-check the closed forms.
Real conv_eval_quadrature(const PiecewiseDensity& f, const PiecewiseDensity& g, const Real& x,
                          const Real& tol = Real(1e-12));

// Evaluates fn over items on a small thread pool; results keep input order.
template <class T, class Fn>
auto parallel_map(const std::vector<T>& items, Fn fn, unsigned threads = 0)
    -> std::vector<decltype(fn(items.front()))> {
  using R = decltype(fn(items.front()));
  std::vector<std::optional<R>> slots(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(items.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < items.size();) {
      try {
        slots[i].emplace(fn(items[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  std::vector<R> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

}  // namespace subexp
