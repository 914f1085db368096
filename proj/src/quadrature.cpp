#include "quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "subexp/errors.hpp"

namespace subexp::detail {

const QuadConfig& quad_config() {
  static const QuadConfig config = [] {
    QuadConfig c{Real(1e-10), Real(1e-14), 12};
    if (const char* env = std::getenv("SUBEXP_PRECISION")) {
      std::string text(env);
      std::size_t comma = text.find(',');
      c.rel_tol = parse_real(text.substr(0, comma));
      if (comma != std::string::npos) c.abs_tol = parse_real(text.substr(comma + 1));
      if (!(c.rel_tol > 0) || !(c.abs_tol > 0))
        throw ParseError("SUBEXP_PRECISION tolerances must be positive");
    }
    return c;
  }();
  return config;
}

Scaled integrate_smooth(const ScaledIntegrand& f, Real a, Real b, Real scale_a,
                        Real scale_b) {
  if (!(b > a)) return Scaled();
  const Real w = b - a;
  const Real mid = a + w / 2;
  const Real tiny = w * Real(1e-30);

  std::vector<Real> pts{a};
  Real h = std::clamp(scale_a, tiny, w / 2);
  for (Real d = h; a + d < mid; d *= 2) pts.push_back(a + d);
  pts.push_back(mid);
  std::vector<Real> right;
  h = std::clamp(scale_b, tiny, w / 2);
  for (Real d = h; b - d > mid; d *= 2) right.push_back(b - d);
  pts.insert(pts.end(), right.rbegin(), right.rend());
  pts.push_back(b);
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Real& x, const Real& y) { return !(y > x); }),
            pts.end());

  const std::size_t panels = pts.size() - 1;
  std::vector<Real> level(panels);
  Real ref = -std::numeric_limits<Real>::infinity();
  // Panel level: largest finite value at its ends and midpoint.
  std::vector<Real> ends(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) ends[i] = f(pts[i]).log_abs();
  auto finite_max = [](Real acc, const Real& v) {
    return boost::multiprecision::isfinite(v) ? std::max(acc, v) : acc;
  };
  for (std::size_t i = 0; i < panels; ++i) {
    level[i] = f((pts[i] + pts[i + 1]) / 2).log_abs();
    level[i] = finite_max(finite_max(level[i], ends[i]), ends[i + 1]);
    ref = std::max(ref, level[i]);
  }
  if (!boost::multiprecision::isfinite(ref)) return Scaled();

  std::vector<std::size_t> order(panels);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Real> weight(panels);
  for (std::size_t i = 0; i < panels; ++i)
    weight[i] = level[i] - ref + log(pts[i + 1] - pts[i]);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return weight[x] > weight[y]; });

  const QuadConfig& cfg = quad_config();
  auto g = [&](const Real& v) {
    Scaled s = f(v);
    if (s.is_zero()) return Real(0);
    return s.mant() * exp(s.log_part() - ref);
  };
  // Panels run largest first; each gets a tolerance scaled to its estimated
  // share, and panels far below the target accuracy are dropped.
  const Real base_tol = cfg.rel_tol * Real(1e-3);
  const Real drop = log(base_tol * Real(1e-3));
  Real total = 0, err_total = 0;
  for (std::size_t i : order) {
    if (total > 0 && weight[i] < log(total) + drop) break;
    const Real share = total > 0 ? exp(weight[i]) / total : Real(1);
    const Real tol = std::min(Real(1e-3), base_tol / std::min(Real(1), share));
    Real err = 0;
    Real part = boost::math::quadrature::gauss_kronrod<Real, 21>::integrate(
        g, pts[i], pts[i + 1], cfg.max_depth, tol, &err);
    total += part;
    err_total += err;
  }
  const Real abs_allow = cfg.abs_tol * exp(weight[order[0]]);
  if (!(err_total <= std::max(cfg.rel_tol * abs(total), abs_allow)))
    throw NumericError("quadrature tolerance not met: error " +
                       format_real(err_total, 3) + " on " + format_real(total, 3));
  return Scaled(total, ref);
}

}  // namespace subexp::detail
