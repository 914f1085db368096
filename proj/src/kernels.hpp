#pragma once

// Integrals of e^{mu t} against the quadratic Bernstein basis on [0, 1]:
//   K_j(mu) = int_0^1 e^{mu t} B_j(t) dt,
//   B_0 = (1-t)^2, B_1 = 2t(1-t), B_2 = t^2.
// A product of two linear interpolants over a window expands exactly in this
// basis, so every exp-linear pair integral reduces to three kernel values.

#include "subexp/hireal.hpp"

namespace subexp::detail {

struct Kernel {
  Real k[3];
  Real log_scale = 0;  // true values are k[j] * e^{log_scale}
};

inline Kernel bernstein_kernel(Real mu) {
  Kernel out;
  if (abs(mu) <= 2) {
    // sum_k mu^k/k! int t^k B_j
    Real term = 1;
    Real s0 = 0, s1 = 0, s2 = 0;
    for (int k = 0; k < 60; ++k) {
      const Real kk = k;
      s0 += term * 2 / ((kk + 1) * (kk + 2) * (kk + 3));
      s1 += term * 2 / ((kk + 2) * (kk + 3));
      s2 += term / (kk + 3);
      term *= mu / (kk + 1);
      if (abs(term) < Real(1e-40)) break;
    }
    out.k[0] = s0;
    out.k[1] = s1;
    out.k[2] = s2;
    return out;
  }
  const bool reflect = mu > 0;
  const Real nu = abs(mu);
  const Real en = exp(-nu);
  const Real nu3 = nu * nu * nu;
  const Real d0 = (nu * nu - 2 * nu + 2 - 2 * en) / nu3;
  const Real d1 = 2 * ((nu - 2) + en * (nu + 2)) / nu3;
  const Real d2 = (2 - en * (nu * nu + 2 * nu + 2)) / nu3;
  if (!reflect) {
    out.k[0] = d0;
    out.k[1] = d1;
    out.k[2] = d2;
  } else {
    // K_j(mu) = e^{mu} K_{2-j}(-mu)
    out.k[0] = d2;
    out.k[1] = d1;
    out.k[2] = d0;
    out.log_scale = mu;
  }
  return out;
}

}  // namespace subexp::detail
