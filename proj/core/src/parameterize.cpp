#include "dlinoss/parameterize.hpp"

#include <algorithm>
#include <cmath>

#include "dlinoss/errors.hpp"
#include "dlinoss/spectral.hpp"

namespace dlinoss {

ClampBounds stability_bounds(double g, double dt) {
  const double root = std::sqrt(1.0 + dt * g);
  const double lo = (root - 1.0) * (root - 1.0) / (dt * dt);
  const double hi = (root + 1.0) * (root + 1.0) / (dt * dt);
  return {lo, hi};
}

ClampBoundsGrads stability_bounds_grads(double g, double dt) {
  const double s = 1.0 + dt * g;
  const double root = std::sqrt(s);
  const double dt2 = dt * dt;
  // d bound / dS, then S = 1 + dt*G.
  const double dlo_ds = (root - 1.0) / (root * dt2);
  const double dhi_ds = (root + 1.0) / (root * dt2);
  ClampBoundsGrads out;
  out.lo_g = dlo_ds * dt;
  out.hi_g = dhi_ds * dt;
  out.lo_dt = dlo_ds * g - 2.0 * (root - 1.0) * (root - 1.0) / (dt2 * dt);
  out.hi_dt = dhi_ds * g - 2.0 * (root + 1.0) * (root + 1.0) / (dt2 * dt);
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("logit requires p in (0, 1)");
  return std::log(p / (1.0 - p));
}

double clamp_stable_a(double a_raw, double g, double dt) {
  const ClampBounds b = stability_bounds(g, dt);
  double a = std::clamp(a_raw, b.lo, b.hi);
  if (is_stable(a, g, dt)) return a;
  // Rounding in the bound formulas can leave the clamped value a hair
  // outside the criterion. Newton steps on the residual pull it back onto
  // the root from the feasible side.
  for (int iter = 0; iter < 8 && !is_stable(a, g, dt); ++iter) {
    const double diff = g - dt * a;
    const double q = diff * diff - 4.0 * a;
    const double dq = -2.0 * dt * diff - 4.0;
    if (std::abs(dq) < 1e-300) break;
    a -= q / dq;
  }
  const double mid = 0.5 * (b.lo + b.hi);
  for (int iter = 0; iter < 8 && !is_stable(a, g, dt); ++iter)
    a = std::nextafter(a, mid);
  return a;
}

Dynamics constrain(const UnconstrainedParams& raw) {
  const std::size_t m = raw.count();
  if (raw.g_bar.size() != m || raw.a_bar.size() != m)
    throw ConfigError("unconstrained parameter arrays disagree on count");
  Dynamics dyn;
  dyn.a.resize(m);
  dyn.g.resize(m);
  dyn.dt.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = sigmoid(raw.dt_bar[i]);
    const double g = std::max(0.0, raw.g_bar[i]);
    dyn.a[i] = clamp_stable_a(raw.a_bar[i], g, dt);
    dyn.g[i] = g;
    dyn.dt[i] = dt;
  }
  return dyn;
}

UnconstrainedParams inverse_constrain(const Dynamics& dyn) {
  const std::size_t m = dyn.count();
  if (dyn.g.size() != m || dyn.dt.size() != m)
    throw ConfigError("dynamics arrays disagree on count");
  UnconstrainedParams raw;
  raw.dt_bar.resize(m);
  raw.g_bar = dyn.g;
  raw.a_bar = dyn.a;
  for (std::size_t i = 0; i < m; ++i) raw.dt_bar[i] = logit(dyn.dt[i]);
  return raw;
}

}  // namespace dlinoss
