#pragma once

#include <cstddef>
#include <vector>

namespace dlinoss {

// Raw trainable values, one triple per oscillator. No constraints hold here;
// the activations in constrain() map them onto the stable set.
struct UnconstrainedParams {
  std::vector<double> dt_bar;
  std::vector<double> g_bar;
  std::vector<double> a_bar;

  std::size_t count() const { return dt_bar.size(); }
};

// Constrained dynamics triple (the A, G, dt slices of OscillatorParams).
struct Dynamics {
  std::vector<double> a;
  std::vector<double> g;
  std::vector<double> dt;

  std::size_t count() const { return a.size(); }
};

// Feasible interval [lo, hi] for A at fixed (G, dt): the roots of the
// stability criterion (G - dt*A)^2 <= 4A viewed as a quadratic in A,
//
//   lo = (sqrt(1 + dt*G) - 1)^2 / dt^2,   hi = (sqrt(1 + dt*G) + 1)^2 / dt^2.
struct ClampBounds {
  double lo = 0.0;
  double hi = 0.0;
};
ClampBounds stability_bounds(double g, double dt);

// Partials of the bounds with respect to (G, dt), for exact gradients when
// the clamp is active.
struct ClampBoundsGrads {
  double lo_g = 0.0, lo_dt = 0.0;
  double hi_g = 0.0, hi_dt = 0.0;
};
ClampBoundsGrads stability_bounds_grads(double g, double dt);

double sigmoid(double x);
double logit(double p);

// clamp(a_raw, lo, hi) for the bounds at (g, dt), nudged inward by a few ulps
// when rounding in the bound formulas leaves the criterion violated.
double clamp_stable_a(double a_raw, double g, double dt);

// Stable reparameterization: dt = sigmoid(dt_bar), G = relu(g_bar),
// A = clamp(a_bar, lo(G, dt), hi(G, dt)). Total function; output always
// satisfies the stability criterion.
Dynamics constrain(const UnconstrainedParams& raw);

// Raw values whose constrain() image is the given stable triple (identity on
// A and G, logit on dt). dt must lie strictly inside (0, 1).
UnconstrainedParams inverse_constrain(const Dynamics& dyn);

}  // namespace dlinoss
