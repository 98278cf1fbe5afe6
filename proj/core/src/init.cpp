#include "dlinoss/init.hpp"

#include <cmath>
#include <complex>

#include "dlinoss/errors.hpp"
#include "dlinoss/spectral.hpp"

namespace dlinoss {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

std::string init_scheme_name(InitScheme s) {
  switch (s) {
    case InitScheme::Ring: return "ring";
    case InitScheme::RingAUniform: return "ring-a-uniform";
    case InitScheme::GPhase: return "g-phase";
    case InitScheme::ParamUniform: return "param-uniform";
  }
  return "?";
}

InitScheme init_scheme_from_name(const std::string& name) {
  if (name == "ring") return InitScheme::Ring;
  if (name == "ring-a-uniform") return InitScheme::RingAUniform;
  if (name == "g-phase") return InitScheme::GPhase;
  if (name == "param-uniform") return InitScheme::ParamUniform;
  throw ConfigError("unknown init scheme '" + name + "'");
}

void InitSpec::validate() const {
  if (!(r_min >= 0.0 && r_min <= r_max && r_max <= 1.0))
    throw ConfigError("init radii must satisfy 0 <= r_min <= r_max <= 1");
  if (!(theta_min >= 0.0 && theta_min < theta_max && theta_max <= kTwoPi + 1e-12))
    throw ConfigError("init phase band must satisfy 0 <= theta_min < theta_max <= 2*pi");
  if (!(a_min >= 0.0 && a_min <= a_max)) throw ConfigError("init A range must be ordered and non-negative");
  if (!(g_max >= 0.0)) throw ConfigError("init g_max must be non-negative");
}

namespace {

// Area-uniform radius: r^2 uniform on [r_min^2, r_max^2].
double draw_radius(const InitSpec& spec, Rng& rng) {
  const double lo = spec.r_min * spec.r_min;
  const double hi = spec.r_max * spec.r_max;
  return std::sqrt(rng.uniform(lo, hi));
}

// Inverse spectral map evaluated in polar form: avoids |.|^2 rounding from
// sin/cos, so unit-magnitude targets come back exactly undamped.
DampedPair phi_inverse_polar(double r, double theta, double dt) {
  if (r == 0.0)
    throw DomainError("phi_inverse is singular at lambda = 0 (division by |lambda|^2)");
  const double mag2 = r * r;
  DampedPair p;
  p.a = (mag2 - 2.0 * r * std::cos(theta) + 1.0) / (dt * dt * mag2);
  p.g = (1.0 - mag2) / (dt * mag2);
  if (p.a < 0.0) p.a = 0.0;
  if (p.g < 0.0) p.g = 0.0;
  return p;
}

}  // namespace

Dynamics init_oscillators(const InitSpec& spec, std::size_t m, std::span<const double> dt,
                          Rng& rng) {
  spec.validate();
  if (dt.size() != m) throw ConfigError("init requires one dt per oscillator");
  if ((spec.scheme == InitScheme::Ring || spec.scheme == InitScheme::RingAUniform) &&
      spec.r_max == 0.0)
    throw DomainError("ring init with r_min = r_max = 0 targets the singular point lambda = 0");

  Dynamics dyn;
  dyn.a.resize(m);
  dyn.g.resize(m);
  dyn.dt.assign(dt.begin(), dt.end());
  for (std::size_t i = 0; i < m; ++i) {
    Rng local = rng.fork(i);
    switch (spec.scheme) {
      case InitScheme::Ring: {
        const double r = draw_radius(spec, local);
        const double theta = local.uniform(spec.theta_min, spec.theta_max);
        const DampedPair p = phi_inverse_polar(r, theta, dt[i]);
        dyn.a[i] = p.a;
        dyn.g[i] = p.g;
        break;
      }
      case InitScheme::RingAUniform: {
        const double r = draw_radius(spec, local);
        // Magnitude fixes G (|lambda| = 1/sqrt(1 + dt*G)); A drawn uniformly
        // and clamped into the stable interval.
        const double g = (1.0 - r * r) / (dt[i] * r * r);
        const double a_raw = local.uniform(spec.a_min, spec.a_max);
        dyn.g[i] = g;
        dyn.a[i] = clamp_stable_a(a_raw, g, dt[i]);
        break;
      }
      case InitScheme::GPhase: {
        const double g = local.uniform(0.0, spec.g_max);
        const double r = 1.0 / std::sqrt(1.0 + dt[i] * g);
        const double theta = local.uniform(spec.theta_min, spec.theta_max);
        const DampedPair p = phi_inverse_polar(r, theta, dt[i]);
        dyn.a[i] = p.a;
        dyn.g[i] = p.g;
        break;
      }
      case InitScheme::ParamUniform: {
        const double g = local.uniform(0.0, spec.g_max);
        const double a_raw = local.uniform(spec.a_min, spec.a_max);
        dyn.g[i] = g;
        dyn.a[i] = clamp_stable_a(a_raw, g, dt[i]);
        break;
      }
    }
  }
  return dyn;
}

Dynamics init_ring(const InitSpec& spec, std::size_t m, std::span<const double> dt, Rng& rng) {
  if (spec.scheme != InitScheme::Ring && spec.scheme != InitScheme::RingAUniform)
    throw ConfigError("init_ring requires a ring sampling scheme");
  return init_oscillators(spec, m, dt, rng);
}

Dynamics init_param_uniform(double a_min, double a_max, double g_min, double g_max,
                            std::size_t m, std::span<const double> dt, Rng& rng) {
  if (g_min != 0.0) throw ConfigError("uniform damping draws start at 0");
  InitSpec spec;
  spec.scheme = InitScheme::ParamUniform;
  spec.a_min = a_min;
  spec.a_max = a_max;
  spec.g_max = g_max;
  return init_oscillators(spec, m, dt, rng);
}

}  // namespace dlinoss
