#include "dlinoss/oscillator.hpp"

#include <cmath>

#include "dlinoss/errors.hpp"

namespace dlinoss {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::DLinossImex: return "dlinoss";
    case Variant::LinossImex: return "linoss-imex";
    case Variant::LinossIm: return "linoss-im";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "dlinoss") return Variant::DLinossImex;
  if (name == "linoss-imex") return Variant::LinossImex;
  if (name == "linoss-im") return Variant::LinossIm;
  throw ConfigError("unknown variant '" + name +
                    "' (expected dlinoss, linoss-im or linoss-imex)");
}

void OscillatorParams::validate() const {
  const std::size_t m = a.size();
  if (g.size() != m || dt.size() != m)
    throw ConfigError("oscillator parameter arrays disagree on count");
  if (b.rows != m) throw ConfigError("input map B must have one row per oscillator");
  if (c.cols != m) throw ConfigError("output map C must have one column per oscillator");
  if (!d.empty() && (d.rows != c.rows || d.cols != b.cols))
    throw ConfigError("feed-through D must be output_dim x input_dim");
  for (std::size_t i = 0; i < m; ++i) {
    if (!(a[i] >= 0.0)) throw DomainError("frequency coefficient A must be non-negative");
    if (!(g[i] >= 0.0)) throw DomainError("damping coefficient G must be non-negative");
    if (!(dt[i] > 0.0 && dt[i] <= 1.0)) throw DomainError("time step dt must lie in (0, 1]");
  }
}

namespace {

void require_undamped(const OscillatorParams& params, const char* variant) {
  for (double gi : params.g)
    if (gi != 0.0)
      throw DomainError(std::string(variant) + " has no damping parameter; G must be all-zero");
}

DiscreteSystem init_system(const OscillatorParams& params, Variant variant) {
  params.validate();
  DiscreteSystem sys;
  sys.variant = variant;
  const std::size_t m = params.count();
  sys.m11.resize(m);
  sys.m12.resize(m);
  sys.m21.resize(m);
  sys.m22.resize(m);
  sys.f1.resize(m);
  sys.f2.resize(m);
  sys.b = params.b;
  sys.c = params.c;
  sys.d = params.d;
  return sys;
}

// Shared IMEX block with Schur complement denominator S = 1 + dt*G (G = 0
// recovers the undamped case).
void fill_imex_blocks(const OscillatorParams& p, DiscreteSystem& sys) {
  for (std::size_t i = 0; i < p.count(); ++i) {
    const double dt = p.dt[i];
    const double s = 1.0 + dt * p.g[i];
    sys.m11[i] = 1.0 / s;
    sys.m12[i] = -dt * p.a[i] / s;
    sys.m21[i] = dt / s;
    sys.m22[i] = 1.0 - dt * dt * p.a[i] / s;
    sys.f1[i] = dt / s;
    sys.f2[i] = dt * dt / s;
  }
}

}  // namespace

DiscreteSystem discretize_dlinoss(const OscillatorParams& params) {
  DiscreteSystem sys = init_system(params, Variant::DLinossImex);
  fill_imex_blocks(params, sys);
  return sys;
}

DiscreteSystem discretize_linoss_imex(const OscillatorParams& params) {
  require_undamped(params, "linoss-imex");
  DiscreteSystem sys = init_system(params, Variant::LinossImex);
  fill_imex_blocks(params, sys);
  return sys;
}

DiscreteSystem discretize_linoss_im(const OscillatorParams& params) {
  require_undamped(params, "linoss-im");
  DiscreteSystem sys = init_system(params, Variant::LinossIm);
  // Here the denominator is the implicit-solve factor 1 + dt^2*A.
  for (std::size_t i = 0; i < params.count(); ++i) {
    const double dt = params.dt[i];
    const double s = 1.0 + dt * dt * params.a[i];
    sys.m11[i] = 1.0 / s;
    sys.m12[i] = -dt * params.a[i] / s;
    sys.m21[i] = dt / s;
    sys.m22[i] = 1.0 - dt * dt * params.a[i] / s;
    sys.f1[i] = dt / s;
    sys.f2[i] = dt * dt / s;
  }
  return sys;
}

DiscreteSystem discretize(Variant variant, const OscillatorParams& params) {
  switch (variant) {
    case Variant::DLinossImex: return discretize_dlinoss(params);
    case Variant::LinossImex: return discretize_linoss_imex(params);
    case Variant::LinossIm: return discretize_linoss_im(params);
  }
  throw ConfigError("unknown variant tag");
}

std::vector<double> apply_recurrence_sequential(const DiscreteSystem& sys,
                                                std::span<const double> inputs,
                                                std::size_t n) {
  const std::size_t m = sys.count();
  const std::size_t p = sys.input_dim();
  const std::size_t q = sys.output_dim();
  if (n < 1) throw ConfigError("sequence length must be >= 1");
  if (inputs.size() != n * p)
    throw ConfigError("input buffer does not match n x input_dim");

  std::vector<double> z(m, 0.0), x(m, 0.0), proj(m), out(n * q, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double* u = inputs.data() + k * p;
    matvec(sys.b, u, proj.data());
    for (std::size_t i = 0; i < m; ++i) {
      const double zn = sys.m11[i] * z[i] + sys.m12[i] * x[i] + sys.f1[i] * proj[i];
      const double xn = sys.m21[i] * z[i] + sys.m22[i] * x[i] + sys.f2[i] * proj[i];
      z[i] = zn;
      x[i] = xn;
    }
    double* y = out.data() + k * q;
    matvec(sys.c, x.data(), y);
    if (!sys.d.empty()) {
      for (std::size_t r = 0; r < q; ++r) {
        const double* drow = sys.d.a.data() + r * p;
        double acc = y[r];
        for (std::size_t j = 0; j < p; ++j) acc += drow[j] * u[j];
        y[r] = acc;
      }
    }
  }
  return out;
}

}  // namespace dlinoss
