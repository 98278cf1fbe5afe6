#include "dlinoss/spectral.hpp"

#include <cmath>

#include "dlinoss/errors.hpp"

namespace dlinoss {

OscSpectrum eigenvalue_single(double a, double g, double dt) {
  OscSpectrum s;
  const double denom = 1.0 + dt * g;
  const double center = (1.0 + 0.5 * dt * g - 0.5 * dt * dt * a) / denom;
  const double diff = g - dt * a;
  s.discriminant = diff * diff - 4.0 * a;
  s.in_stable_set = s.discriminant <= 0.0;
  if (s.in_stable_set) {
    const double im = 0.5 * dt * std::sqrt(-s.discriminant) / denom;
    s.lambda = {center, im};
    s.lambda2 = {center, -im};
    s.magnitude = std::abs(s.lambda);
  } else {
    const double spread = 0.5 * dt * std::sqrt(s.discriminant) / denom;
    s.lambda = {center + spread, 0.0};
    s.lambda2 = {center - spread, 0.0};
    s.magnitude = std::max(std::abs(center + spread), std::abs(center - spread));
  }
  return s;
}

SpectrumReport eigenvalues(const OscillatorParams& params) {
  params.validate();
  SpectrumReport report;
  report.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i)
    report.push_back(eigenvalue_single(params.a[i], params.g[i], params.dt[i]));
  return report;
}

bool is_stable(double a, double g, double dt) {
  const double diff = g - dt * a;
  return diff * diff <= 4.0 * a;
}

std::vector<bool> check_stability(const OscillatorParams& params) {
  params.validate();
  std::vector<bool> flags(params.count());
  for (std::size_t i = 0; i < params.count(); ++i)
    flags[i] = is_stable(params.a[i], params.g[i], params.dt[i]);
  return flags;
}

DampedPair phi_inverse(std::complex<double> lambda, double dt) {
  if (!(dt > 0.0 && dt <= 1.0)) throw DomainError("time step dt must lie in (0, 1]");
  const double mag2 = std::norm(lambda);
  if (mag2 == 0.0)
    throw DomainError("phi_inverse is singular at lambda = 0 (division by |lambda|^2)");
  if (mag2 > 1.0 + 1e-12) throw DomainError("phi_inverse requires |lambda| <= 1");
  const double re = lambda.real();
  DampedPair p;
  p.a = (mag2 - 2.0 * re + 1.0) / (dt * dt * mag2);
  p.g = (1.0 - mag2) / (dt * mag2);
  // Guard against tiny negative values from cancellation at |lambda| ~ 1 or
  // lambda ~ 1.
  if (p.a < 0.0) p.a = 0.0;
  if (p.g < 0.0) p.g = 0.0;
  return p;
}

std::vector<std::complex<double>> baseline_spectral_curve(Variant variant,
                                                          std::span<const double> gammas) {
  if (variant == Variant::DLinossImex)
    throw DomainError("spectral curves are defined for the undamped baselines only");
  std::vector<std::complex<double>> out;
  out.reserve(gammas.size());
  for (double gamma : gammas) {
    if (!(gamma >= 0.0)) throw DomainError("gamma = dt*sqrt(A) must be non-negative");
    const double g2 = gamma * gamma;
    if (variant == Variant::LinossIm) {
      const double denom = 1.0 + g2;
      out.emplace_back(1.0 / denom, gamma / denom);
    } else {
      if (g2 <= 4.0) {
        out.emplace_back(0.5 * (2.0 - g2), 0.5 * std::sqrt(g2 * (4.0 - g2)));
      } else {
        // Real branch: the larger-magnitude root.
        const double spread = 0.5 * std::sqrt(g2 * (g2 - 4.0));
        out.emplace_back(0.5 * (2.0 - g2) - spread, 0.0);
      }
    }
  }
  return out;
}

}  // namespace dlinoss
