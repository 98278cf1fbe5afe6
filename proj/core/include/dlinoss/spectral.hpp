#pragma once

#include <complex>
#include <span>
#include <vector>

#include "dlinoss/oscillator.hpp"

namespace dlinoss {

// Spectrum of one oscillator's 2x2 recurrence block.
//
// In the stable set (discriminant <= 0) the eigenvalues form a conjugate
// pair; `lambda` is the representative with Im >= 0 and `lambda2` its
// conjugate. Outside it both roots are real; `lambda` is the larger root.
// `magnitude` is the spectral radius max(|lambda|, |lambda2|).
struct OscSpectrum {
  std::complex<double> lambda;
  std::complex<double> lambda2;
  double magnitude = 0.0;
  double discriminant = 0.0;  // (G - dt*A)^2 - 4A
  bool in_stable_set = false;
};

using SpectrumReport = std::vector<OscSpectrum>;

// Closed-form eigenvalues of the damped IMEX block for one oscillator.
OscSpectrum eigenvalue_single(double a, double g, double dt);

SpectrumReport eigenvalues(const OscillatorParams& params);

// Membership of (A, G) in the stability set: (G - dt*A)^2 <= 4A.
bool is_stable(double a, double g, double dt);
std::vector<bool> check_stability(const OscillatorParams& params);

// Inverse spectral map: eigenvalue pair {lambda, conj(lambda)} with
// |lambda| <= 1 back to the unique (A, G) in the stability set,
//
//   A = (|l|^2 - 2 Re(l) + 1) / (dt^2 |l|^2),   G = (1 - |l|^2) / (dt |l|^2).
//
// Throws DomainError for |lambda| > 1 and for the singular target lambda = 0.
struct DampedPair {
  double a = 0.0;
  double g = 0.0;
};
DampedPair phi_inverse(std::complex<double> lambda, double dt);

// One-dimensional spectral curves of the undamped baselines under the change
// of variables gamma = dt*sqrt(A). The IM curve lies on |lambda - 1/2| = 1/2;
// the IMEX curve lies on |lambda| = 1 while gamma^2 <= 4 and drops onto the
// real axis beyond that. Only the Im >= 0 representative is returned.
std::vector<std::complex<double>> baseline_spectral_curve(Variant variant,
                                                          std::span<const double> gammas);

}  // namespace dlinoss
