#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "dlinoss/parameterize.hpp"
#include "dlinoss/rng.hpp"

namespace dlinoss {

// The four sampling schemes: eigenvalue magnitude is controlled either by a
// radial band (area-uniform) or by a uniform damping draw; eigenvalue phase
// either by a uniform phase draw or by a uniform draw of A.
//
//   Ring          r area-uniform in [r_min, r_max], phase uniform
//   RingAUniform  r area-uniform, A uniform in [a_min, a_max] (clamped)
//   GPhase        G uniform in [0, g_max], phase uniform
//   ParamUniform  G uniform in [0, g_max], A uniform in [a_min, a_max] (clamped)
enum class InitScheme { Ring, RingAUniform, GPhase, ParamUniform };

std::string init_scheme_name(InitScheme s);
InitScheme init_scheme_from_name(const std::string& name);

struct InitSpec {
  InitScheme scheme = InitScheme::Ring;
  double r_min = 0.9;
  double r_max = 1.0;
  double theta_min = 0.0;
  double theta_max = 3.14159265358979323846;  // conjugate pairs cover the disk
  double a_min = 0.0;
  double a_max = 1.0;
  double g_max = 4.0;

  void validate() const;
};

// Draws (A_i, G_i) for m oscillators at the given time steps. Sampling forks
// the RNG per oscillator index, so results do not depend on evaluation order.
Dynamics init_oscillators(const InitSpec& spec, std::size_t m, std::span<const double> dt,
                          Rng& rng);

// Ring initialization: area-uniform radius in [r_min, r_max], uniform phase,
// mapped to parameters through the inverse spectral map.
Dynamics init_ring(const InitSpec& spec, std::size_t m, std::span<const double> dt, Rng& rng);

// Independent uniform draws of A and G, clamped onto the stable set.
Dynamics init_param_uniform(double a_min, double a_max, double g_min, double g_max,
                            std::size_t m, std::span<const double> dt, Rng& rng);

}  // namespace dlinoss
