#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dlinoss/mat.hpp"

namespace dlinoss {

enum class Variant { DLinossImex, LinossImex, LinossIm };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Continuous-time diagonal second-order system for one layer of m damped
// oscillators:
//
//   x'' = -A x - G x' + B u,    y = C x + D u
//
// together with the per-oscillator integration steps dt used to discretize it.
struct OscillatorParams {
  std::vector<double> a;   // natural-frequency coefficients, >= 0  [1/time^2]
  std::vector<double> g;   // damping coefficients, >= 0            [1/time]
  std::vector<double> dt;  // integration steps in (0, 1]           [time]
  Mat b;                   // m x p input map
  Mat c;                   // q x m output map
  Mat d;                   // q x p feed-through; all-zero by default

  std::size_t count() const { return a.size(); }
  std::size_t input_dim() const { return b.cols; }
  std::size_t output_dim() const { return c.rows; }

  // Throws ConfigError on dimension mismatch, DomainError on value-range
  // violations.
  void validate() const;
};

// Discrete-time recurrence
//
//   w_{k} = M w_{k-1} + F u_k,    y_k = C x_k + D u_k
//
// with per-oscillator state pairs w_i = (z_i, x_i). M is block-diagonal in
// the pair index, so the blocks are stored as four length-m arrays, and the
// i-th input block F_i is (f1_i, f2_i) scaling row i of B.
struct DiscreteSystem {
  Variant variant = Variant::DLinossImex;
  std::vector<double> m11, m12, m21, m22;
  std::vector<double> f1, f2;
  Mat b;  // m x p
  Mat c;  // q x m
  Mat d;  // q x p (may be empty == zero)

  std::size_t count() const { return m11.size(); }
  std::size_t input_dim() const { return b.cols; }
  std::size_t output_dim() const { return c.rows; }
};

// IMEX discretization of the damped system. Per oscillator, with
// S = 1 + dt*G:
//
//   M = [ 1/S        -dt*A/S     ]      F = [ dt/S   ] * B_row
//       [ dt/S        1-dt^2*A/S ]          [ dt^2/S ]
DiscreteSystem discretize_dlinoss(const OscillatorParams& params);

// Same blocks restricted to G = 0 (the undamped IMEX baseline). Throws
// DomainError if any damping coefficient is nonzero.
DiscreteSystem discretize_linoss_imex(const OscillatorParams& params);

// Fully implicit discretization of the undamped system, obtained by solving
//   z_{k+1} = z_k + dt(-A x_{k+1} + B u_{k+1}),  x_{k+1} = x_k + dt z_{k+1}.
// Requires G = 0; throws DomainError otherwise.
DiscreteSystem discretize_linoss_im(const OscillatorParams& params);

// Dispatch on the variant tag.
DiscreteSystem discretize(Variant variant, const OscillatorParams& params);

// Reference O(N) evaluation of the recurrence from the zero initial state.
// inputs is row-major [n][p]; the result is row-major [n][q].
std::vector<double> apply_recurrence_sequential(const DiscreteSystem& sys,
                                                std::span<const double> inputs,
                                                std::size_t n);

}  // namespace dlinoss
