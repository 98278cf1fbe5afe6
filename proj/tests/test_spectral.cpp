#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>

#include "dlinoss/errors.hpp"
#include "dlinoss/oscillator.hpp"
#include "dlinoss/rng.hpp"
#include "dlinoss/spectral.hpp"
#include "doctest.h"

using namespace dlinoss;

namespace {

// Independent oracle: generic numeric eigendecomposition of the 2x2 block.
std::complex<double> numeric_representative(double a, double g, double dt) {
  OscillatorParams p;
  p.a = {a};
  p.g = {g};
  p.dt = {dt};
  p.b = Mat(1, 1, 1.0);
  p.c = Mat(1, 1, 1.0);
  auto sys = discretize_dlinoss(p);
  Eigen::Matrix2d m;
  m << sys.m11[0], sys.m12[0], sys.m21[0], sys.m22[0];
  Eigen::EigenSolver<Eigen::Matrix2d> solver(m);
  std::complex<double> l0 = solver.eigenvalues()(0);
  std::complex<double> l1 = solver.eigenvalues()(1);
  if (std::abs(l0.imag()) > 1e-14 || std::abs(l1.imag()) > 1e-14)
    return l0.imag() >= 0.0 ? l0 : l1;
  return l0.real() >= l1.real() ? l0 : l1;
}

}  // namespace

TEST_CASE("closed-form eigenvalues at worked points") {
  // undamped, dt=1, A=1: on the unit circle
  auto s = eigenvalue_single(1.0, 0.0, 1.0);
  CHECK(s.in_stable_set);
  CHECK(s.lambda.real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.lambda.imag() == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-15));
  CHECK(s.magnitude == doctest::Approx(1.0).epsilon(1e-15));

  // damped, dt=1, G=1, A=1
  s = eigenvalue_single(1.0, 1.0, 1.0);
  CHECK(s.in_stable_set);
  CHECK(s.lambda.real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.lambda.imag() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.magnitude == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  // discriminant-zero boundary: double real root 0.8
  s = eigenvalue_single(0.0625, 0.5625, 1.0);
  CHECK(s.in_stable_set);
  CHECK(s.discriminant == doctest::Approx(0.0));
  CHECK(s.lambda.real() == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(s.lambda.imag() == 0.0);
}

TEST_CASE("representative ordering keeps Im >= 0") {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const double dt = rng.uniform(0.05, 1.0);
    const double g = rng.uniform(0.0, 5.0);
    const double a = rng.uniform(0.0, 8.0);
    auto s = eigenvalue_single(a, g, dt);
    CHECK(s.lambda.imag() >= 0.0);
    if (s.in_stable_set) {
      CHECK(s.lambda2 == std::conj(s.lambda));
    } else {
      CHECK(s.lambda.imag() == 0.0);
      CHECK(s.lambda.real() >= s.lambda2.real());
    }
  }
}

TEST_CASE("stability criterion worked examples") {
  CHECK(is_stable(4.0, 0.0, 1.0));        // boundary: 16 <= 16
  CHECK_FALSE(is_stable(5.0, 0.0, 1.0));  // 25 > 20
  CHECK(is_stable(1.0, 2.0, 0.5));        // (2 - 0.5)^2 = 2.25 <= 4

  OscillatorParams p;
  p.a = {4.0, 5.0, 1.0};
  p.g = {0.0, 0.0, 2.0};
  p.dt = {1.0, 1.0, 0.5};
  p.b = Mat(3, 1, 1.0);
  p.c = Mat(1, 3, 1.0);
  auto flags = check_stability(p);
  CHECK(flags[0]);
  CHECK_FALSE(flags[1]);
  CHECK(flags[2]);
}

TEST_CASE("stable magnitudes follow the damping formula") {
  Rng rng(17);
  for (int t = 0; t < 20000; ++t) {
    const double dt = rng.uniform(0.05, 1.0);
    const double g = rng.uniform(0.0, 4.0);
    double a;
    do {
      a = rng.uniform(0.0, 6.0 / (dt * dt));
    } while (!is_stable(a, g, dt));
    auto s = eigenvalue_single(a, g, dt);
    REQUIRE(s.in_stable_set);
    CHECK(s.magnitude <= 1.0 + 1e-15);
    CHECK(std::abs(s.magnitude - 1.0 / std::sqrt(1.0 + dt * g)) <= 1e-12);
  }
}

TEST_CASE("closed form agrees with a generic 2x2 eigensolver") {
  Rng rng(23);
  for (int t = 0; t < 2000; ++t) {
    const double dt = rng.uniform(0.05, 1.0);
    const double g = rng.uniform(0.0, 4.0);
    double a;
    do {
      a = rng.uniform(0.0, 6.0 / (dt * dt));
    } while (!is_stable(a, g, dt));
    auto s = eigenvalue_single(a, g, dt);
    auto n = numeric_representative(a, g, dt);
    CHECK(std::abs(s.lambda - n) <= 1e-10 * std::max(1.0, std::abs(n)));
  }
}

TEST_CASE("inverse map worked examples") {
  auto p = phi_inverse({0.8, 0.0}, 1.0);
  CHECK(p.a == doctest::Approx(0.0625).epsilon(1e-13));
  CHECK(p.g == doctest::Approx(0.5625).epsilon(1e-13));
  // forward map returns the double root 0.8
  auto s = eigenvalue_single(p.a, p.g, 1.0);
  CHECK(s.lambda.real() == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(std::abs(s.lambda.imag()) < 1e-7);

  p = phi_inverse({0.0, 1.0}, 1.0);
  CHECK(p.a == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(p.g == doctest::Approx(0.0));
  s = eigenvalue_single(p.a, p.g, 1.0);
  CHECK(std::abs(s.lambda - std::complex<double>(0.0, 1.0)) < 1e-14);
}

TEST_CASE("unit-magnitude targets are undamped") {
  Rng rng(29);
  for (int t = 0; t < 300; ++t) {
    const double theta = rng.uniform(0.0, 3.14159);
    const double dt = rng.uniform(0.05, 1.0);
    auto p = phi_inverse(std::polar(1.0, theta), dt);
    CHECK(std::abs(p.g) < 1e-12);
  }
}

TEST_CASE("inverse map rejects singular and out-of-disk targets") {
  CHECK_THROWS_AS(phi_inverse({0.0, 0.0}, 1.0), DomainError);
  CHECK_THROWS_AS(phi_inverse({1.2, 0.0}, 1.0), DomainError);
  CHECK_THROWS_AS(phi_inverse({0.5, 0.0}, 0.0), DomainError);
}

TEST_CASE("round trip through the inverse map") {
  Rng rng(31);
  for (double dt : {0.05, 0.5, 1.0}) {
    for (int t = 0; t < 3000; ++t) {
      const double r = std::sqrt(rng.uniform(1e-6, 1.0));
      const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      const std::complex<double> target = std::polar(r, theta);
      auto p = phi_inverse(target, dt);
      CHECK(is_stable(p.a, p.g, dt));
      auto s = eigenvalue_single(p.a, p.g, dt);
      const std::complex<double> got =
          target.imag() >= 0.0 ? s.lambda : std::conj(s.lambda);
      CHECK(std::abs(got - target) <= 1e-9 * std::max(1.0, std::abs(target)));
    }
  }
}

TEST_CASE("baseline curves stay on their circles") {
  Rng rng(37);
  std::vector<double> gammas;
  for (int t = 0; t < 2000; ++t) gammas.push_back(rng.uniform(0.0, 2.0));
  auto im = baseline_spectral_curve(Variant::LinossIm, gammas);
  auto imex = baseline_spectral_curve(Variant::LinossImex, gammas);
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    CHECK(std::abs(std::abs(im[i] - std::complex<double>(0.5, 0.0)) - 0.5) <= 1e-12);
    CHECK(std::abs(std::abs(imex[i]) - 1.0) <= 1e-12);
  }

  // worked points
  auto pts = baseline_spectral_curve(Variant::LinossIm, std::vector<double>{1.0, 0.0});
  CHECK(std::abs(pts[0] - std::complex<double>(0.5, 0.5)) < 1e-15);
  CHECK(std::abs(pts[1] - std::complex<double>(1.0, 0.0)) < 1e-15);
  auto imex1 = baseline_spectral_curve(Variant::LinossImex, std::vector<double>{1.0});
  CHECK(std::abs(imex1[0] - std::complex<double>(0.5, std::sqrt(3.0) / 2.0)) < 1e-15);

  CHECK_THROWS_AS(baseline_spectral_curve(Variant::DLinossImex, gammas), DomainError);
}
