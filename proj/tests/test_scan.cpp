#include <cmath>
#include <cstring>
#include <vector>

#include "dlinoss/errors.hpp"
#include "dlinoss/oscillator.hpp"
#include "dlinoss/rng.hpp"
#include "dlinoss/scan.hpp"
#include "dlinoss/spectral.hpp"
#include "doctest.h"

using namespace dlinoss;

namespace {

ScanElement random_element(Rng& rng, std::size_t m) {
  ScanElement e = ScanElement::identity(m);
  for (std::size_t i = 0; i < m; ++i) {
    e.t11[i] = rng.uniform(-1.0, 1.0);
    e.t12[i] = rng.uniform(-1.0, 1.0);
    e.t21[i] = rng.uniform(-1.0, 1.0);
    e.t22[i] = rng.uniform(-1.0, 1.0);
    e.v1[i] = rng.normal();
    e.v2[i] = rng.normal();
  }
  return e;
}

bool elements_close(const ScanElement& a, const ScanElement& b, double tol) {
  for (std::size_t i = 0; i < a.count(); ++i) {
    const double vals[6][2] = {{a.t11[i], b.t11[i]}, {a.t12[i], b.t12[i]}, {a.t21[i], b.t21[i]},
                               {a.t22[i], b.t22[i]}, {a.v1[i], b.v1[i]},   {a.v2[i], b.v2[i]}};
    for (auto& v : vals) {
      const double scale = std::max({std::abs(v[0]), std::abs(v[1]), 1.0});
      if (std::abs(v[0] - v[1]) > tol * scale) return false;
    }
  }
  return true;
}

// Elements of a random stable LTI system driven by white noise.
std::vector<ScanElement> random_system_elements(Rng& rng, std::size_t m, std::size_t n) {
  std::vector<double> m11(m), m12(m), m21(m), m22(m), f1(m), f2(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = rng.uniform(0.05, 1.0);
    const double g = rng.uniform(0.0, 2.0);
    double a;
    do {
      a = rng.uniform(0.0, 6.0 / (dt * dt));
    } while (!is_stable(a, g, dt));
    const double s = 1.0 + dt * g;
    m11[i] = 1.0 / s;
    m12[i] = -dt * a / s;
    m21[i] = dt / s;
    m22[i] = 1.0 - dt * dt * a / s;
    f1[i] = dt / s;
    f2[i] = dt * dt / s;
  }
  std::vector<ScanElement> elems;
  elems.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    ScanElement e = ScanElement::identity(m);
    for (std::size_t i = 0; i < m; ++i) {
      e.t11[i] = m11[i];
      e.t12[i] = m12[i];
      e.t21[i] = m21[i];
      e.t22[i] = m22[i];
      const double u = rng.normal();
      e.v1[i] = f1[i] * u;
      e.v2[i] = f2[i] * u;
    }
    elems.push_back(std::move(e));
  }
  return elems;
}

}  // namespace

TEST_CASE("compose matches the scalar analogue") {
  ScanElement a = ScanElement::identity(1), b = ScanElement::identity(1);
  a.t11[0] = a.t22[0] = 2.0;
  a.v1[0] = a.v2[0] = 3.0;
  b.t11[0] = b.t22[0] = 5.0;
  b.v1[0] = b.v2[0] = 7.0;
  auto r = compose(a, b);
  CHECK(r.t11[0] == 10.0);
  CHECK(r.t22[0] == 10.0);
  CHECK(r.v1[0] == 22.0);
  CHECK(r.v2[0] == 22.0);
}

TEST_CASE("identity element is neutral on both sides") {
  Rng rng(41);
  auto e = random_element(rng, 3);
  auto id = ScanElement::identity(3);
  CHECK(elements_close(compose(e, id), e, 0.0));
  CHECK(elements_close(compose(id, e), e, 0.0));
}

TEST_CASE("composition is associative to fp tolerance") {
  Rng rng(43);
  for (int t = 0; t < 100000; ++t) {
    auto x = random_element(rng, 1);
    auto y = random_element(rng, 1);
    auto z = random_element(rng, 1);
    auto left = compose(compose(x, y), z);
    auto right = compose(x, compose(y, z));
    CHECK(elements_close(left, right, 1e-12));
  }
}

TEST_CASE("compose rejects mismatched oscillator counts") {
  CHECK_THROWS_AS(compose(ScanElement::identity(2), ScanElement::identity(3)), ConfigError);
}

TEST_CASE("single element scan returns its offset") {
  Rng rng(47);
  auto e = random_element(rng, 2);
  for (auto mode : {ScanMode::Sequential, ScanMode::Parallel}) {
    auto states = scan_inclusive(std::vector<ScanElement>{e}, mode);
    REQUIRE(states.size() == 4);
    CHECK(states[0] == e.v1[0]);
    CHECK(states[1] == e.v1[1]);
    CHECK(states[2] == e.v2[0]);
    CHECK(states[3] == e.v2[1]);
  }
}

TEST_CASE("scan reproduces the geometric decay oracle") {
  // first-order decay embedded in the x component
  std::vector<ScanElement> elems;
  const double u[3] = {1.0, 0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    ScanElement e = ScanElement::identity(1);
    e.t11[0] = 0.0;
    e.t22[0] = 0.8;
    e.v2[0] = u[k];
    elems.push_back(e);
  }
  for (auto mode : {ScanMode::Sequential, ScanMode::Parallel}) {
    auto states = scan_inclusive(elems, mode);
    CHECK(states[0 * 2 + 1] == doctest::Approx(1.0));
    CHECK(states[1 * 2 + 1] == doctest::Approx(0.8));
    CHECK(states[2 * 2 + 1] == doctest::Approx(0.64));
  }
}

TEST_CASE("parallel scan matches sequential across lengths") {
  Rng rng(53);
  for (std::size_t n : {1ul, 2ul, 3ul, 7ul, 64ul, 1000ul, 2048ul, 4097ul}) {
    auto elems = random_system_elements(rng, 3, n);
    auto seq = scan_inclusive(elems, ScanMode::Sequential);
    auto par = scan_inclusive(elems, ScanMode::Parallel);
    REQUIRE(seq.size() == par.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const double scale = std::max({std::abs(seq[i]), std::abs(par[i]), 1.0});
      worst = std::max(worst, std::abs(seq[i] - par[i]) / scale);
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("parallel scan is deterministic bit-for-bit") {
  Rng rng(59);
  auto elems = random_system_elements(rng, 4, 777);
  auto a = scan_inclusive(elems, ScanMode::Parallel);
  auto b = scan_inclusive(elems, ScanMode::Parallel);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("LTI fast path agrees with the general engine") {
  Rng rng(61);
  const std::size_t m = 3;
  for (std::size_t n : {1ul, 5ul, 64ul, 321ul}) {
    auto elems = random_system_elements(rng, m, n);
    std::vector<double> offsets(n * 2 * m);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < m; ++i) {
        offsets[k * 2 * m + i] = elems[k].v1[i];
        offsets[k * 2 * m + m + i] = elems[k].v2[i];
      }
    for (auto mode : {ScanMode::Sequential, ScanMode::Parallel}) {
      auto general = scan_inclusive(elems, mode);
      std::vector<double> states(n * 2 * m);
      scan_lti(elems[0].t11, elems[0].t12, elems[0].t21, elems[0].t22, offsets, n, mode,
               states);
      REQUIRE(general.size() == states.size());
      CHECK(std::memcmp(general.data(), states.data(), states.size() * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("work and depth of the fixed tree") {
  auto s1 = scan_work_depth_report(1);
  CHECK(s1.work == 0);
  CHECK(s1.depth == 0);

  auto s8 = scan_work_depth_report(8);
  CHECK(s8.depth <= 7);

  auto s1024 = scan_work_depth_report(1024);
  CHECK(s1024.depth <= 21);

  // depth <= 2*ceil(log2 n) + 1 on powers of two and adjacent odd sizes
  for (std::size_t n : {2ul, 3ul, 4ul, 5ul, 15ul, 16ul, 17ul, 255ul, 256ul, 257ul, 1023ul,
                        1024ul, 1025ul}) {
    auto s = scan_work_depth_report(n);
    std::size_t ceil_log2 = 0;
    while ((1ul << ceil_log2) < n) ++ceil_log2;
    CHECK(s.depth <= 2 * ceil_log2 + 1);
    CHECK(s.work >= n - 1);
  }
}
