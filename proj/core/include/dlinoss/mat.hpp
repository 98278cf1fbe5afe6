#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dlinoss {

// Dense row-major matrix. Deliberately minimal: the library's heavy math
// runs on per-oscillator 2x2 blocks stored as flat arrays, so this type only
// carries the input/output/mixing maps.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {a.data() + r * cols, cols}; }
  bool empty() const { return a.empty(); }
  std::size_t size() const { return a.size(); }

  bool operator==(const Mat&) const = default;
};

// y = M x (y sized rows, x sized cols).
inline void matvec(const Mat& m, const double* x, double* y) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.a.data() + r * m.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

// y = M^T x (y sized cols, x sized rows).
inline void matvec_t(const Mat& m, const double* x, double* y) {
  for (std::size_t c = 0; c < m.cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.a.data() + r * m.cols;
    const double xr = x[r];
    for (std::size_t c = 0; c < m.cols; ++c) y[c] += row[c] * xr;
  }
}

// G += x y^T (outer product accumulate; G sized |x| times |y|).
inline void outer_acc(Mat& g, const double* x, const double* y) {
  for (std::size_t r = 0; r < g.rows; ++r) {
    double* row = g.a.data() + r * g.cols;
    const double xr = x[r];
    for (std::size_t c = 0; c < g.cols; ++c) row[c] += xr * y[c];
  }
}

}  // namespace dlinoss
