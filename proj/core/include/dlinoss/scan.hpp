#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dlinoss {

// One element of the affine recurrence w <- t w + v, blocked per oscillator:
// t is a 2x2 block per oscillator, v a 2-vector offset. Composition
// (a then b) = (b.t * a.t, b.t * a.v + b.v) is associative.
struct ScanElement {
  std::vector<double> t11, t12, t21, t22;
  std::vector<double> v1, v2;

  static ScanElement identity(std::size_t m);
  std::size_t count() const { return t11.size(); }
};

ScanElement compose(const ScanElement& a, const ScanElement& b);

enum class ScanMode { Sequential, Parallel };

// Composition counts of a scan evaluation. `depth` is the number of levels
// on the critical path (each level's compositions are mutually independent).
struct ScanStats {
  std::size_t work = 0;
  std::size_t depth = 0;
};

// Inclusive scan from the zero initial state: output slot k holds the state
// after elements 0..k, laid out [n][2m] with the m z-components first, then
// the m x-components. Parallel mode runs a fixed balanced up-/down-sweep
// tree (identity-padded to a power of two), so its output is reproducible
// bit-for-bit across runs.
std::vector<double> scan_inclusive(std::span<const ScanElement> elements, ScanMode mode,
                                   ScanStats* stats = nullptr);

// Reusable tree buffers for repeated scans of similar size.
struct ScanWorkspace {
  std::vector<double> t11, t12, t21, t22, v1, v2;
};

// Fast path for the time-invariant case: every element shares the transition
// blocks (m11..m22, length m) and only offsets vary. offsets is [n][2m]
// (z parts then x parts per step); states has the same layout.
void scan_lti(std::span<const double> m11, std::span<const double> m12,
              std::span<const double> m21, std::span<const double> m22,
              std::span<const double> offsets, std::size_t n, ScanMode mode,
              std::span<double> states, ScanWorkspace* workspace = nullptr);

// Work/depth of the fixed parallel tree for a length-n scan.
ScanStats scan_work_depth_report(std::size_t n);

}  // namespace dlinoss
