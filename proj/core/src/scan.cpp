#include "dlinoss/scan.hpp"

#include <bit>

#include "dlinoss/errors.hpp"

namespace dlinoss {

ScanElement ScanElement::identity(std::size_t m) {
  ScanElement e;
  e.t11.assign(m, 1.0);
  e.t12.assign(m, 0.0);
  e.t21.assign(m, 0.0);
  e.t22.assign(m, 1.0);
  e.v1.assign(m, 0.0);
  e.v2.assign(m, 0.0);
  return e;
}

ScanElement compose(const ScanElement& a, const ScanElement& b) {
  const std::size_t m = a.count();
  if (b.count() != m) throw ConfigError("scan elements disagree on oscillator count");
  ScanElement r;
  r.t11.resize(m);
  r.t12.resize(m);
  r.t21.resize(m);
  r.t22.resize(m);
  r.v1.resize(m);
  r.v2.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    r.t11[i] = b.t11[i] * a.t11[i] + b.t12[i] * a.t21[i];
    r.t12[i] = b.t11[i] * a.t12[i] + b.t12[i] * a.t22[i];
    r.t21[i] = b.t21[i] * a.t11[i] + b.t22[i] * a.t21[i];
    r.t22[i] = b.t21[i] * a.t12[i] + b.t22[i] * a.t22[i];
    r.v1[i] = b.t11[i] * a.v1[i] + b.t12[i] * a.v2[i] + b.v1[i];
    r.v2[i] = b.t21[i] * a.v1[i] + b.t22[i] * a.v2[i] + b.v2[i];
  }
  return r;
}

namespace {

// Structure-of-arrays working set for the tree kernels, living in a caller's
// reusable workspace: slot k of each component at offset k*m.
struct Slabs {
  std::size_t m;
  double *t11, *t12, *t21, *t22, *v1, *v2;

  Slabs(ScanWorkspace& ws, std::size_t slots, std::size_t m_) : m(m_) {
    const std::size_t want = slots * m_;
    if (ws.t11.size() < want) {
      ws.t11.resize(want);
      ws.t12.resize(want);
      ws.t21.resize(want);
      ws.t22.resize(want);
      ws.v1.resize(want);
      ws.v2.resize(want);
    }
    t11 = ws.t11.data();
    t12 = ws.t12.data();
    t21 = ws.t21.data();
    t22 = ws.t22.data();
    v1 = ws.v1.data();
    v2 = ws.v2.data();
  }

  // dst = compose(a, b) = "a then b". dst may alias b (reads of b happen
  // before the writes of each component), but must not alias a.
  void compose_slots(std::size_t dst, std::size_t a, std::size_t b) {
    const std::size_t d = dst * m, ia = a * m, ib = b * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double a11 = t11[ia + i], a12 = t12[ia + i], a21 = t21[ia + i], a22 = t22[ia + i];
      const double b11 = t11[ib + i], b12 = t12[ib + i], b21 = t21[ib + i], b22 = t22[ib + i];
      t11[d + i] = b11 * a11 + b12 * a21;
      t12[d + i] = b11 * a12 + b12 * a22;
      t21[d + i] = b21 * a11 + b22 * a21;
      t22[d + i] = b21 * a12 + b22 * a22;
      v1[d + i] = b11 * v1[ia + i] + b12 * v2[ia + i] + v1[ib + i];
      v2[d + i] = b21 * v1[ia + i] + b22 * v2[ia + i] + v2[ib + i];
    }
  }

  void copy_slot(std::size_t dst, std::size_t src) {
    const std::size_t d = dst * m, s = src * m;
    for (std::size_t i = 0; i < m; ++i) {
      t11[d + i] = t11[s + i];
      t12[d + i] = t12[s + i];
      t21[d + i] = t21[s + i];
      t22[d + i] = t22[s + i];
      v1[d + i] = v1[s + i];
      v2[d + i] = v2[s + i];
    }
  }

  void set_identity(std::size_t slot) {
    const std::size_t s = slot * m;
    for (std::size_t i = 0; i < m; ++i) {
      t11[s + i] = 1.0;
      t12[s + i] = 0.0;
      t21[s + i] = 0.0;
      t22[s + i] = 1.0;
      v1[s + i] = 0.0;
      v2[s + i] = 0.0;
    }
  }
};

// Blelloch up-/down-sweep over slots [0, np); leaves the exclusive prefix of
// slot k in slot k. The scratch slot sits at index np.
void exclusive_tree(Slabs& s, std::size_t np, ScanStats* stats) {
  const std::size_t scratch = np;
  for (std::size_t stride = 1; stride < np; stride *= 2) {
    for (std::size_t i = 0; i + 2 * stride <= np; i += 2 * stride) {
      s.compose_slots(i + 2 * stride - 1, i + stride - 1, i + 2 * stride - 1);
      if (stats) ++stats->work;
    }
    if (stats) ++stats->depth;
  }
  s.set_identity(np - 1);
  for (std::size_t stride = np / 2; stride >= 1; stride /= 2) {
    for (std::size_t i = 0; i + 2 * stride <= np; i += 2 * stride) {
      // right prefix = (parent prefix) then (left subtree total)
      s.copy_slot(scratch, i + 2 * stride - 1);
      s.compose_slots(i + 2 * stride - 1, scratch, i + stride - 1);
      s.copy_slot(i + stride - 1, scratch);
      if (stats) ++stats->work;
    }
    if (stats) ++stats->depth;
    if (stride == 1) break;
  }
}

}  // namespace

std::vector<double> scan_inclusive(std::span<const ScanElement> elements, ScanMode mode,
                                   ScanStats* stats) {
  const std::size_t n = elements.size();
  if (n == 0) throw ConfigError("scan requires at least one element");
  const std::size_t m = elements[0].count();
  for (const auto& e : elements)
    if (e.count() != m) throw ConfigError("scan elements disagree on oscillator count");

  if (stats) *stats = ScanStats{};
  std::vector<double> states(n * 2 * m, 0.0);

  if (mode == ScanMode::Sequential) {
    std::vector<double> z(m, 0.0), x(m, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const ScanElement& e = elements[k];
      for (std::size_t i = 0; i < m; ++i) {
        const double zn = e.t11[i] * z[i] + e.t12[i] * x[i] + e.v1[i];
        const double xn = e.t21[i] * z[i] + e.t22[i] * x[i] + e.v2[i];
        z[i] = zn;
        x[i] = xn;
      }
      if (stats && k > 0) {
        ++stats->work;
        ++stats->depth;
      }
      double* out = states.data() + k * 2 * m;
      for (std::size_t i = 0; i < m; ++i) {
        out[i] = z[i];
        out[m + i] = x[i];
      }
    }
    return states;
  }

  const std::size_t np = std::bit_ceil(n);
  ScanWorkspace ws;
  Slabs slabs(ws, np + 1, m);
  for (std::size_t k = 0; k < n; ++k) {
    const ScanElement& e = elements[k];
    const std::size_t off = k * m;
    for (std::size_t i = 0; i < m; ++i) {
      slabs.t11[off + i] = e.t11[i];
      slabs.t12[off + i] = e.t12[i];
      slabs.t21[off + i] = e.t21[i];
      slabs.t22[off + i] = e.t22[i];
      slabs.v1[off + i] = e.v1[i];
      slabs.v2[off + i] = e.v2[i];
    }
  }
  for (std::size_t k = n; k < np; ++k) slabs.set_identity(k);
  if (np > 1) exclusive_tree(slabs, np, stats);

  // Inclusive state k = e_k applied to the exclusive prefix offset (the
  // prefix of the zero state is just its offset vector).
  for (std::size_t k = 0; k < n; ++k) {
    const ScanElement& e = elements[k];
    const std::size_t off = k * m;
    double* out = states.data() + k * 2 * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double pz = np > 1 ? slabs.v1[off + i] : 0.0;
      const double px = np > 1 ? slabs.v2[off + i] : 0.0;
      out[i] = e.t11[i] * pz + e.t12[i] * px + e.v1[i];
      out[m + i] = e.t21[i] * pz + e.t22[i] * px + e.v2[i];
    }
    if (stats && np > 1) ++stats->work;
  }
  if (stats && np > 1) ++stats->depth;
  return states;
}

void scan_lti(std::span<const double> m11, std::span<const double> m12,
              std::span<const double> m21, std::span<const double> m22,
              std::span<const double> offsets, std::size_t n, ScanMode mode,
              std::span<double> states, ScanWorkspace* workspace) {
  const std::size_t m = m11.size();
  if (m12.size() != m || m21.size() != m || m22.size() != m)
    throw ConfigError("transition block arrays disagree on oscillator count");
  if (n == 0) throw ConfigError("scan requires at least one element");
  if (offsets.size() != n * 2 * m || states.size() != n * 2 * m)
    throw ConfigError("offset/state buffers must be n x 2m");

  if (mode == ScanMode::Sequential) {
    std::vector<double> z(m, 0.0), x(m, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double* v = offsets.data() + k * 2 * m;
      double* out = states.data() + k * 2 * m;
      for (std::size_t i = 0; i < m; ++i) {
        const double zn = m11[i] * z[i] + m12[i] * x[i] + v[i];
        const double xn = m21[i] * z[i] + m22[i] * x[i] + v[m + i];
        z[i] = zn;
        x[i] = xn;
        out[i] = zn;
        out[m + i] = xn;
      }
    }
    return;
  }

  const std::size_t np = std::bit_ceil(n);
  ScanWorkspace local;
  ScanWorkspace& ws = workspace ? *workspace : local;
  Slabs slabs(ws, np + 1, m);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t off = k * m;
    const double* v = offsets.data() + k * 2 * m;
    for (std::size_t i = 0; i < m; ++i) {
      slabs.t11[off + i] = m11[i];
      slabs.t12[off + i] = m12[i];
      slabs.t21[off + i] = m21[i];
      slabs.t22[off + i] = m22[i];
      slabs.v1[off + i] = v[i];
      slabs.v2[off + i] = v[m + i];
    }
  }
  for (std::size_t k = n; k < np; ++k) slabs.set_identity(k);
  if (np > 1) exclusive_tree(slabs, np, nullptr);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t off = k * m;
    const double* v = offsets.data() + k * 2 * m;
    double* out = states.data() + k * 2 * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double pz = np > 1 ? slabs.v1[off + i] : 0.0;
      const double px = np > 1 ? slabs.v2[off + i] : 0.0;
      out[i] = m11[i] * pz + m12[i] * px + v[i];
      out[m + i] = m21[i] * pz + m22[i] * px + v[m + i];
    }
  }
}

ScanStats scan_work_depth_report(std::size_t n) {
  if (n == 0) throw ConfigError("scan requires at least one element");
  std::vector<ScanElement> elements(n, ScanElement::identity(1));
  ScanStats stats;
  scan_inclusive(elements, ScanMode::Parallel, &stats);
  return stats;
}

}  // namespace dlinoss
