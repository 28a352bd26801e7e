#ifndef SO2DR_TESTS_HELPERS_HPP
#define SO2DR_TESTS_HELPERS_HPP

#include <cmath>
#include <cstring>

#include "so2dr/stencil.hpp"

namespace testutil {

using namespace so2dr;

// Independent per-cell oracle: literal tap accumulation in canonical order
// (one fmaf per tap), gradient as its pinned expression. Kept separate from
// the library's row kernel on purpose.
inline float brute_cell(const Grid& g, const StencilSpec& spec, int y, int x) {
  if (spec.kind == StencilKind::gradient) {
    const float c = g.at(y, x);
    const float dn = g.at(y - 1, x) - c;
    const float ds = g.at(y + 1, x) - c;
    const float de = g.at(y, x + 1) - c;
    const float dw = g.at(y, x - 1) - c;
    const float sum = ((dn + ds) + de) + dw;
    return c + 0.25f * sum;
  }
  float acc = 0.0f;
  for (const Tap& t : spec.taps)
    acc = std::fmaf(t.w, g.at(y + t.dy, x + t.dx), acc);
  return acc;
}

inline Grid brute_step(const Grid& g, const StencilSpec& spec) {
  Grid out = g;
  const int r = g.spec.r, sz = g.spec.sz;
  for (int y = r; y < r + sz; ++y)
    for (int x = r; x < r + sz; ++x) out.at(y, x) = brute_cell(g, spec, y, x);
  return out;
}

inline Grid brute_run(Grid g, const StencilSpec& spec, int steps) {
  for (int s = 0; s < steps; ++s) g = brute_step(g, spec);
  return g;
}

inline bool bits_equal(const Grid& a, const Grid& b) {
  if (a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const float x = a.values[i], y = b.values[i];
    if (std::memcmp(&x, &y, sizeof(float)) != 0) return false;
  }
  return true;
}

inline Grid zeros_with_impulse(const GridSpec& spec, int y, int x) {
  Grid g{spec, std::vector<float>(spec.cell_count(), 0.0f)};
  g.at(y, x) = 1.0f;
  return g;
}

}  // namespace testutil

#endif
