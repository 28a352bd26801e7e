#include "so2dr/stencil.hpp"

#include <algorithm>
#include <cmath>

namespace so2dr {

std::string to_string(StencilKind kind) {
  return kind == StencilKind::box ? "box" : "gradient";
}

StencilKind stencil_kind_from_string(const std::string& s) {
  if (s == "box") return StencilKind::box;
  if (s == "gradient") return StencilKind::gradient;
  throw InvalidSpecError("unknown stencil kind \"" + s + "\"");
}

static std::vector<Tap> box_taps(int radius, const std::vector<float>& weights) {
  std::vector<Tap> taps;
  taps.reserve(weights.size());
  std::size_t i = 0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) taps.push_back({dy, dx, weights[i++]});
  return taps;
}

StencilSpec StencilSpec::box(int radius) {
  if (radius < 1 || radius > 4)
    throw InvalidSpecError("box radius must be in 1..4, got " + std::to_string(radius));
  const int points = (2 * radius + 1) * (2 * radius + 1);
  const float w = 1.0f / static_cast<float>(points);
  return box(radius, std::vector<float>(points, w));
}

StencilSpec StencilSpec::box(int radius, const std::vector<float>& weights) {
  const int points = (2 * radius + 1) * (2 * radius + 1);
  if (static_cast<int>(weights.size()) != points)
    throw InvalidSpecError("box radius " + std::to_string(radius) + " needs " +
                           std::to_string(points) + " weights, got " +
                           std::to_string(weights.size()));
  StencilSpec spec;
  spec.kind = StencilKind::box;
  spec.radius = radius;
  spec.taps = box_taps(radius, weights);
  spec.flops_per_element = 2 * points - 1;
  spec.validate();
  return spec;
}

StencilSpec StencilSpec::gradient() {
  StencilSpec spec;
  spec.kind = StencilKind::gradient;
  spec.radius = 1;
  // Access pattern in canonical order; nominal weights of the equivalent
  // linear combination (center cancels to zero).
  spec.taps = {{-1, 0, 0.25f}, {0, -1, 0.25f}, {0, 0, 0.0f}, {0, 1, 0.25f}, {1, 0, 0.25f}};
  spec.flops_per_element = 19;
  spec.validate();
  return spec;
}

std::string StencilSpec::name() const {
  if (kind == StencilKind::gradient) return "gradient2d";
  return "box2d" + std::to_string(radius) + "r";
}

void StencilSpec::validate() const {
  if (radius < 1) throw InvalidSpecError("stencil radius must be positive");
  if (kind == StencilKind::box) {
    if (radius > 4) throw InvalidSpecError("box radius must be in 1..4");
    const std::size_t points =
        static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1);
    if (taps.size() != points)
      throw InvalidSpecError("box stencil must have (2r+1)^2 taps");
  } else {
    if (radius != 1) throw InvalidSpecError("gradient stencil has radius 1");
    if (taps.size() != 5) throw InvalidSpecError("gradient stencil has 5 taps");
  }
  const Tap* prev = nullptr;
  for (const Tap& t : taps) {
    if (std::abs(t.dy) > radius || std::abs(t.dx) > radius)
      throw InvalidSpecError("tap offset exceeds stencil radius");
    if (!std::isfinite(t.w)) throw InvalidSpecError("tap weight not finite");
    if (prev && (t.dy < prev->dy || (t.dy == prev->dy && t.dx <= prev->dx)))
      throw InvalidSpecError("taps not in canonical (dy, dx) ascending order");
    prev = &t;
  }
}

// splitmix64 finalizer; full 64-bit avalanche.
static std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

float cell_value(std::uint64_t seed, int y, int x) {
  const std::uint64_t counter =
      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) << 32) |
      static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
  const std::uint64_t h = mix64(seed ^ mix64(counter));
  // Top 24 bits -> [0,1) exactly representable in single precision.
  return static_cast<float>(h >> 40) * 0x1p-24f;
}

Grid init_grid(const GridSpec& spec, std::uint64_t seed) {
  if (spec.r < 0 || spec.sz < 1)
    throw InvalidSpecError("grid too small (sz=" + std::to_string(spec.sz) +
                           ", r=" + std::to_string(spec.r) + ")");
  Grid g{spec, std::vector<float>(spec.cell_count())};
  const int p = spec.padded();
  for (int y = 0; y < p; ++y) {
    float* row = g.row(y);
    for (int x = 0; x < p; ++x) row[x] = cell_value(seed, y, x);
  }
  return g;
}

void stencil_row(float* dst, const float* src, std::ptrdiff_t stride, int n,
                 const StencilSpec& spec) {
  if (spec.kind == StencilKind::gradient) {
    const float* nr = src - stride;
    const float* sr = src + stride;
#pragma omp simd
    for (int i = 0; i < n; ++i) {
      const float c = src[i];
      const float dn = nr[i] - c;
      const float ds = sr[i] - c;
      const float de = src[i + 1] - c;
      const float dw = src[i - 1] - c;
      const float sum = ((dn + ds) + de) + dw;
      dst[i] = c + 0.25f * sum;
    }
    return;
  }
  for (int i = 0; i < n; ++i) dst[i] = 0.0f;
  for (const Tap& t : spec.taps) {
    const float* s = src + static_cast<std::ptrdiff_t>(t.dy) * stride + t.dx;
    const float w = t.w;
#pragma omp simd
    for (int i = 0; i < n; ++i) dst[i] = std::fmaf(w, s[i], dst[i]);
  }
}

void apply_step(const Grid& in, const StencilSpec& spec, RowInterval rows,
                Grid& out) {
  if (&in == &out) throw ContractError("apply_step: output aliases input");
  if (!(in.spec == out.spec)) throw ContractError("apply_step: grid specs differ");
  const int r = in.spec.r;
  const int sz = in.spec.sz;
  const RowInterval interior{r, r + sz};
  if (!interior.contains(rows))
    throw std::out_of_range("apply_step: rows [" + std::to_string(rows.lo) + "," +
                            std::to_string(rows.hi) + ") outside interior [" +
                            std::to_string(r) + "," + std::to_string(r + sz) + ")");
  const int p = in.spec.padded();
  for (int y = rows.lo; y < rows.hi; ++y)
    stencil_row(out.row(y) + r, in.row(y) + r, p, sz, spec);
}

Grid run_reference(const Grid& grid, const StencilSpec& spec, int steps) {
  if (steps < 0) throw InvalidSpecError("step count must be non-negative");
  Grid a = grid;
  Grid b = grid;  // ring stays valid in both buffers
  const RowInterval interior{grid.spec.r, grid.spec.r + grid.spec.sz};
  Grid* src = &a;
  Grid* dst = &b;
  for (int s = 0; s < steps; ++s) {
    apply_step(*src, spec, interior, *dst);
    std::swap(src, dst);
  }
  return *src;
}

std::uint64_t grid_checksum(const Grid& grid) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  const unsigned char* bytes =
      reinterpret_cast<const unsigned char*>(grid.values.data());
  const std::size_t n = grid.values.size() * sizeof(float);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace so2dr
