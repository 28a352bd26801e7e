#ifndef SO2DR_STENCIL_HPP
#define SO2DR_STENCIL_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "so2dr/errors.hpp"

namespace so2dr {

enum class StencilKind { box, gradient };

std::string to_string(StencilKind kind);
StencilKind stencil_kind_from_string(const std::string& s);

struct Tap {
  int dy = 0;
  int dx = 0;
  float w = 0.0f;
};

/// A stencil pattern. Taps are kept in canonical order (dy ascending, then dx
/// ascending); that order defines the accumulation sequence and therefore the
/// bit-exact value of every update.
struct StencilSpec {
  StencilKind kind = StencilKind::box;
  int radius = 1;
  std::vector<Tap> taps;
  int flops_per_element = 0;  // model metadata, never measured

  /// Box stencil with the default uniform weights 1/(2r+1)^2 (stored as the
  /// single-precision rounding of that quotient).
  static StencilSpec box(int radius);
  /// Box stencil with caller-supplied weights in canonical tap order.
  static StencilSpec box(int radius, const std::vector<float>& weights);
  /// 5-point gradient stencil (radius 1). The taps describe the access
  /// pattern; evaluation uses the pinned expression in stencil_row().
  static StencilSpec gradient();

  std::string name() const;  // "box2d3r", "gradient2d"
  void validate() const;
};

/// Geometry of a padded square grid of single-precision cells.
struct GridSpec {
  int sz = 0;  // interior edge length
  int r = 0;   // padding ring width
  static constexpr int b_elem = 4;

  int padded() const { return sz + 2 * r; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(padded()) * padded();
  }
  bool operator==(const GridSpec&) const = default;
};

struct Grid {
  GridSpec spec;
  std::vector<float> values;  // row-major, padded() x padded()

  float& at(int y, int x) {
    return values[static_cast<std::size_t>(y) * spec.padded() + x];
  }
  float at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * spec.padded() + x];
  }
  float* row(int y) { return values.data() + static_cast<std::size_t>(y) * spec.padded(); }
  const float* row(int y) const {
    return values.data() + static_cast<std::size_t>(y) * spec.padded();
  }
};

/// Half-open row interval [lo, hi) in padded row coordinates.
struct RowInterval {
  int lo = 0;
  int hi = 0;
  int height() const { return hi - lo; }
  bool empty() const { return hi <= lo; }
  bool contains(const RowInterval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool operator==(const RowInterval&) const = default;
};

/// Deterministic pseudorandom cell value in [0,1) keyed by (seed, y, x).
/// Counter-based (splitmix64 finalizer), identical on every platform.
float cell_value(std::uint64_t seed, int y, int x);

/// Fills a padded grid (ring included) with cell_value(seed, y, x).
Grid init_grid(const GridSpec& spec, std::uint64_t seed);

/// Evaluates one stencil row segment in canonical order: dst[i] becomes the
/// stencil value at the cell src points to (plus i columns). src walks the
/// input grid; stride is its row pitch. One fused multiply-add per tap for
/// box stencils; the gradient uses its fixed expression.
void stencil_row(float* dst, const float* src, std::ptrdiff_t stride, int n,
                 const StencilSpec& spec);

/// Applies one stencil step on `rows` x interior columns, reading `in` and
/// writing `out`. Cells outside that region are left untouched in `out`.
void apply_step(const Grid& in, const StencilSpec& spec, RowInterval rows,
                Grid& out);

/// Serial reference runner: n full-interior steps with two ping-pong buffers.
/// This is the oracle every executor mode must match bit-exactly.
Grid run_reference(const Grid& grid, const StencilSpec& spec, int steps);

/// FNV-1a over the raw cell bytes; used to identify grids in reports.
std::uint64_t grid_checksum(const Grid& grid);

}  // namespace so2dr

#endif  // SO2DR_STENCIL_HPP
