#ifndef SO2DR_KERNELS_HPP
#define SO2DR_KERNELS_HPP

#include <cstdint>
#include <vector>

#include "so2dr/memsim.hpp"
#include "so2dr/stencil.hpp"

namespace so2dr {

/// Half-open rectangle in padded grid coordinates.
struct Rect {
  int y0 = 0, y1 = 0;
  int x0 = 0, x1 = 0;
  int height() const { return y1 - y0; }
  int width() const { return x1 - x0; }
  std::uint64_t area() const {
    return height() <= 0 || width() <= 0
               ? 0
               : static_cast<std::uint64_t>(height()) * width();
  }
};

/// Ping-pong pair of simulated device buffers covering rows
/// [base_row, base_row + rows) x [0, cols) of the padded grid.
struct FieldPair {
  int base_row = 0;
  int rows = 0;
  int cols = 0;
  std::vector<float> buf[2];

  void resize(int base, int nrows, int ncols) {
    base_row = base;
    rows = nrows;
    cols = ncols;
    const std::size_t n = static_cast<std::size_t>(nrows) * ncols;
    if (buf[0].size() < n) {
      buf[0].resize(n);
      buf[1].resize(n);
    }
  }
  float* row(int which, int gy) {
    return buf[which].data() + static_cast<std::size_t>(gy - base_row) * cols;
  }
  const float* row(int which, int gy) const {
    return buf[which].data() + static_cast<std::size_t>(gy - base_row) * cols;
  }
};

/// Wraps a grid as a full-coverage field (both buffers hold the grid values).
FieldPair field_from_grid(const Grid& grid);
/// Extracts buffer `which` back into a grid shape.
Grid grid_from_field(const FieldPair& field, const GridSpec& spec, int which);

struct KernelStats {
  std::uint64_t scratch_load = 0;   // bytes
  std::uint64_t scratch_store = 0;  // bytes
  std::uint64_t updates = 0;
  std::uint64_t redundant = 0;
};

/// Multi-step fused stencil kernel over tile-local scratch.
///
/// Advances `region` (its state after `steps` steps) by partitioning it into
/// tile x tile tiles. Each tile loads its (tile + 2*r*steps)-halo block into
/// scratch once, steps locally with the per-step trapezoid shrink, and stores
/// the tile back; reads come from buffer `read`, the result lands in the
/// other buffer. Cells outside `interior` pass through unchanged (constant
/// ring). Bit-identical to `steps` sequential apply_step calls over the
/// matching expanded regions.
///
/// Ledger accounting: scratch_load/scratch_store in bytes; element_updates
/// counts computed cells whose row is interior (all columns count, ring
/// columns included); redundant_updates is the excess of computed cells over
/// the unique cells inside `owned`; one kernel invocation.
KernelStats fused_kernel(FieldPair& field, int read, const StencilSpec& spec,
                         int steps, int tile, Rect region, Rect interior,
                         Rect owned, TransferLedger& ledger);

}  // namespace so2dr

#endif  // SO2DR_KERNELS_HPP
