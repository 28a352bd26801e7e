#include "so2dr/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>

namespace so2dr {

FieldPair field_from_grid(const Grid& grid) {
  FieldPair f;
  f.base_row = 0;
  f.rows = grid.spec.padded();
  f.cols = grid.spec.padded();
  f.buf[0] = grid.values;
  f.buf[1] = grid.values;
  return f;
}

Grid grid_from_field(const FieldPair& field, const GridSpec& spec, int which) {
  if (field.base_row != 0 || field.rows != spec.padded() || field.cols != spec.padded())
    throw ContractError("grid_from_field: field does not cover the grid");
  Grid g{spec, field.buf[which]};
  g.values.resize(spec.cell_count());
  return g;
}

KernelStats fused_kernel(FieldPair& field, int read, const StencilSpec& spec,
                         int steps, int tile, Rect region, Rect interior,
                         Rect owned, TransferLedger& ledger) {
  if (steps < 1) throw InvalidSpecError("fused_kernel: steps must be >= 1");
  if (tile < 1) throw InvalidSpecError("fused_kernel: tile must be >= 1");
  if (read != 0 && read != 1) throw ContractError("fused_kernel: bad read index");
  if (region.y0 < field.base_row || region.y1 > field.base_row + field.rows ||
      region.x0 < 0 || region.x1 > field.cols)
    throw ContractError("fused_kernel: region outside field storage");

  ledger.record(Counter::kernel_invocations, 1);
  KernelStats stats;
  if (region.area() == 0) return stats;

  const int r = spec.radius;
  const int e0 = r * steps;
  const int sy0 = field.base_row;
  const int sy1 = field.base_row + field.rows;
  const int cols = field.cols;
  const int write = 1 - read;

  const int tiles_y = (region.height() + tile - 1) / tile;
  const int tiles_x = (region.width() + tile - 1) / tile;

  std::uint64_t load_elems = 0, store_elems = 0, updates = 0;

#pragma omp parallel reduction(+ : load_elems, store_elems, updates)
  {
    const std::size_t cap =
        static_cast<std::size_t>(tile + 2 * e0) * (tile + 2 * e0);
    std::vector<float> scratch_a(cap), scratch_b(cap);

#pragma omp for collapse(2) schedule(static)
    for (int ty = 0; ty < tiles_y; ++ty) {
      for (int tx = 0; tx < tiles_x; ++tx) {
        const int oy0 = region.y0 + ty * tile;
        const int oy1 = std::min(oy0 + tile, region.y1);
        const int ox0 = region.x0 + tx * tile;
        const int ox1 = std::min(ox0 + tile, region.x1);

        // Scratch block: tile plus steps*r halo, clipped at storage.
        const int ly0 = std::max(oy0 - e0, sy0);
        const int ly1 = std::min(oy1 + e0, sy1);
        const int lx0 = std::max(ox0 - e0, 0);
        const int lx1 = std::min(ox1 + e0, cols);
        const int lw = lx1 - lx0;
        for (int y = ly0; y < ly1; ++y)
          std::memcpy(scratch_a.data() + static_cast<std::size_t>(y - ly0) * lw,
                      field.row(read, y) + lx0, static_cast<std::size_t>(lw) * sizeof(float));
        load_elems += static_cast<std::uint64_t>(ly1 - ly0) * lw;

        float* cur = scratch_a.data();
        float* nxt = scratch_b.data();
        for (int u = 1; u <= steps; ++u) {
          const int e = r * (steps - u);
          const int cy0 = std::max(oy0 - e, sy0);
          const int cy1 = std::min(oy1 + e, sy1);
          const int cx0 = std::max(ox0 - e, 0);
          const int cx1 = std::min(ox1 + e, cols);
          for (int y = cy0; y < cy1; ++y) {
            float* nrow = nxt + static_cast<std::size_t>(y - ly0) * lw;
            const float* crow = cur + static_cast<std::size_t>(y - ly0) * lw;
            if (y >= interior.y0 && y < interior.y1) {
              const int i0 = std::clamp(interior.x0, cx0, cx1);
              const int i1 = std::clamp(interior.x1, cx0, cx1);
              for (int x = cx0; x < i0; ++x) nrow[x - lx0] = crow[x - lx0];
              if (i1 > i0) {
                assert(y - r >= ly0 && y + r < ly1);
                assert(i0 - r >= lx0 && i1 + r <= lx1);
                stencil_row(nrow + (i0 - lx0), crow + (i0 - lx0), lw, i1 - i0, spec);
              }
              for (int x = i1; x < cx1; ++x) nrow[x - lx0] = crow[x - lx0];
            } else {
              std::memcpy(nrow + (cx0 - lx0), crow + (cx0 - lx0),
                          static_cast<std::size_t>(cx1 - cx0) * sizeof(float));
            }
          }
          const int ky0 = std::max(cy0, interior.y0);
          const int ky1 = std::min(cy1, interior.y1);
          if (ky1 > ky0)
            updates += static_cast<std::uint64_t>(ky1 - ky0) * (cx1 - cx0);
          std::swap(cur, nxt);
        }

        for (int y = oy0; y < oy1; ++y)
          std::memcpy(field.row(write, y) + ox0,
                      cur + static_cast<std::size_t>(y - ly0) * lw + (ox0 - lx0),
                      static_cast<std::size_t>(ox1 - ox0) * sizeof(float));
        store_elems += static_cast<std::uint64_t>(oy1 - oy0) * (ox1 - ox0);
      }
    }
  }

  // Unique useful cells: per step, the expanded region (a single coverage of
  // every computed cell) intersected with the owned rectangle.
  std::uint64_t owned_total = 0;
  for (int u = 1; u <= steps; ++u) {
    const int e = r * (steps - u);
    const int uy0 = std::max({region.y0 - e, interior.y0, sy0});
    const int uy1 = std::min({region.y1 + e, interior.y1, sy1});
    const int ux0 = std::max(region.x0 - e, 0);
    const int ux1 = std::min(region.x1 + e, cols);
    const int ry0 = std::max(uy0, owned.y0), ry1 = std::min(uy1, owned.y1);
    const int rx0 = std::max(ux0, owned.x0), rx1 = std::min(ux1, owned.x1);
    if (ry1 > ry0 && rx1 > rx0)
      owned_total += static_cast<std::uint64_t>(ry1 - ry0) * (rx1 - rx0);
  }

  stats.scratch_load = load_elems * sizeof(float);
  stats.scratch_store = store_elems * sizeof(float);
  stats.updates = updates;
  stats.redundant = updates - std::min(owned_total, updates);

  ledger.record(Counter::scratch_load, static_cast<std::int64_t>(stats.scratch_load));
  ledger.record(Counter::scratch_store, static_cast<std::int64_t>(stats.scratch_store));
  ledger.record(Counter::element_updates, static_cast<std::int64_t>(stats.updates));
  ledger.record(Counter::redundant_updates, static_cast<std::int64_t>(stats.redundant));
  return stats;
}

}  // namespace so2dr
