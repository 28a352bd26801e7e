#ifndef SO2DR_GRIDIO_HPP
#define SO2DR_GRIDIO_HPP

#include <string>

#include "so2dr/stencil.hpp"

namespace so2dr {

/// Binary grid dump: 16-byte header (magic "SO2D", version u16, sz u32,
/// r u16, reserved u32) followed by (sz+2r)^2 little-endian f32, row-major.
void dump_grid(const Grid& grid, const std::string& path);
Grid load_grid(const std::string& path);

}  // namespace so2dr

#endif  // SO2DR_GRIDIO_HPP
