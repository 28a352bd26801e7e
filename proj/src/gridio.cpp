#include "so2dr/gridio.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace so2dr {

static_assert(std::endian::native == std::endian::little,
              "grid dumps are little-endian; add byte swapping for this target");

namespace {
constexpr char kMagic[4] = {'S', 'O', '2', 'D'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 16;  // magic, version, sz, r, reserved

template <typename T>
void put(unsigned char* dst, T v) {
  std::memcpy(dst, &v, sizeof(T));
}
template <typename T>
T get(const unsigned char* src) {
  T v;
  std::memcpy(&v, src, sizeof(T));
  return v;
}
}  // namespace

void dump_grid(const Grid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  unsigned char h[kHeaderBytes] = {};
  std::memcpy(h, kMagic, 4);
  put<std::uint16_t>(h + 4, kVersion);
  put<std::uint32_t>(h + 6, static_cast<std::uint32_t>(grid.spec.sz));
  put<std::uint16_t>(h + 10, static_cast<std::uint16_t>(grid.spec.r));
  put<std::uint32_t>(h + 12, 0);  // reserved
  out.write(reinterpret_cast<const char*>(h), kHeaderBytes);
  out.write(reinterpret_cast<const char*>(grid.values.data()),
            static_cast<std::streamsize>(grid.values.size() * sizeof(float)));
  if (!out) throw IoError("short write to " + path);
}

Grid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  unsigned char h[kHeaderBytes] = {};
  in.read(reinterpret_cast<char*>(h), kHeaderBytes);
  if (!in || std::memcmp(h, kMagic, 4) != 0)
    throw IoError(path + ": not a grid dump (bad magic)");
  const std::uint16_t version = get<std::uint16_t>(h + 4);
  if (version != kVersion)
    throw IoError(path + ": unsupported version " + std::to_string(version));
  GridSpec spec{static_cast<int>(get<std::uint32_t>(h + 6)),
                static_cast<int>(get<std::uint16_t>(h + 10))};
  Grid g{spec, std::vector<float>(spec.cell_count())};
  in.read(reinterpret_cast<char*>(g.values.data()),
          static_cast<std::streamsize>(g.values.size() * sizeof(float)));
  if (!in) throw IoError(path + ": truncated grid data");
  return g;
}

}  // namespace so2dr
