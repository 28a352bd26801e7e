#ifndef SO2DR_SPECFILE_HPP
#define SO2DR_SPECFILE_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "so2dr/engine.hpp"

namespace so2dr {

/// Parsed run description: stencil, grid, mode, run parameters, optional
/// hardware profile reference and output paths.
struct RunSpecFile {
  StencilSpec stencil;
  std::uint64_t seed = 0;
  EngineMode mode = EngineMode::so2dr;
  RunConfig config;
  KernelPlan kernel;
  std::optional<std::string> hardware_path;
  std::optional<std::string> grid_dump_path;
};

/// Parses a spec file. Syntax errors report line:column; semantic errors name
/// the offending field.
RunSpecFile parse_spec_file(const std::string& path);
RunSpecFile parse_spec_json(const std::string& text, const std::string& origin);

}  // namespace so2dr

#endif  // SO2DR_SPECFILE_HPP
