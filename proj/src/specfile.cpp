#include "so2dr/specfile.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace so2dr {

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <typename T>
T require(const nlohmann::json& j, const std::string& path, const char* key,
          const std::string& origin) {
  const std::string name = path.empty() ? key : path + "." + key;
  if (!j.contains(key)) throw IoError(origin + ": missing field " + name);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw IoError(origin + ": field " + name + " has the wrong type");
  }
}

}  // namespace

RunSpecFile parse_spec_json(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(origin + ": JSON parse error at " + line_col(text, e.byte) +
                  ": " + e.what());
  }

  RunSpecFile spec;
  if (!j.contains("stencil")) throw IoError(origin + ": missing field stencil");
  const auto& st = j.at("stencil");
  const std::string kind = require<std::string>(st, "stencil", "kind", origin);
  const int radius = require<int>(st, "stencil", "radius", origin);
  spec.stencil = stencil_kind_from_string(kind) == StencilKind::box
                     ? StencilSpec::box(radius)
                     : StencilSpec::gradient();
  if (spec.stencil.radius != radius)
    throw IoError(origin + ": stencil.radius " + std::to_string(radius) +
                  " invalid for kind \"" + kind + "\"");

  if (!j.contains("grid")) throw IoError(origin + ": missing field grid");
  const auto& g = j.at("grid");
  spec.config.sz = require<int>(g, "grid", "sz", origin);
  spec.seed = require<std::uint64_t>(g, "grid", "seed", origin);

  spec.mode = engine_mode_from_string(require<std::string>(j, "", "mode", origin));

  if (!j.contains("config")) throw IoError(origin + ": missing field config");
  const auto& c = j.at("config");
  spec.config.r = spec.stencil.radius;
  spec.config.d = require<int>(c, "config", "d", origin);
  spec.config.s_tb = require<int>(c, "config", "s_tb", origin);
  spec.config.k_on = require<int>(c, "config", "k_on", origin);
  spec.config.n_strm = require<int>(c, "config", "n_strm", origin);
  spec.config.n = require<int>(c, "config", "n", origin);
  spec.config.n_a = c.value("n_a", 2);
  spec.kernel.k_on = spec.config.k_on;

  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    spec.kernel.tile = k.value("tile", spec.kernel.tile);
    spec.kernel.scratch_budget = k.value("scratch_budget", spec.kernel.scratch_budget);
  }
  if (j.contains("hardware")) spec.hardware_path = j.at("hardware").get<std::string>();
  if (j.contains("output") && j.at("output").contains("grid_dump"))
    spec.grid_dump_path = j.at("output").at("grid_dump").get<std::string>();

  try {
    spec.config.validate();
  } catch (const InvalidSpecError& e) {
    throw IoError(origin + ": " + e.what());
  }
  return spec;
}

RunSpecFile parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec_json(ss.str(), path);
}

}  // namespace so2dr
