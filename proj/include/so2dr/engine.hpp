#ifndef SO2DR_ENGINE_HPP
#define SO2DR_ENGINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "so2dr/kernels.hpp"
#include "so2dr/layout.hpp"
#include "so2dr/memsim.hpp"
#include "so2dr/planner.hpp"
#include "so2dr/stencil.hpp"

namespace so2dr {

enum class EngineMode { so2dr, resreu, incore };
std::string to_string(EngineMode mode);
EngineMode engine_mode_from_string(const std::string& s);

/// Fused-kernel shape: how many steps each kernel advances and the tile edge
/// of its scratch analog.
struct KernelPlan {
  int k_on = 4;
  int tile = 32;
  std::uint64_t scratch_budget = 192 * 1024;  // per worker, bytes

  /// Scratch footprint of an s-step kernel: two (tile + 2*r*s)^2 blocks.
  std::uint64_t scratch_footprint(int radius, int steps) const {
    const std::uint64_t edge = static_cast<std::uint64_t>(tile) + 2ull * radius * steps;
    return 2 * edge * edge * sizeof(float);
  }
  void validate(int radius) const;
};

enum class Stage { htod, share_read, share_write, kernel, dtoh };
std::string to_string(Stage stage);

struct DiagRow {
  int round = 0;
  int chunk = 0;
  Stage stage = Stage::htod;
  std::uint64_t bytes = 0;
  std::uint64_t updates = 0;
};

struct RunReport {
  EngineMode mode = EngineMode::so2dr;
  RunConfig config;  // effective values (resreu forces k_on=1, incore d=1)
  KernelPlan kernel;
  std::string stencil_name;
  std::uint64_t checksum = 0;
  LedgerSnapshot ledger;
  TimeBreakdown times;
  std::uint64_t arena_peak = 0;
  std::uint64_t arena_capacity = 0;
  bool transfer_time_excluded = false;
  double wall_seconds = 0.0;
  std::vector<DiagRow> diagnostics;
};

/// Test-build fault injection: zero the data published for one boundary.
struct EngineHooks {
  bool corrupt_share = false;
  int boundary = 0;
};

struct RunResult {
  Grid grid;
  RunReport report;
};

/// Executes `config.n` stencil steps over the simulated hierarchy.
///   - so2dr: round-based streaming, region sharing once per round, k_on-step
///     fused kernels over shrinking trapezoids (redundant overlap compute).
///   - resreu: round-based streaming with skewed chunk ownership; single-step
///     kernels exchanging 2r-row results per time state (zero redundancy).
///   - incore: whole grid resident, fused kernels, one transfer each way.
/// The returned grid is bit-identical to run_reference(grid, spec, config.n).
RunResult run_engine(EngineMode mode, const Grid& grid, const StencilSpec& spec,
                     RunConfig config, KernelPlan kernel, const HardwareModel& hw,
                     const EngineHooks& hooks = {});

/// Device-memory footprint the out-of-core so2dr mode allocates:
/// (D_chk + W_halo*S_TB)*N_strm*b_elem + share slots + per-stream scratch.
std::uint64_t so2dr_arena_bytes(const RunConfig& config, const KernelPlan& kernel);

}  // namespace so2dr

#endif  // SO2DR_ENGINE_HPP
