#ifndef SO2DR_LAYOUT_HPP
#define SO2DR_LAYOUT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "so2dr/stencil.hpp"

namespace so2dr {

/// Machine parameters the analytic models run against.
struct HardwareModel {
  std::string name = "unnamed";
  std::uint64_t c_dmem = 0;  // device-memory capacity, bytes
  double bw_dmem = 0.0;      // device-memory bandwidth, bytes/s
  double bw_intc = 0.0;      // CPU<->device interconnect bandwidth, bytes/s
  int b_elem = 4;            // bytes per array element

  void validate() const;
};

/// Built-in profile for the shipped reference machine (matches
/// profiles/rtx3080.json).
HardwareModel default_hardware();

/// Desk-scale model operating point (matches profiles/desk.json). Desk grids
/// cannot reach the large S_TB of the reference machine, so this profile
/// narrows the bandwidth gap to keep runs kernel-bound at desk scale.
HardwareModel desk_hardware();

/// All run-time knobs of one out-of-core execution.
struct RunConfig {
  int sz = 0;      // interior edge length
  int r = 1;       // stencil radius
  int d = 1;       // chunk count
  int s_tb = 1;    // off-chip TB steps per round (k_off)
  int k_on = 1;    // steps fused per kernel
  int n_strm = 3;  // operation-stream count
  int n = 0;       // total time steps
  int n_a = 2;     // array count used by the analytic model

  void validate() const;
  std::uint64_t padded() const { return static_cast<std::uint64_t>(sz) + 2 * r; }
  /// Chunk size in elements: sz*(sz+2r)/d.
  std::uint64_t d_chk() const {
    return static_cast<std::uint64_t>(sz) * padded() / d;
  }
  /// Halo working-space per TB step in elements: 2r*(sz+2r).
  std::uint64_t w_halo() const { return 2ull * r * padded(); }
};

/// Row geometry of one chunk. All intervals use padded row coordinates.
struct ChunkIntervals {
  RowInterval core;        // owned interior rows
  RowInterval working;     // rows resident on the device
  RowInterval transfer;    // rows moved over the interconnect each round
  RowInterval shared_in;   // rows received from chunk i-1 (empty for chunk 0)
  RowInterval shared_out;  // rows left for chunk i+1 (empty for chunk d-1)
};

/// Full decomposition geometry for one (sz, r, d, S_TB).
struct ChunkLayout {
  int sz = 0, r = 0, d = 0, s_tb = 0;
  std::vector<int> fence;  // d+1 core fenceposts c_0..c_d
  std::vector<ChunkIntervals> chunks;

  int padded() const { return sz + 2 * r; }
};

/// Builds the chunk geometry. Throws InfeasibleError when shared regions
/// would overlap (2*r*S_TB > sz/d) and InvalidSpecError on malformed input.
ChunkLayout plan_chunks(const RunConfig& config);

/// Compute area of `chunk` at step t (1-based) of a round advancing
/// `round_steps` steps: the core grown by r*(round_steps - t) on each
/// inter-chunk side, clipped at the interior edges (global-boundary sides
/// never shrink). At t == round_steps this is exactly the core.
RowInterval compute_area(const ChunkLayout& layout, int chunk, int t,
                         int round_steps);
/// Same with round_steps = layout.s_tb (a full round).
RowInterval compute_area(const ChunkLayout& layout, int chunk, int t);

/// Round structure of a run: N_t rounds of S_TB steps with a residual last
/// round, each round split into k_on-step kernel calls plus a residual call.
struct RoundPlan {
  int n = 0, s_tb = 1, k_on = 1;
  int rounds = 0;  // ceil(n / s_tb)

  int steps_in_round(int round) const;    // k'_off
  int calls_in_round(int round) const;    // ceil(k'_off / k_on)
  int steps_in_call(int round, int call) const;
};

RoundPlan make_round_plan(const RunConfig& config);

}  // namespace so2dr

#endif  // SO2DR_LAYOUT_HPP
