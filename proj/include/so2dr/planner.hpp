#ifndef SO2DR_PLANNER_HPP
#define SO2DR_PLANNER_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "so2dr/layout.hpp"

namespace so2dr {

enum class Regime { transfer_bound, kernel_bound };
std::string to_string(Regime regime);

/// Modeled per-round times for one chunk under the bandwidth model:
/// t_transfer = D_chk*b/BW_intc, t_kernel = (D_chk+W_halo*S_TB)*b*S_TB/BW_dmem.
/// Ties classify as transfer-bound.
struct BottleneckPrediction {
  double t_transfer = 0.0;
  double t_kernel = 0.0;
  Regime regime = Regime::transfer_bound;
};

BottleneckPrediction predict_bottleneck(const HardwareModel& hw,
                                        const RunConfig& config);
/// Raw form for model exploration (element counts supplied directly).
BottleneckPrediction predict_bottleneck_raw(const HardwareModel& hw,
                                            std::uint64_t d_chk_elems,
                                            std::uint64_t w_halo_elems, int s_tb);

/// Feasibility of one (d, S_TB) candidate against the run-time heuristic.
struct FeasibilityEntry {
  int d = 0;
  int s_tb = 0;
  bool feasible = false;
  std::vector<std::string> failed;  // names of violated constraints
  double halo_ratio = 0.0;          // W_halo*S_TB / D_chk
  bool degradation_risk = false;    // halo_ratio above threshold
  double t_transfer = 0.0;
  double t_kernel = 0.0;
  Regime regime = Regime::transfer_bound;
};

struct FeasibilityReport {
  int n_strm = 3;
  int n_a = 2;
  double ratio_threshold = 0.20;
  std::vector<FeasibilityEntry> entries;
};

struct PlannerOptions {
  int n_strm = 3;  // fixed at three: two transfer directions + kernels
  int n_a = 2;     // ping-pong input/output arrays
  double ratio_threshold = 0.20;
};

/// Evaluates each (d, S_TB) candidate: the execution/transfer-time ratio
/// inequality, the device-memory constraint, the halo-space constraint
/// (W_halo*S_TB <= D_chk) and d > N_strm. Candidates above the halo-ratio
/// threshold are flagged but not rejected.
FeasibilityReport feasible_configs(const HardwareModel& hw,
                                   const StencilSpec& stencil, int sz,
                                   const std::vector<std::pair<int, int>>& candidates,
                                   const PlannerOptions& opts = {});

/// Closed-form per-round interconnect/on-device traffic in elements.
struct TrafficEstimate {
  std::uint64_t htod = 0;      // host->device elements per round
  std::uint64_t dtoh = 0;      // device->host elements per round
  std::uint64_t ondevice = 0;  // region-share writes+reads per round
};

/// With sharing: HtoD = (sz+2r)^2; without: plus 2*r*S_TB*(d-1)*(sz+2r).
/// DtoH = sz*(sz+2r) either way. Requires a valid geometry (plan_chunks).
TrafficEstimate analytic_traffic(const RunConfig& config, bool sharing);

/// Redundant element updates in one round advancing `steps` steps:
/// (d-1) * r * steps*(steps-1) * (sz+2r). Residual rounds pass k'_off.
std::uint64_t analytic_redundancy(const RunConfig& config, int steps);
/// Full round (steps = S_TB).
std::uint64_t analytic_redundancy(const RunConfig& config);

/// Loads a {name, c_dmem_bytes, bw_dmem_bytes_per_s, bw_intc_bytes_per_s,
/// b_elem} JSON document.
HardwareModel load_hardware_profile(const std::string& path);
HardwareModel hardware_profile_from_json(const std::string& text,
                                         const std::string& origin);

}  // namespace so2dr

#endif  // SO2DR_PLANNER_HPP
