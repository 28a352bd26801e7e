#include "so2dr/planner.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace so2dr {

std::string to_string(Regime regime) {
  return regime == Regime::transfer_bound ? "transfer-bound" : "kernel-bound";
}

BottleneckPrediction predict_bottleneck_raw(const HardwareModel& hw,
                                            std::uint64_t d_chk_elems,
                                            std::uint64_t w_halo_elems, int s_tb) {
  hw.validate();
  BottleneckPrediction p;
  const double b = hw.b_elem;
  p.t_transfer = static_cast<double>(d_chk_elems) * b / hw.bw_intc;
  p.t_kernel = static_cast<double>(d_chk_elems + w_halo_elems * s_tb) * b *
               s_tb / hw.bw_dmem;
  p.regime = p.t_kernel > p.t_transfer ? Regime::kernel_bound : Regime::transfer_bound;
  return p;
}

BottleneckPrediction predict_bottleneck(const HardwareModel& hw,
                                        const RunConfig& config) {
  config.validate();
  return predict_bottleneck_raw(hw, config.d_chk(), config.w_halo(), config.s_tb);
}

FeasibilityReport feasible_configs(const HardwareModel& hw,
                                   const StencilSpec& stencil, int sz,
                                   const std::vector<std::pair<int, int>>& candidates,
                                   const PlannerOptions& opts) {
  hw.validate();
  stencil.validate();
  if (sz <= 0) throw InvalidSpecError("planner: sz must be positive");

  FeasibilityReport report;
  report.n_strm = opts.n_strm;
  report.n_a = opts.n_a;
  report.ratio_threshold = opts.ratio_threshold;

  const int r = stencil.radius;
  const std::uint64_t padded = static_cast<std::uint64_t>(sz) + 2 * r;
  const double b = hw.b_elem;

  for (const auto& [d, s_tb] : candidates) {
    FeasibilityEntry e;
    e.d = d;
    e.s_tb = s_tb;
    if (d < 1 || s_tb < 1 || sz % d != 0) {
      e.failed.push_back("valid (d, S_TB)");
      report.entries.push_back(std::move(e));
      continue;
    }
    const std::uint64_t d_chk = static_cast<std::uint64_t>(sz) * padded / d;
    const std::uint64_t halo_space = 2ull * r * padded * s_tb;  // W_halo*S_TB

    // Kernel time over one round must exceed the chunk transfer time, so
    // that transfers hide behind execution.
    const double t_kernel =
        static_cast<double>(d_chk + halo_space) * opts.n_a * b * s_tb / hw.bw_dmem;
    const double t_transfer =
        static_cast<double>(d_chk) * (opts.n_a - 1) * b / hw.bw_intc;
    if (!(t_kernel > t_transfer))
      e.failed.push_back("kernel time > transfer time");

    if ((d_chk + halo_space) * static_cast<std::uint64_t>(opts.n_strm) >
        hw.c_dmem / static_cast<std::uint64_t>(hw.b_elem))
      e.failed.push_back("(D_chk+W_halo*S_TB)*N_strm <= C_dmem/b_elem");

    if (halo_space > d_chk) e.failed.push_back("W_halo*S_TB <= D_chk");

    if (d <= opts.n_strm) e.failed.push_back("d > N_strm");

    e.halo_ratio = static_cast<double>(halo_space) / static_cast<double>(d_chk);
    e.degradation_risk = e.halo_ratio > opts.ratio_threshold;
    const BottleneckPrediction p = predict_bottleneck_raw(hw, d_chk, 2ull * r * padded, s_tb);
    e.t_transfer = p.t_transfer;
    e.t_kernel = p.t_kernel;
    e.regime = p.regime;
    e.feasible = e.failed.empty();
    report.entries.push_back(std::move(e));
  }
  return report;
}

TrafficEstimate analytic_traffic(const RunConfig& config, bool sharing) {
  plan_chunks(config);  // validates the geometry
  const std::uint64_t padded = config.padded();
  const std::uint64_t shared_rows =
      2ull * config.r * config.s_tb * (config.d - 1);
  TrafficEstimate t;
  t.htod = padded * padded + (sharing ? 0 : shared_rows * padded);
  t.dtoh = static_cast<std::uint64_t>(config.sz) * padded;
  t.ondevice = sharing ? 2 * shared_rows * padded : 0;
  return t;
}

std::uint64_t analytic_redundancy(const RunConfig& config, int steps) {
  plan_chunks(config);
  if (steps < 0 || steps > config.s_tb)
    throw std::out_of_range("analytic_redundancy: steps outside 0..S_TB");
  return static_cast<std::uint64_t>(config.d - 1) * config.r * steps *
         (steps - 1) * config.padded();
}

std::uint64_t analytic_redundancy(const RunConfig& config) {
  return analytic_redundancy(config, config.s_tb);
}

HardwareModel hardware_profile_from_json(const std::string& text,
                                         const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("hardware profile " + origin + ": " + e.what());
  }
  HardwareModel hw;
  try {
    hw.name = j.value("name", "unnamed");
    hw.c_dmem = j.at("c_dmem_bytes").get<std::uint64_t>();
    hw.bw_dmem = j.at("bw_dmem_bytes_per_s").get<double>();
    hw.bw_intc = j.at("bw_intc_bytes_per_s").get<double>();
    hw.b_elem = j.value("b_elem", 4);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("hardware profile " + origin + ": " + e.what());
  }
  hw.validate();
  return hw;
}

HardwareModel load_hardware_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open hardware profile " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hardware_profile_from_json(ss.str(), path);
}

}  // namespace so2dr
