#include "so2dr/layout.hpp"

namespace so2dr {

void HardwareModel::validate() const {
  if (c_dmem == 0) throw InvalidSpecError("hardware: c_dmem must be positive");
  if (!(bw_dmem > 0.0) || !(bw_intc > 0.0))
    throw InvalidSpecError("hardware: bandwidths must be positive");
  if (b_elem <= 0) throw InvalidSpecError("hardware: b_elem must be positive");
}

HardwareModel default_hardware() {
  HardwareModel hw;
  hw.name = "rtx3080-desktop";
  hw.c_dmem = 10737418240ull;     // 10 GiB
  hw.bw_dmem = 760.0e9;           // device-memory bandwidth
  hw.bw_intc = 15.75e9;           // PCIe gen3 x16
  hw.b_elem = 4;
  return hw;
}

HardwareModel desk_hardware() {
  HardwareModel hw;
  hw.name = "desk-sim";
  hw.c_dmem = 2147483648ull;  // 2 GiB
  hw.bw_dmem = 40.0e9;
  hw.bw_intc = 16.0e9;
  hw.b_elem = 4;
  return hw;
}

void RunConfig::validate() const {
  if (sz <= 0) throw InvalidSpecError("config: sz must be positive");
  if (r < 1) throw InvalidSpecError("config: r must be positive");
  if (d < 1) throw InvalidSpecError("config: d must be at least 1");
  if (sz % d != 0)
    throw InvalidSpecError("config: sz (" + std::to_string(sz) +
                           ") must be divisible by d (" + std::to_string(d) + ")");
  if (s_tb < 1) throw InvalidSpecError("config: s_tb must be at least 1");
  if (k_on < 1 || k_on > s_tb)
    throw InvalidSpecError("config: k_on must satisfy 1 <= k_on <= s_tb");
  if (n_strm < 1) throw InvalidSpecError("config: n_strm must be at least 1");
  if (n < 0) throw InvalidSpecError("config: n must be non-negative");
  if (n_a < 1) throw InvalidSpecError("config: n_a must be at least 1");
}

ChunkLayout plan_chunks(const RunConfig& config) {
  config.validate();
  const int sz = config.sz, r = config.r, d = config.d, s = config.s_tb;
  const int halo = r * s;
  if (2 * halo > sz / d)
    throw InfeasibleError("W_halo*S_TB <= D_chk",
                          "shared regions would overlap: 2*r*S_TB = " +
                              std::to_string(2 * halo) + " > sz/d = " +
                              std::to_string(sz / d));

  ChunkLayout layout;
  layout.sz = sz;
  layout.r = r;
  layout.d = d;
  layout.s_tb = s;
  const int core_h = sz / d;
  layout.fence.resize(d + 1);
  for (int i = 0; i <= d; ++i) layout.fence[i] = r + i * core_h;

  const int top = sz + 2 * r;
  layout.chunks.resize(d);
  for (int i = 0; i < d; ++i) {
    ChunkIntervals& c = layout.chunks[i];
    const int lo = layout.fence[i], hi = layout.fence[i + 1];
    c.core = {lo, hi};
    c.working = {i == 0 ? 0 : lo - halo, i == d - 1 ? top : hi + halo};
    c.transfer = {i == 0 ? 0 : lo + halo, i == d - 1 ? top : hi + halo};
    c.shared_in = i == 0 ? RowInterval{lo, lo} : RowInterval{lo - halo, lo + halo};
    c.shared_out = i == d - 1 ? RowInterval{hi, hi} : RowInterval{hi - halo, hi + halo};
  }
  return layout;
}

RowInterval compute_area(const ChunkLayout& layout, int chunk, int t,
                         int round_steps) {
  if (chunk < 0 || chunk >= layout.d)
    throw std::out_of_range("compute_area: chunk index out of range");
  if (round_steps < 1 || round_steps > layout.s_tb)
    throw std::out_of_range("compute_area: round_steps out of range");
  if (t < 1 || t > round_steps)
    throw std::out_of_range("compute_area: step " + std::to_string(t) +
                            " outside 1.." + std::to_string(round_steps));
  const int grow = layout.r * (round_steps - t);
  const int lo = layout.fence[chunk], hi = layout.fence[chunk + 1];
  return {chunk == 0 ? layout.r : lo - grow,
          chunk == layout.d - 1 ? layout.r + layout.sz : hi + grow};
}

RowInterval compute_area(const ChunkLayout& layout, int chunk, int t) {
  return compute_area(layout, chunk, t, layout.s_tb);
}

int RoundPlan::steps_in_round(int round) const {
  if (round < 0 || round >= rounds)
    throw std::out_of_range("round index out of range");
  if (round == rounds - 1 && n % s_tb != 0) return n % s_tb;
  return s_tb;
}

int RoundPlan::calls_in_round(int round) const {
  const int k = steps_in_round(round);
  return (k + k_on - 1) / k_on;
}

int RoundPlan::steps_in_call(int round, int call) const {
  const int k = steps_in_round(round);
  const int calls = (k + k_on - 1) / k_on;
  if (call < 0 || call >= calls)
    throw std::out_of_range("kernel-call index out of range");
  if (call == calls - 1 && k % k_on != 0) return k % k_on;
  return k_on;
}

RoundPlan make_round_plan(const RunConfig& config) {
  config.validate();
  RoundPlan plan;
  plan.n = config.n;
  plan.s_tb = config.s_tb;
  plan.k_on = config.k_on;
  plan.rounds = (config.n + config.s_tb - 1) / config.s_tb;
  return plan;
}

}  // namespace so2dr
