#include "so2dr/verify.hpp"

#include <bit>

namespace so2dr {

ExpectedLedger expected_ledger(EngineMode mode, const RunConfig& config,
                               const KernelPlan& kernel) {
  RunConfig cfg = config;
  KernelPlan kp = kernel;
  if (mode == EngineMode::resreu) {
    cfg.k_on = 1;
    kp.k_on = 1;
  }
  if (mode == EngineMode::incore) cfg.d = 1;
  cfg.validate();

  const std::uint64_t b = GridSpec::b_elem;
  const std::uint64_t padded = cfg.padded();
  const std::uint64_t row_bytes = padded * b;

  ExpectedLedger e;
  if (mode == EngineMode::incore) {
    e.htod = padded * row_bytes;
    e.dtoh = static_cast<std::uint64_t>(cfg.sz) * row_bytes;
    e.ondevice = 0;
    e.kernel_invocations =
        (static_cast<std::uint64_t>(cfg.n) + kp.k_on - 1) / kp.k_on;
    e.rounds = 1;
    e.redundant_updates = 0;
    e.redundancy_exact = kp.tile >= static_cast<int>(padded);
    return e;
  }

  const RoundPlan rp = make_round_plan(cfg);
  const std::uint64_t boundaries = cfg.d - 1;
  for (int round = 0; round < rp.rounds; ++round) {
    const std::uint64_t k_eff = rp.steps_in_round(round);
    e.htod += padded * row_bytes;
    e.dtoh += static_cast<std::uint64_t>(cfg.sz) * row_bytes;
    if (mode == EngineMode::so2dr) {
      // Static 2*r*S_TB slabs, written and read once per boundary.
      e.ondevice += 2 * boundaries * (2ull * cfg.r * cfg.s_tb) * row_bytes;
      e.kernel_invocations +=
          static_cast<std::uint64_t>(cfg.d) * rp.calls_in_round(round);
      e.redundant_updates += boundaries * cfg.r * k_eff * (k_eff - 1) * padded;
    } else {
      // One 2r-row exchange per boundary per time state.
      e.ondevice += 2 * boundaries * (2ull * cfg.r) * k_eff * row_bytes;
      e.kernel_invocations += static_cast<std::uint64_t>(cfg.d) * k_eff;
    }
  }
  e.rounds = rp.rounds;
  // A tile at least as large as the padded width covers every kernel region
  // in one piece, so the counter holds exactly the chunk-level overlap.
  e.redundancy_exact =
      mode == EngineMode::resreu || kp.tile >= static_cast<int>(padded);
  return e;
}

static void check_eq(std::vector<VerifyCheck>& checks, const std::string& name,
                     std::uint64_t expected, std::uint64_t actual) {
  checks.push_back({name, std::to_string(expected), std::to_string(actual),
                    expected == actual});
}

VerifyResult verify_run(EngineMode mode, const StencilSpec& spec,
                        const Grid& grid, const RunConfig& config,
                        const KernelPlan& kernel, const HardwareModel& hw,
                        const EngineHooks& hooks) {
  VerifyResult result;
  RunResult run = run_engine(mode, grid, spec, config, kernel, hw, hooks);
  const Grid reference = run_reference(grid, spec, config.n);

  // Bit-exact grid comparison, row-major scan for the first differing cell.
  {
    bool same = run.grid.values.size() == reference.values.size();
    std::optional<FirstDiff> diff;
    const int padded = grid.spec.padded();
    for (std::size_t idx = 0; same && idx < reference.values.size(); ++idx) {
      const std::uint32_t a = std::bit_cast<std::uint32_t>(reference.values[idx]);
      const std::uint32_t b = std::bit_cast<std::uint32_t>(run.grid.values[idx]);
      if (a != b) {
        diff = FirstDiff{static_cast<int>(idx / padded), static_cast<int>(idx % padded),
                         reference.values[idx], run.grid.values[idx]};
        same = false;
      }
    }
    VerifyCheck check{"grid bit-equal to reference", "0 differing cells", "", same};
    if (diff) {
      check.actual = "first diff at (" + std::to_string(diff->y) + "," +
                     std::to_string(diff->x) + ")";
      result.first_diff = diff;
    } else {
      check.actual = "0 differing cells";
    }
    result.checks.push_back(std::move(check));
  }

  const ExpectedLedger want = expected_ledger(mode, config, kernel);
  const LedgerSnapshot& got = run.report.ledger;
  check_eq(result.checks, "htod_bytes", want.htod, got.htod);
  check_eq(result.checks, "dtoh_bytes", want.dtoh, got.dtoh);
  check_eq(result.checks, "ondevice_bytes", want.ondevice, got.ondevice);
  check_eq(result.checks, "kernel_invocations", want.kernel_invocations,
           got.kernel_invocations);
  check_eq(result.checks, "rounds", want.rounds, got.rounds);
  if (want.redundancy_exact) {
    check_eq(result.checks, "redundant_updates", want.redundant_updates,
             got.redundant_updates);
  } else {
    result.checks.push_back({"redundant_updates (tile recompute included)",
                             ">= " + std::to_string(want.redundant_updates),
                             std::to_string(got.redundant_updates),
                             got.redundant_updates >= want.redundant_updates});
  }
  result.checks.push_back({"ledger audit", "redundant <= updates",
                           got.redundant_updates <= got.element_updates ? "ok" : "violated",
                           got.redundant_updates <= got.element_updates});

  result.pass = true;
  for (const VerifyCheck& c : result.checks) result.pass = result.pass && c.pass;
  result.report = std::move(run.report);
  return result;
}

}  // namespace so2dr
