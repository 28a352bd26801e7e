#ifndef SO2DR_VERIFY_HPP
#define SO2DR_VERIFY_HPP

#include <optional>
#include <string>
#include <vector>

#include "so2dr/engine.hpp"

namespace so2dr {

/// End-of-run counter values implied by the run geometry, accumulated round
/// by round (residual rounds share fewer states in skewed mode and shrink the
/// redundancy term). scratch counters are not predicted here.
struct ExpectedLedger {
  std::uint64_t htod = 0;
  std::uint64_t dtoh = 0;
  std::uint64_t ondevice = 0;
  std::uint64_t kernel_invocations = 0;
  std::uint64_t rounds = 0;
  std::uint64_t redundant_updates = 0;  // chunk-level closed form
  bool redundancy_exact = false;        // true when tiles cover whole regions
};

ExpectedLedger expected_ledger(EngineMode mode, const RunConfig& config,
                               const KernelPlan& kernel);

struct VerifyCheck {
  std::string name;
  std::string expected;
  std::string actual;
  bool pass = false;
};

struct FirstDiff {
  int y = 0, x = 0;
  float want = 0.0f, got = 0.0f;
};

struct VerifyResult {
  bool pass = false;
  std::vector<VerifyCheck> checks;
  std::optional<FirstDiff> first_diff;
  RunReport report;
};

/// Runs `mode` and the serial reference on the same inputs, compares the
/// grids bit-exactly and the ledger against the closed forms.
VerifyResult verify_run(EngineMode mode, const StencilSpec& spec,
                        const Grid& grid, const RunConfig& config,
                        const KernelPlan& kernel, const HardwareModel& hw,
                        const EngineHooks& hooks = {});

}  // namespace so2dr

#endif  // SO2DR_VERIFY_HPP
