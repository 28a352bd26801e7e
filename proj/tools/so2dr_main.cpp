// Command-line front end: run / verify / plan / bench over the simulated
// CPU<->device hierarchy.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "so2dr/engine.hpp"
#include "so2dr/gridio.hpp"
#include "so2dr/report.hpp"
#include "so2dr/specfile.hpp"
#include "so2dr/verify.hpp"

namespace {

using namespace so2dr;

constexpr int kExitMismatch = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitDeviceOom = 3;

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> table = [] {
    std::map<std::string, std::string> t;
    auto desk = [](const std::string& kind, int radius) {
      std::ostringstream s;
      s << "{\n"
        << "  \"stencil\": {\"kind\": \"" << kind << "\", \"radius\": " << radius
        << "},\n"
        << "  \"grid\": {\"sz\": 512, \"seed\": 42},\n"
        << "  \"mode\": \"so2dr\",\n"
        << "  \"config\": {\"d\": 4, \"s_tb\": 16, \"k_on\": 4, \"n_strm\": 3, "
           "\"n\": 64, \"n_a\": 2}\n"
        << "}\n";
      return s.str();
    };
    auto paper = [](const std::string& kind, int radius, int s_tb) {
      std::ostringstream s;
      s << "{\n"
        << "  \"stencil\": {\"kind\": \"" << kind << "\", \"radius\": " << radius
        << "},\n"
        << "  \"grid\": {\"sz\": 38400, \"seed\": 7},\n"
        << "  \"mode\": \"so2dr\",\n"
        << "  \"config\": {\"d\": 4, \"s_tb\": " << s_tb
        << ", \"k_on\": 4, \"n_strm\": 3, \"n\": 640, \"n_a\": 2}\n"
        << "}\n";
      return s.str();
    };
    t["box2d1r-desk"] = desk("box", 1);
    t["box2d2r-desk"] = desk("box", 2);
    t["box2d3r-desk"] = desk("box", 3);
    t["box2d4r-desk"] = desk("box", 4);
    t["gradient2d-desk"] = desk("gradient", 1);
    t["box2d1r-paper"] = paper("box", 1, 160);
    t["box2d2r-paper"] = paper("box", 2, 160);
    t["box2d3r-paper"] = paper("box", 3, 80);
    t["box2d4r-paper"] = paper("box", 4, 40);
    t["gradient2d-paper"] = paper("gradient", 1, 160);
    return t;
  }();
  return table;
}

struct CommonOpts {
  std::string spec_path;
  std::string preset;
  std::string mode_override;
  std::string hardware_path;
  std::string out_dir = ".";
  std::string golden_path;  // verify only
  bool deterministic = false;
  bool corrupt_share = false;
  std::uint64_t host_budget = 4ull << 30;
};

RunSpecFile load_spec(const CommonOpts& opts) {
  if (!opts.preset.empty()) {
    auto it = presets().find(opts.preset);
    if (it == presets().end())
      throw InvalidSpecError("unknown preset \"" + opts.preset + "\"");
    return parse_spec_json(it->second, "preset " + opts.preset);
  }
  if (opts.spec_path.empty())
    throw InvalidSpecError("no spec file given (pass a path or --preset)");
  return parse_spec_file(opts.spec_path);
}

HardwareModel resolve_hardware(const CommonOpts& opts, const RunSpecFile& spec) {
  if (!opts.hardware_path.empty()) return load_hardware_profile(opts.hardware_path);
  if (spec.hardware_path) return load_hardware_profile(*spec.hardware_path);
  return default_hardware();
}

/// Planner gate applied before executing out-of-core modes. The throughput
/// heuristic is advisory; only hard constraints block a run.
void gate_run(const RunSpecFile& spec) {
  if (spec.mode == EngineMode::incore) return;
  if (spec.config.d <= spec.config.n_strm)
    throw InfeasibleError("d > N_strm",
                          "d = " + std::to_string(spec.config.d) +
                              ", N_strm = " + std::to_string(spec.config.n_strm));
  plan_chunks(spec.config);  // infeasible geometry throws here
}

void check_host_budget(const RunSpecFile& spec, std::uint64_t budget) {
  const std::uint64_t padded = spec.config.padded();
  // host grid, reference/result copy, and stream buffers round up to ~4 grids
  const std::uint64_t estimate = 4 * padded * padded * GridSpec::b_elem;
  if (estimate > budget)
    throw InfeasibleError(
        "host footprint <= host budget",
        "sz = " + std::to_string(spec.config.sz) + " needs about " +
            std::to_string(estimate) + " bytes; budget " + std::to_string(budget) +
            " (use `plan` for paper-scale grids or raise --host-budget)");
}

EngineHooks hooks_from(const CommonOpts& opts) {
  EngineHooks hooks;
#ifdef SO2DR_FAULT_HOOKS
  hooks.corrupt_share = opts.corrupt_share;
#else
  (void)opts;
#endif
  return hooks;
}

void write_run_outputs(const CommonOpts& opts, const RunSpecFile& spec,
                       const RunResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);
  write_text_file((out / "report.json").string(),
                  report_to_json(result.report, opts.deterministic));
  write_text_file((out / "ledger.csv").string(), ledger_to_csv(result.report.ledger));
  write_text_file((out / "diagnostics.csv").string(),
                  diagnostics_to_csv(result.report.diagnostics));
  if (spec.grid_dump_path) dump_grid(result.grid, (out / *spec.grid_dump_path).string());
}

int cmd_run(const CommonOpts& opts) {
  RunSpecFile spec = load_spec(opts);
  if (!opts.mode_override.empty())
    spec.mode = engine_mode_from_string(opts.mode_override);
  const HardwareModel hw = resolve_hardware(opts, spec);
  check_host_budget(spec, opts.host_budget);
  gate_run(spec);

  const Grid grid = init_grid({spec.config.sz, spec.config.r}, spec.seed);
  RunResult result = run_engine(spec.mode, grid, spec.stencil, spec.config,
                                spec.kernel, hw, hooks_from(opts));
  write_run_outputs(opts, spec, result);
  std::printf("mode=%s stencil=%s rounds=%llu checksum=%016llx\n",
              to_string(result.report.mode).c_str(),
              result.report.stencil_name.c_str(),
              static_cast<unsigned long long>(result.report.ledger.rounds),
              static_cast<unsigned long long>(result.report.checksum));
  return 0;
}

int cmd_verify(const CommonOpts& opts) {
  RunSpecFile spec = load_spec(opts);
  if (!opts.mode_override.empty())
    spec.mode = engine_mode_from_string(opts.mode_override);
  const HardwareModel hw = resolve_hardware(opts, spec);
  check_host_budget(spec, opts.host_budget);
  gate_run(spec);

  const Grid grid = init_grid({spec.config.sz, spec.config.r}, spec.seed);
  VerifyResult result = verify_run(spec.mode, spec.stencil, grid, spec.config,
                                   spec.kernel, hw, hooks_from(opts));

  if (!opts.golden_path.empty()) {
    const Grid golden = load_grid(opts.golden_path);
    const Grid replay = run_reference(grid, spec.stencil, spec.config.n);
    const bool same = golden.spec == replay.spec &&
                      std::memcmp(golden.values.data(), replay.values.data(),
                                  replay.values.size() * sizeof(float)) == 0;
    result.checks.push_back({"golden grid dump matches", opts.golden_path,
                             same ? "bit-identical" : "differs", same});
    result.pass = result.pass && same;
  }

  std::printf("%-4s %-45s %-28s %s\n", "", "check", "expected", "actual");
  for (const VerifyCheck& c : result.checks)
    std::printf("%-4s %-45s %-28s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.expected.c_str(), c.actual.c_str());
  if (result.first_diff)
    std::printf("first differing cell: (%d,%d) expected %.9g got %.9g\n",
                result.first_diff->y, result.first_diff->x, result.first_diff->want,
                result.first_diff->got);

  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);
  write_text_file((fs::path(opts.out_dir) / "report.json").string(),
                  report_to_json(result.report, opts.deterministic));
  write_text_file((fs::path(opts.out_dir) / "ledger.csv").string(),
                  ledger_to_csv(result.report.ledger));
  std::printf("verify: %s\n", result.pass ? "PASS" : "FAIL");
  return result.pass ? 0 : kExitMismatch;
}

struct PlanOpts {
  std::string hardware_path;
  std::string stencil_kind = "box";
  int radius = 1;
  int sz = 38400;
  std::vector<std::string> candidates;  // "d:s_tb"
  std::string out_dir = ".";
};

int cmd_plan(const PlanOpts& opts) {
  const HardwareModel hw = opts.hardware_path.empty()
                               ? default_hardware()
                               : load_hardware_profile(opts.hardware_path);
  const StencilSpec stencil =
      stencil_kind_from_string(opts.stencil_kind) == StencilKind::box
          ? StencilSpec::box(opts.radius)
          : StencilSpec::gradient();

  std::vector<std::pair<int, int>> candidates;
  if (opts.candidates.empty()) {
    for (int d : {4, 8})
      for (int s : {40, 80, 160, 320, 640}) candidates.emplace_back(d, s);
  } else {
    for (const std::string& c : opts.candidates) {
      const auto colon = c.find(':');
      if (colon == std::string::npos)
        throw InvalidSpecError("candidate \"" + c + "\" is not d:s_tb");
      candidates.emplace_back(std::stoi(c.substr(0, colon)),
                              std::stoi(c.substr(colon + 1)));
    }
  }

  const FeasibilityReport report = feasible_configs(hw, stencil, opts.sz, candidates);

  std::ostringstream csv;
  csv << "d,s_tb,feasible,failed_constraints,halo_ratio,degradation_risk,"
         "t_transfer,t_kernel,regime\n";
  for (const FeasibilityEntry& e : report.entries) {
    std::string failed;
    for (const std::string& f : e.failed) {
      if (!failed.empty()) failed += "; ";
      failed += f;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.6f,%d,%.9g,%.9g", e.halo_ratio,
                  e.degradation_risk ? 1 : 0, e.t_transfer, e.t_kernel);
    csv << e.d << "," << e.s_tb << "," << (e.feasible ? 1 : 0) << ",\"" << failed
        << "\"," << buf << "," << to_string(e.regime) << "\n";
  }
  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);
  write_text_file((fs::path(opts.out_dir) / "plan.csv").string(), csv.str());
  std::cout << csv.str();
  return 0;
}

struct BenchOpts {
  std::string hardware_path;
  std::string out_dir = ".";
  int sz = 512;
  int n = 64;
  int d = 4;
  int s_tb = 16;
  int k_on = 4;
  std::uint64_t seed = 42;
  bool deterministic = false;
};

int cmd_bench(const BenchOpts& opts) {
  const HardwareModel hw = opts.hardware_path.empty()
                               ? desk_hardware()
                               : load_hardware_profile(opts.hardware_path);
  std::vector<StencilSpec> suite;
  for (int r = 1; r <= 4; ++r) suite.push_back(StencilSpec::box(r));
  suite.push_back(StencilSpec::gradient());

  std::ostringstream csv;
  csv << "benchmark,mode,t_htod,t_dtoh,t_kernel,t_total_overlap,t_total_serial,"
         "htod_bytes,dtoh_bytes,ondevice_bytes,scratch_load_bytes,"
         "scratch_store_bytes,element_updates,redundant_updates,"
         "kernel_invocations,rounds,modeled_speedup_vs_resreu";
  if (!opts.deterministic) csv << ",wall_seconds";
  csv << "\n";

  for (const StencilSpec& stencil : suite) {
    RunConfig config;
    config.sz = opts.sz;
    config.r = stencil.radius;
    config.d = opts.d;
    config.s_tb = opts.s_tb;
    config.k_on = opts.k_on;
    config.n_strm = 3;
    config.n = opts.n;
    KernelPlan kernel;
    kernel.k_on = opts.k_on;

    const Grid grid = init_grid({config.sz, config.r}, opts.seed);
    std::map<EngineMode, RunReport> reports;
    for (EngineMode mode : {EngineMode::so2dr, EngineMode::resreu, EngineMode::incore}) {
      RunResult result = run_engine(mode, grid, stencil, config, kernel, hw);
      reports.emplace(mode, std::move(result.report));
    }
    const double resreu_overlap = reports.at(EngineMode::resreu).times.t_total_overlap;
    for (EngineMode mode : {EngineMode::so2dr, EngineMode::resreu, EngineMode::incore}) {
      const RunReport& rep = reports.at(mode);
      char times[256];
      std::snprintf(times, sizeof(times), "%.9g,%.9g,%.9g,%.9g,%.9g",
                    rep.times.t_htod, rep.times.t_dtoh, rep.times.t_kernel,
                    rep.times.t_total_overlap, rep.times.t_total_serial);
      csv << stencil.name() << "," << to_string(mode) << "," << times << ","
          << rep.ledger.htod << "," << rep.ledger.dtoh << "," << rep.ledger.ondevice
          << "," << rep.ledger.scratch_load << "," << rep.ledger.scratch_store << ","
          << rep.ledger.element_updates << "," << rep.ledger.redundant_updates << ","
          << rep.ledger.kernel_invocations << "," << rep.ledger.rounds;
      char speedup[32];
      std::snprintf(speedup, sizeof(speedup), ",%.6g",
                    resreu_overlap / rep.times.t_total_overlap);
      csv << speedup;
      if (!opts.deterministic) {
        char wall[32];
        std::snprintf(wall, sizeof(wall), ",%.6g", rep.wall_seconds);
        csv << wall;
      }
      csv << "\n";
    }
  }
  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);
  write_text_file((fs::path(opts.out_dir) / "bench.csv").string(), csv.str());
  std::cout << csv.str();
  return 0;
}

void add_common(CLI::App* app, CommonOpts& opts, bool takes_spec) {
  if (takes_spec)
    app->add_option("spec", opts.spec_path, "run spec file (JSON)");
  app->add_option("--preset", opts.preset, "built-in spec preset name");
  app->add_option("--mode", opts.mode_override, "override mode: so2dr|resreu|incore");
  app->add_option("--hardware", opts.hardware_path, "hardware profile JSON");
  app->add_option("--out", opts.out_dir, "output directory");
  app->add_flag("--deterministic", opts.deterministic,
                "omit wall-clock/timestamps from outputs");
  app->add_option("--host-budget", opts.host_budget,
                  "max host bytes a run may allocate");
#ifdef SO2DR_FAULT_HOOKS
  app->add_flag("--corrupt-share", opts.corrupt_share,
                "fault injection: zero one shared region (test builds)");
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"out-of-core stencil simulator with region sharing and fused kernels"};
  app.require_subcommand(1);

  CommonOpts run_opts, verify_opts;
  PlanOpts plan_opts;
  BenchOpts bench_opts;

  CLI::App* run = app.add_subcommand("run", "execute one mode, write report/ledger");
  add_common(run, run_opts, true);

  CLI::App* verify = app.add_subcommand(
      "verify", "run a mode and the serial reference, compare bits and counters");
  add_common(verify, verify_opts, true);
  verify->add_option("--golden", verify_opts.golden_path,
                     "grid dump to compare against as well");

  CLI::App* plan = app.add_subcommand("plan", "evaluate (d, S_TB) candidates");
  plan->add_option("--hardware", plan_opts.hardware_path, "hardware profile JSON");
  plan->add_option("--stencil", plan_opts.stencil_kind, "box|gradient");
  plan->add_option("--radius", plan_opts.radius, "stencil radius");
  plan->add_option("--sz", plan_opts.sz, "interior edge length");
  plan->add_option("--candidate", plan_opts.candidates,
                   "d:s_tb candidate (repeatable; default: paper sweep)");
  plan->add_option("--out", plan_opts.out_dir, "output directory");

  CLI::App* bench = app.add_subcommand(
      "bench", "run so2dr/resreu/incore over the benchmark suite, emit comparison CSV");
  bench->add_option("--hardware", bench_opts.hardware_path, "hardware profile JSON");
  bench->add_option("--sz", bench_opts.sz, "interior edge length");
  bench->add_option("--n", bench_opts.n, "total steps");
  bench->add_option("--d", bench_opts.d, "chunk count");
  bench->add_option("--s-tb", bench_opts.s_tb, "TB steps per round");
  bench->add_option("--k-on", bench_opts.k_on, "steps fused per kernel");
  bench->add_option("--seed", bench_opts.seed, "grid seed");
  bench->add_option("--out", bench_opts.out_dir, "output directory");
  bench->add_flag("--deterministic", bench_opts.deterministic,
                  "omit wall-clock columns");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (verify->parsed()) return cmd_verify(verify_opts);
    if (plan->parsed()) return cmd_plan(plan_opts);
    if (bench->parsed()) return cmd_bench(bench_opts);
  } catch (const OutOfDeviceMemoryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDeviceOom;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
