// End-to-end tests driving the so2dr binary (path in $SO2DR_CLI).

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "so2dr/gridio.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("SO2DR_CLI");
  REQUIRE_MESSAGE(p != nullptr, "SO2DR_CLI must point at the built binary");
  return p;
}

std::string repo_dir() {
  const char* p = std::getenv("SO2DR_REPO_DIR");
  return p ? p : ".";
}

fs::path fresh_dir(const std::string& tag) {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / ("so2dr_cli_" + tag + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing file: ", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CmdResult run_cmd(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const fs::path err_file = dir / "stderr.txt";
  const std::string cmd = cli_path() + " " + args + " >" + out_file.string() +
                          " 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string small_spec(int d, const std::string& mode = "so2dr",
                       const std::string& extra = "") {
  std::ostringstream s;
  s << R"({
  "stencil": {"kind": "box", "radius": 1},
  "grid": {"sz": 64, "seed": 3},
  "mode": ")"
    << mode << R"(",
  "config": {"d": )"
    << d << R"(, "s_tb": 8, "k_on": 4, "n_strm": 3, "n": 16})"
    << extra << "\n}\n";
  return s.str();
}

}  // namespace

TEST_CASE("cli run: deterministic reports are byte-identical") {
  const fs::path dir = fresh_dir("run");
  write_file(dir / "spec.json", small_spec(4));
  const fs::path out1 = dir / "out1";
  const fs::path out2 = dir / "out2";

  CmdResult r1 = run_cmd("run " + (dir / "spec.json").string() +
                             " --deterministic --out " + out1.string(),
                         dir);
  CHECK(r1.exit_code == 0);
  CHECK(r1.out.find("rounds=2") != std::string::npos);

  CmdResult r2 = run_cmd("run " + (dir / "spec.json").string() +
                             " --deterministic --out " + out2.string(),
                         dir);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
  CHECK(slurp(out1 / "ledger.csv") == slurp(out2 / "ledger.csv"));
  CHECK(slurp(out1 / "diagnostics.csv") == slurp(out2 / "diagnostics.csv"));
  CHECK(slurp(out1 / "report.json").find("\"rounds\": 2") != std::string::npos);
  CHECK(slurp(out1 / "report.json").find("wall_seconds") == std::string::npos);
}

TEST_CASE("cli run: desk preset reports four rounds") {
  const fs::path dir = fresh_dir("preset");
  CmdResult r = run_cmd("run --preset box2d1r-desk --deterministic --out " +
                            (dir / "out").string(),
                        dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("rounds=4") != std::string::npos);
}

TEST_CASE("cli run: shipped preset files parse and run") {
  const fs::path dir = fresh_dir("files");
  CmdResult r = run_cmd("run " + repo_dir() + "/presets/gradient2d-desk.json" +
                            " --deterministic --out " + (dir / "out").string(),
                        dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("rounds=4") != std::string::npos);
  CHECK(r.out.find("stencil=gradient2d") != std::string::npos);
}

TEST_CASE("cli run: d <= N_strm is rejected with the constraint named") {
  const fs::path dir = fresh_dir("gate");
  write_file(dir / "spec.json", small_spec(2));
  CmdResult r = run_cmd("run " + (dir / "spec.json").string(), dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("d > N_strm") != std::string::npos);
}

TEST_CASE("cli run: paper-scale grids are refused by the host budget") {
  const fs::path dir = fresh_dir("budget");
  CmdResult r = run_cmd("run --preset box2d1r-paper --out " + dir.string(), dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("host") != std::string::npos);
}

TEST_CASE("cli run: arena overflow exits with code 3") {
  const fs::path dir = fresh_dir("oom");
  write_file(dir / "spec.json", small_spec(4));
  write_file(dir / "hw.json",
             R"({"name":"tiny","c_dmem_bytes":1000,
                 "bw_dmem_bytes_per_s":1e9,"bw_intc_bytes_per_s":1e8,"b_elem":4})");
  CmdResult r = run_cmd("run " + (dir / "spec.json").string() + " --hardware " +
                            (dir / "hw.json").string(),
                        dir);
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("out of device memory") != std::string::npos);
}

TEST_CASE("cli run: malformed JSON is reported with a position") {
  const fs::path dir = fresh_dir("badjson");
  write_file(dir / "spec.json", "{\n  \"stencil\": {\n");
  CmdResult r = run_cmd("run " + (dir / "spec.json").string(), dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("line") != std::string::npos);
}

TEST_CASE("cli run: grid dump output can be loaded back") {
  const fs::path dir = fresh_dir("dump");
  write_file(dir / "spec.json",
             small_spec(4, "so2dr", R"(,
  "output": {"grid_dump": "final.so2d"})"));
  const fs::path out = dir / "out";
  CmdResult r = run_cmd(
      "run " + (dir / "spec.json").string() + " --deterministic --out " + out.string(),
      dir);
  CHECK(r.exit_code == 0);
  const so2dr::Grid g = so2dr::load_grid((out / "final.so2d").string());
  CHECK(g.spec.sz == 64);
  CHECK(g.spec.r == 1);

  // the dump doubles as a golden file for verify
  CmdResult golden = run_cmd("verify " + (dir / "spec.json").string() +
                                 " --golden " + (out / "final.so2d").string() +
                                 " --out " + (dir / "gout").string(),
                             dir);
  CHECK(golden.exit_code == 0);
  CHECK(golden.out.find("golden grid dump matches") != std::string::npos);
}

TEST_CASE("cli verify: clean run passes; corrupted share fails with a cell") {
  const fs::path dir = fresh_dir("verify");
  write_file(dir / "spec.json", small_spec(4));
  CmdResult ok = run_cmd("verify " + (dir / "spec.json").string() +
                             " --deterministic --out " + (dir / "out").string(),
                         dir);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("verify: PASS") != std::string::npos);

  CmdResult bad = run_cmd("verify " + (dir / "spec.json").string() +
                              " --corrupt-share --out " + (dir / "out2").string(),
                          dir);
  CHECK(bad.exit_code == 1);
  CHECK(bad.out.find("verify: FAIL") != std::string::npos);
  CHECK(bad.out.find("first differing cell") != std::string::npos);
}

TEST_CASE("cli verify: every mode passes on the same spec") {
  const fs::path dir = fresh_dir("modes");
  write_file(dir / "spec.json", small_spec(4));
  for (const std::string mode : {"so2dr", "resreu", "incore"}) {
    CmdResult r = run_cmd("verify " + (dir / "spec.json").string() + " --mode " +
                              mode + " --out " + (dir / ("out_" + mode)).string(),
                          dir);
    INFO("mode ", mode, "\n", r.out, r.err);
    CHECK(r.exit_code == 0);
  }
}

TEST_CASE("cli plan: paper sweep against the shipped profile") {
  const fs::path dir = fresh_dir("plan");
  const std::string profile = repo_dir() + "/profiles/rtx3080.json";
  CmdResult r = run_cmd("plan --hardware " + profile +
                            " --stencil box --radius 1 --sz 38400 --out " +
                            dir.string(),
                        dir);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir / "plan.csv");
  CHECK(csv.find("4,160,1,") != std::string::npos);   // feasible
  CHECK(csv.find("8,640,1,") != std::string::npos);   // feasible but flagged
  CHECK(csv.find("0.266667,1") != std::string::npos); // halo ratio 26.7%, flagged

  CmdResult d2 = run_cmd("plan --hardware " + profile +
                             " --stencil box --radius 1 --sz 38400 --candidate 2:40 "
                             "--out " +
                             (dir / "d2").string(),
                         dir);
  CHECK(d2.exit_code == 0);
  CHECK(slurp(dir / "d2" / "plan.csv").find("d > N_strm") != std::string::npos);
}

TEST_CASE("cli bench: emits the comparison table with so2dr ahead") {
  const fs::path dir = fresh_dir("bench");
  CmdResult r = run_cmd(
      "bench --sz 256 --n 8 --d 4 --s-tb 4 --k-on 4 --deterministic --out " +
          dir.string(),
      dir);
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(dir / "bench.csv");
  // header + 5 benchmarks x 3 modes
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  double so2dr_overlap = -1;
  std::string so2dr_htod;
  int so2dr_seen = 0, faster = 0, same_htod = 0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string bench, mode, t_htod, t_dtoh, t_kernel, t_overlap, t_serial, htod;
    std::getline(cells, bench, ',');
    std::getline(cells, mode, ',');
    std::getline(cells, t_htod, ',');
    std::getline(cells, t_dtoh, ',');
    std::getline(cells, t_kernel, ',');
    std::getline(cells, t_overlap, ',');
    std::getline(cells, t_serial, ',');
    std::getline(cells, htod, ',');
    if (mode == "so2dr") {
      so2dr_overlap = std::stod(t_overlap);
      so2dr_htod = htod;
      ++so2dr_seen;
    }
    if (mode == "resreu") {
      if (std::stod(t_overlap) > so2dr_overlap) ++faster;
      // both sharing-based modes stream the same interconnect bytes
      if (htod == so2dr_htod) ++same_htod;
    }
  }
  CHECK(so2dr_seen == 5);
  CHECK(faster == 5);
  CHECK(same_htod == 5);
}
