#include "so2dr/report.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace so2dr {

using ordered_json = nlohmann::ordered_json;

static char hex_digit(int v) { return "0123456789abcdef"[v]; }

static std::string hex64(std::uint64_t v) {
  std::string s = "0x";
  for (int shift = 60; shift >= 0; shift -= 4)
    s.push_back(hex_digit(static_cast<int>((v >> shift) & 0xF)));
  return s;
}

std::string report_to_json(const RunReport& report, bool deterministic) {
  ordered_json j;
  j["schema_version"] = 1;
  j["mode"] = to_string(report.mode);
  j["stencil"] = report.stencil_name;
  j["config"] = {
      {"sz", report.config.sz},     {"r", report.config.r},
      {"d", report.config.d},       {"s_tb", report.config.s_tb},
      {"k_on", report.config.k_on}, {"n_strm", report.config.n_strm},
      {"n", report.config.n},       {"n_a", report.config.n_a},
  };
  j["kernel"] = {
      {"tile", report.kernel.tile},
      {"k_on", report.kernel.k_on},
      {"scratch_budget", report.kernel.scratch_budget},
  };
  j["rounds"] = report.ledger.rounds;
  j["checksum"] = hex64(report.checksum);
  j["ledger"] = {
      {"htod_bytes", report.ledger.htod},
      {"dtoh_bytes", report.ledger.dtoh},
      {"ondevice_bytes", report.ledger.ondevice},
      {"scratch_load_bytes", report.ledger.scratch_load},
      {"scratch_store_bytes", report.ledger.scratch_store},
      {"element_updates", report.ledger.element_updates},
      {"redundant_updates", report.ledger.redundant_updates},
      {"kernel_invocations", report.ledger.kernel_invocations},
      {"rounds", report.ledger.rounds},
  };
  j["modeled_times"] = {
      {"t_htod", report.times.t_htod},
      {"t_dtoh", report.times.t_dtoh},
      {"t_kernel", report.times.t_kernel},
      {"t_total_overlap", report.times.t_total_overlap},
      {"t_total_serial", report.times.t_total_serial},
  };
  j["arena"] = {
      {"peak_bytes", report.arena_peak},
      {"capacity_bytes", report.arena_capacity},
  };
  j["transfer_time_excluded"] = report.transfer_time_excluded;
  if (!deterministic) j["wall_seconds"] = report.wall_seconds;
  return j.dump(2) + "\n";
}

std::string ledger_to_csv(const LedgerSnapshot& ledger) {
  std::ostringstream out;
  out << "counter,value\n";
  out << "htod_bytes," << ledger.htod << "\n";
  out << "dtoh_bytes," << ledger.dtoh << "\n";
  out << "ondevice_bytes," << ledger.ondevice << "\n";
  out << "scratch_load_bytes," << ledger.scratch_load << "\n";
  out << "scratch_store_bytes," << ledger.scratch_store << "\n";
  out << "element_updates," << ledger.element_updates << "\n";
  out << "redundant_updates," << ledger.redundant_updates << "\n";
  out << "kernel_invocations," << ledger.kernel_invocations << "\n";
  out << "rounds," << ledger.rounds << "\n";
  return out.str();
}

std::string diagnostics_to_csv(const std::vector<DiagRow>& rows) {
  std::ostringstream out;
  out << "round,chunk,stage,bytes,updates\n";
  for (const DiagRow& row : rows)
    out << row.round << "," << row.chunk << "," << to_string(row.stage) << ","
        << row.bytes << "," << row.updates << "\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("short write to " + path);
}

}  // namespace so2dr
