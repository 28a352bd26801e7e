#ifndef SO2DR_REPORT_HPP
#define SO2DR_REPORT_HPP

#include <string>

#include "so2dr/engine.hpp"

namespace so2dr {

/// Stable, versioned JSON rendering of a run report. With `deterministic`
/// the wall-clock field is omitted so identical runs serialize identically.
std::string report_to_json(const RunReport& report, bool deterministic);

/// One row per counter: counter,value.
std::string ledger_to_csv(const LedgerSnapshot& ledger);

/// round,chunk,stage,bytes,updates rows.
std::string diagnostics_to_csv(const std::vector<DiagRow>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace so2dr

#endif  // SO2DR_REPORT_HPP
