#pragma once

#include <string>
#include <vector>

#include "fermelim/eliminate.hpp"
#include "fermelim/layout.hpp"

namespace fermelim {

enum class CheckStatus { Pass, Fail, Refused };

std::string status_name(CheckStatus s);

struct CheckRecord {
  std::string id;
  CheckStatus status = CheckStatus::Pass;
  double max_violation = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double elapsed_seconds = 0.0;
};

struct SectorRecord {
  std::string label;
  index_t dim = 0;
};

struct SpectrumRecord {
  std::string label;
  std::vector<double> eigenvalues;  // sorted ascending
};

struct ScenarioReport {
  std::string name;
  std::vector<CheckRecord> checks;
  std::vector<SignSupport> supports;
  std::vector<SectorRecord> sectors;
  std::vector<SpectrumRecord> spectra;
  std::vector<std::string> notes;
  double elapsed_seconds = 0.0;

  CheckStatus status() const;  // Refused if any check refused, else Fail if any failed
};

struct RunReport {
  std::vector<ScenarioReport> scenarios;

  int total_checks() const;
  int count(CheckStatus s) const;
  // 1 on any refusal, 2 on any failure, 0 otherwise
  int exit_code() const;
};

// Deterministic serialization: fixed key order, insertion-ordered objects, no
// timestamps. Timings are emitted only when requested so that repeated runs
// of the same configs are byte-identical. Spectra appear as digests
// (count/min/max/sum); the full lists go to CSV files.
std::string report_to_json_text(const RunReport& r, bool with_timings = false);

// one eigenvalue per line, 17 significant digits
std::string spectrum_to_csv_text(const SpectrumRecord& s);

void write_text_file(const std::string& path, const std::string& text);

}
