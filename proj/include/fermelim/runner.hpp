#pragma once

#include <string>
#include <vector>

#include "fermelim/report.hpp"
#include "fermelim/scenario.hpp"

namespace fermelim {

struct RunOptions {
  std::string spectra_dir;  // empty = no CSV files
  bool with_timings = false;
};

// Runs the selected suites. Dimension-cap violations surface as refused
// checks (the run still produces a report; the exit code becomes 1).
ScenarioReport run_scenario(const Scenario& sc, const RunOptions& opts = {});
RunReport run_scenarios(const std::vector<Scenario>& scs, const RunOptions& opts = {});

}
