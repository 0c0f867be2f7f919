#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fermelim/report.hpp"
#include "fermelim/runner.hpp"
#include "fermelim/scenario.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice gauge model verification runner"};
  app.require_subcommand(1);

  std::string config_path, out_path, spectra_dir, only;
  bool with_timings = false;
  CLI::App* run = app.add_subcommand("run", "execute verification scenarios");
  run->add_option("--config", config_path,
                  "scenario config (JSON); omit to run the built-in catalogue");
  run->add_option("--out", out_path, "write the JSON report here instead of stdout");
  run->add_option("--spectra-dir", spectra_dir, "write full eigenvalue lists as CSV here");
  run->add_option("--scenario", only, "run a single catalogue scenario by name");
  run->add_flag("--with-timings", with_timings, "include elapsed times in the report");

  CLI::App* list = app.add_subcommand("list", "print the built-in scenario catalogue");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (list->parsed()) {
    for (const auto& sc : fermelim::catalogue()) {
      std::string suites;
      for (auto s : sc.suites) {
        if (!suites.empty()) suites += ",";
        suites += fermelim::suite_name(s);
      }
      std::printf("%-22s %dx%d %-4s %-10s %s\n", sc.name.c_str(), sc.rows, sc.cols,
                  sc.boundary == fermelim::Boundary::PBC ? "pbc" : "obc",
                  (sc.algebra.group +
                   (sc.algebra.group == "trivial" ? "" : std::to_string(sc.algebra.parameter)))
                      .c_str(),
                  suites.c_str());
    }
    return 0;
  }

  std::vector<fermelim::Scenario> scs;
  try {
    if (!config_path.empty() && !only.empty())
      throw std::invalid_argument("--config and --scenario are mutually exclusive");
    if (!config_path.empty())
      scs = fermelim::scenarios_from_config_text(slurp(config_path));
    else if (!only.empty())
      scs = {fermelim::find_scenario(only)};
    else
      scs = fermelim::catalogue();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  fermelim::RunOptions opts;
  opts.spectra_dir = spectra_dir;
  opts.with_timings = with_timings;
  const fermelim::RunReport report = fermelim::run_scenarios(scs, opts);
  const std::string text = fermelim::report_to_json_text(report, with_timings);
  try {
    if (out_path.empty())
      std::cout << text;
    else
      fermelim::write_text_file(out_path, text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return report.exit_code();
}
