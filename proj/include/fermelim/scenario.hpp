#pragma once

#include <string>
#include <vector>

#include "fermelim/hamiltonian.hpp"
#include "fermelim/lattice.hpp"
#include "fermelim/linkalg.hpp"

namespace fermelim {

enum class Suite {
  LinkRelations,
  Certificates,
  Elimination,
  Z2Embed,
  SpinRep,
  Spectra,
};

std::string suite_name(Suite s);
Suite suite_from_name(const std::string& name);  // throws std::invalid_argument

struct AlgebraSpec {
  std::string group = "zd";  // zd | u1trunc | trivial
  int parameter = 2;         // d for zd, ell for u1trunc, ignored for trivial
};

LinkAlgebra make_algebra(const AlgebraSpec& spec);  // throws std::invalid_argument

// One verification job: a lattice, a link algebra, couplings, and the suites
// to run. Parsing validates the schema; dimension caps are enforced when a
// suite actually materializes a space, so streaming-only suites run on
// lattices whose full tensor space would never fit.
struct Scenario {
  std::string name;
  int rows = 1, cols = 2;
  Boundary boundary = Boundary::OBC_DANGLING;
  AlgebraSpec algebra;
  CouplingParams couplings;
  std::vector<double> charge_offsets;  // per vertex; empty = all zero
  std::vector<Suite> suites;
  int spin_colors = 1;  // on-site colors for the spin-representation suite
  double tol_identity = 1e-10;
  double tol_spectra = 1e-9;
};

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& sc);

// a config file holds either a single scenario object or {"scenarios": [...]}
std::vector<Scenario> scenarios_from_config_text(const std::string& text);

const std::vector<Scenario>& catalogue();
const Scenario& find_scenario(const std::string& name);  // throws std::invalid_argument

}
