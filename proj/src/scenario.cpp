#include "fermelim/scenario.hpp"

#include <json.hpp>
#include <stdexcept>

namespace fermelim {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& msg) {
  throw std::invalid_argument("scenario config: " + msg);
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) bad(where + ": missing key \"" + key + "\"");
  return *it;
}

int need_int(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number_integer()) bad(where + ": \"" + key + "\" must be an integer");
  return v.get<int>();
}

double opt_number(const json& j, const char* key, double fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) bad(where + ": \"" + key + "\" must be a number");
  return it->get<double>();
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) bad("scenario must be a JSON object");
  Scenario sc;

  const json& jn = need(j, "name", "scenario");
  if (!jn.is_string() || jn.get<std::string>().empty()) bad("\"name\" must be a nonempty string");
  sc.name = jn.get<std::string>();
  const std::string where = "scenario \"" + sc.name + "\"";

  const json& jl = need(j, "lattice", where);
  sc.rows = need_int(jl, "rows", where);
  sc.cols = need_int(jl, "cols", where);
  if (sc.rows < 1 || sc.cols < 1) bad(where + ": rows and cols must be positive");
  const std::string bnd = need(jl, "boundary", where).get<std::string>();
  if (bnd == "obc")
    sc.boundary = Boundary::OBC_DANGLING;
  else if (bnd == "pbc")
    sc.boundary = Boundary::PBC;
  else
    bad(where + ": boundary must be \"obc\" or \"pbc\"");
  if (sc.boundary == Boundary::PBC && (sc.rows < 2 || sc.cols < 2))
    bad(where + ": periodic lattices need rows >= 2 and cols >= 2");

  const json& ja = need(j, "algebra", where);
  sc.algebra.group = need(ja, "group", where).get<std::string>();
  sc.algebra.parameter = static_cast<int>(opt_number(ja, "parameter", 0.0, where));
  make_algebra(sc.algebra);  // validates group/parameter

  if (auto it = j.find("couplings"); it != j.end()) {
    sc.couplings.M = opt_number(*it, "M", 0.0, where);
    sc.couplings.lambda_E = opt_number(*it, "lambda_E", 0.0, where);
    sc.couplings.lambda_B = opt_number(*it, "lambda_B", 0.0, where);
    sc.couplings.epsilon = opt_number(*it, "epsilon", 0.0, where);
  }

  if (auto it = j.find("charge_offsets"); it != j.end()) {
    if (!it->is_array()) bad(where + ": \"charge_offsets\" must be an array");
    for (const json& v : *it) {
      if (!v.is_number()) bad(where + ": charge offsets must be numbers");
      sc.charge_offsets.push_back(v.get<double>());
    }
    if (!sc.charge_offsets.empty() &&
        static_cast<int>(sc.charge_offsets.size()) != sc.rows * sc.cols)
      bad(where + ": charge_offsets must list one value per vertex");
  }

  const json& js = need(j, "suites", where);
  if (!js.is_array() || js.empty()) bad(where + ": \"suites\" must be a nonempty array");
  for (const json& v : *js.get_ptr<const json::array_t*>()) {
    Suite s = suite_from_name(v.get<std::string>());
    for (Suite seen : sc.suites)
      if (seen == s) bad(where + ": duplicate suite \"" + suite_name(s) + "\"");
    sc.suites.push_back(s);
  }

  sc.spin_colors = static_cast<int>(opt_number(j, "spin_colors", 1.0, where));
  if (sc.spin_colors < 1 || sc.spin_colors > 8)
    bad(where + ": spin_colors must be between 1 and 8");

  if (auto it = j.find("tolerances"); it != j.end()) {
    sc.tol_identity = opt_number(*it, "identity", sc.tol_identity, where);
    sc.tol_spectra = opt_number(*it, "spectra", sc.tol_spectra, where);
    if (sc.tol_identity <= 0.0 || sc.tol_spectra <= 0.0) bad(where + ": tolerances must be positive");
  }

  return sc;
}

json scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["lattice"] = {{"rows", sc.rows},
                  {"cols", sc.cols},
                  {"boundary", sc.boundary == Boundary::PBC ? "pbc" : "obc"}};
  j["algebra"] = {{"group", sc.algebra.group}, {"parameter", sc.algebra.parameter}};
  j["couplings"] = {{"M", sc.couplings.M},
                    {"lambda_E", sc.couplings.lambda_E},
                    {"lambda_B", sc.couplings.lambda_B},
                    {"epsilon", sc.couplings.epsilon}};
  j["charge_offsets"] = sc.charge_offsets;
  json suites = json::array();
  for (Suite s : sc.suites) suites.push_back(suite_name(s));
  j["suites"] = std::move(suites);
  j["spin_colors"] = sc.spin_colors;
  j["tolerances"] = {{"identity", sc.tol_identity}, {"spectra", sc.tol_spectra}};
  return j;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
}

Scenario make_scenario(const std::string& name, int rows, int cols, Boundary bnd,
                       AlgebraSpec alg, CouplingParams cp, std::vector<Suite> suites,
                       int spin_colors = 1) {
  Scenario sc;
  sc.name = name;
  sc.rows = rows;
  sc.cols = cols;
  sc.boundary = bnd;
  sc.algebra = std::move(alg);
  sc.couplings = cp;
  sc.suites = std::move(suites);
  sc.spin_colors = spin_colors;
  return sc;
}

std::vector<Scenario> build_catalogue() {
  const CouplingParams ladder{0.7, 1.1, 0.0, 0.9};
  const CouplingParams square{0.7, 1.1, 0.45, 0.9};
  const CouplingParams free_fermion{0.7, 0.0, 0.0, 0.9};
  const AlgebraSpec z2{"zd", 2};
  const Boundary obc = Boundary::OBC_DANGLING;

  std::vector<Scenario> cat;
  cat.push_back(make_scenario("z2_1x2_full", 1, 2, obc, z2, ladder,
                              {Suite::LinkRelations, Suite::Certificates, Suite::Elimination,
                               Suite::Z2Embed, Suite::SpinRep, Suite::Spectra}));
  cat.push_back(make_scenario("z2_2x2_spectra", 2, 2, obc, z2, square,
                              {Suite::Elimination, Suite::Spectra}));
  cat.push_back(make_scenario("u1trunc_1x2", 1, 2, obc, AlgebraSpec{"u1trunc", 1}, ladder,
                              {Suite::LinkRelations, Suite::Elimination, Suite::Spectra}));
  cat.push_back(make_scenario("zd4_links", 1, 2, obc, AlgebraSpec{"zd", 4}, CouplingParams{},
                              {Suite::LinkRelations}));
  cat.push_back(make_scenario("zd6_links", 1, 2, obc, AlgebraSpec{"zd", 6}, CouplingParams{},
                              {Suite::LinkRelations}));
  cat.push_back(make_scenario("u1trunc2_links", 1, 2, obc, AlgebraSpec{"u1trunc", 2},
                              CouplingParams{}, {Suite::LinkRelations}));
  cat.push_back(make_scenario("u1trunc3_links", 1, 2, obc, AlgebraSpec{"u1trunc", 3},
                              CouplingParams{}, {Suite::LinkRelations}));
  cat.push_back(make_scenario("pure_fermion_1x2", 1, 2, obc, AlgebraSpec{"trivial", 0},
                              free_fermion, {Suite::Z2Embed}));
  cat.push_back(make_scenario("pure_fermion_z2embed", 2, 2, obc, AlgebraSpec{"trivial", 0},
                              free_fermion, {Suite::Z2Embed}));
  cat.push_back(make_scenario("pbc_sectors_2x2", 2, 2, Boundary::PBC, AlgebraSpec{"trivial", 0},
                              free_fermion, {Suite::Z2Embed}));
  cat.push_back(make_scenario("spinrep_N1", 1, 2, obc, z2, ladder, {Suite::SpinRep}, 1));
  cat.push_back(make_scenario("spinrep_N2", 1, 2, obc, z2, ladder, {Suite::SpinRep}, 2));
  cat.push_back(make_scenario("spinrep_N3", 1, 2, obc, z2, ladder, {Suite::SpinRep}, 3));
  cat.push_back(make_scenario("su_certificates", 1, 2, obc, z2, CouplingParams{},
                              {Suite::Certificates}));
  cat.push_back(make_scenario("xi_supports_3x3", 3, 3, obc, z2, square, {Suite::Elimination}));
  return cat;
}

}  // namespace

std::string suite_name(Suite s) {
  switch (s) {
    case Suite::LinkRelations: return "link_relations";
    case Suite::Certificates: return "certificates";
    case Suite::Elimination: return "elimination";
    case Suite::Z2Embed: return "z2embed";
    case Suite::SpinRep: return "spinrep";
    case Suite::Spectra: return "spectra";
  }
  throw std::logic_error("unreachable suite tag");
}

Suite suite_from_name(const std::string& name) {
  for (Suite s : {Suite::LinkRelations, Suite::Certificates, Suite::Elimination, Suite::Z2Embed,
                  Suite::SpinRep, Suite::Spectra})
    if (suite_name(s) == name) return s;
  throw std::invalid_argument("scenario config: unknown suite \"" + name + "\"");
}

LinkAlgebra make_algebra(const AlgebraSpec& spec) {
  if (spec.group == "zd") {
    if (spec.parameter < 2)
      throw std::invalid_argument("scenario config: zd algebra needs parameter >= 2");
    return make_zd_link(spec.parameter);
  }
  if (spec.group == "u1trunc") {
    if (spec.parameter < 1)
      throw std::invalid_argument("scenario config: u1trunc algebra needs parameter >= 1");
    return make_u1_truncated_link(spec.parameter);
  }
  if (spec.group == "trivial") return make_trivial_link();
  throw std::invalid_argument("scenario config: unknown algebra group \"" + spec.group + "\"");
}

Scenario scenario_from_json_text(const std::string& text) {
  return scenario_from_json(parse_text(text));
}

std::string scenario_to_json_text(const Scenario& sc) {
  return scenario_to_json(sc).dump(2) + "\n";
}

std::vector<Scenario> scenarios_from_config_text(const std::string& text) {
  const json j = parse_text(text);
  std::vector<Scenario> out;
  if (j.is_object() && j.contains("scenarios")) {
    const json& arr = j["scenarios"];
    if (!arr.is_array() || arr.empty()) bad("\"scenarios\" must be a nonempty array");
    for (const json& v : arr) out.push_back(scenario_from_json(v));
  } else {
    out.push_back(scenario_from_json(j));
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t k = i + 1; k < out.size(); ++k)
      if (out[i].name == out[k].name) bad("duplicate scenario name \"" + out[i].name + "\"");
  return out;
}

const std::vector<Scenario>& catalogue() {
  static const std::vector<Scenario> cat = build_catalogue();
  return cat;
}

const Scenario& find_scenario(const std::string& name) {
  for (const Scenario& sc : catalogue())
    if (sc.name == name) return sc;
  throw std::invalid_argument("unknown scenario \"" + name + "\"");
}

}  // namespace fermelim
