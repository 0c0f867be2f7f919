#include "fermelim/report.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace fermelim {

namespace {

using json = nlohmann::ordered_json;

json phase_json(const cplx& z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json support_json(const SignSupport& s) {
  json j;
  j["observable"] = s.observable;
  j["links"] = s.labels;
  j["link_indices"] = s.support;
  j["phase"] = phase_json(s.phase);
  j["minimal"] = s.minimal;
  j["unique"] = s.unique;
  return j;
}

json spectrum_digest(const SpectrumRecord& s) {
  json j;
  j["label"] = s.label;
  j["count"] = s.eigenvalues.size();
  if (!s.eigenvalues.empty()) {
    j["min"] = s.eigenvalues.front();
    j["max"] = s.eigenvalues.back();
    double sum = 0.0;
    for (double e : s.eigenvalues) sum += e;
    j["sum"] = sum;
  }
  return j;
}

}  // namespace

std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Refused: return "refused";
  }
  throw std::logic_error("unreachable status tag");
}

CheckStatus ScenarioReport::status() const {
  CheckStatus worst = CheckStatus::Pass;
  for (const CheckRecord& c : checks) {
    if (c.status == CheckStatus::Refused) return CheckStatus::Refused;
    if (c.status == CheckStatus::Fail) worst = CheckStatus::Fail;
  }
  return worst;
}

int RunReport::total_checks() const {
  int n = 0;
  for (const ScenarioReport& s : scenarios) n += static_cast<int>(s.checks.size());
  return n;
}

int RunReport::count(CheckStatus st) const {
  int n = 0;
  for (const ScenarioReport& s : scenarios)
    for (const CheckRecord& c : s.checks)
      if (c.status == st) ++n;
  return n;
}

int RunReport::exit_code() const {
  if (count(CheckStatus::Refused) > 0) return 1;
  if (count(CheckStatus::Fail) > 0) return 2;
  return 0;
}

std::string report_to_json_text(const RunReport& r, bool with_timings) {
  json out;
  out["format"] = "fermelim-report-v1";
  json scs = json::array();
  for (const ScenarioReport& s : r.scenarios) {
    json js;
    js["name"] = s.name;
    js["status"] = status_name(s.status());
    if (with_timings) js["elapsed_seconds"] = s.elapsed_seconds;
    json checks = json::array();
    for (const CheckRecord& c : s.checks) {
      json jc;
      jc["id"] = c.id;
      jc["status"] = status_name(c.status);
      jc["max_violation"] = c.max_violation;
      jc["tolerance"] = c.tolerance;
      if (!c.detail.empty()) jc["detail"] = c.detail;
      if (with_timings) jc["elapsed_seconds"] = c.elapsed_seconds;
      checks.push_back(std::move(jc));
    }
    js["checks"] = std::move(checks);
    if (!s.supports.empty()) {
      json sup = json::array();
      for (const SignSupport& sp : s.supports) sup.push_back(support_json(sp));
      js["sign_supports"] = std::move(sup);
    }
    if (!s.sectors.empty()) {
      json sec = json::array();
      for (const SectorRecord& sr : s.sectors)
        sec.push_back(json{{"label", sr.label}, {"dim", sr.dim}});
      js["sectors"] = std::move(sec);
    }
    if (!s.spectra.empty()) {
      json sp = json::array();
      for (const SpectrumRecord& sr : s.spectra) sp.push_back(spectrum_digest(sr));
      js["spectra"] = std::move(sp);
    }
    if (!s.notes.empty()) js["notes"] = s.notes;
    scs.push_back(std::move(js));
  }
  out["scenarios"] = std::move(scs);
  out["summary"] = json{{"checks", r.total_checks()},
                        {"passed", r.count(CheckStatus::Pass)},
                        {"failed", r.count(CheckStatus::Fail)},
                        {"refused", r.count(CheckStatus::Refused)},
                        {"exit_code", r.exit_code()}};
  return out.dump(2) + "\n";
}

std::string spectrum_to_csv_text(const SpectrumRecord& s) {
  std::string out;
  char buf[64];
  for (double e : s.eigenvalues) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", e);
    out += buf;
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << text;
  if (!f.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace fermelim
