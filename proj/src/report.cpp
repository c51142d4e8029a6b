#include "ldsda/report.hpp"

#include <algorithm>
#include <charconv>

#include "json.hpp"
#include "ldsda/errors.hpp"

namespace ldsda {

using nlohmann::ordered_json;

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [end, ec] =
      std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

namespace {

Phase phase_from(const std::string& s) {
  if (s == "INIT") return Phase::kInit;
  if (s == "NS") return Phase::kNeighborhood;
  if (s == "LS") return Phase::kLineSearch;
  throw Error("unknown phase '" + s + "'");
}

PointStatus status_from(const std::string& s) {
  for (PointStatus st :
       {PointStatus::kOptimal, PointStatus::kInfeasible,
        PointStatus::kSolverError, PointStatus::kLogicInfeasible,
        PointStatus::kFbbtInfeasible, PointStatus::kOutOfBox,
        PointStatus::kVisited}) {
    if (to_string(st) == s) return st;
  }
  throw Error("unknown point status '" + s + "'");
}

ordered_json stats_to_json(const SearchStats& s) {
  ordered_json j;
  j["solves"] = s.solves;
  j["prunes_visited"] = s.prunes_visited;
  j["prunes_domain"] = s.prunes_domain;
  j["prunes_fbbt"] = s.prunes_fbbt;
  j["prunes_logic"] = s.prunes_logic;
  j["ns_rounds"] = s.ns_rounds;
  j["ls_steps"] = s.ls_steps;
  j["accepted_moves"] = s.accepted_moves;
  return j;
}

SearchStats stats_from_json(const ordered_json& j) {
  SearchStats s;
  s.solves = j.at("solves").get<long>();
  s.prunes_visited = j.at("prunes_visited").get<long>();
  s.prunes_domain = j.at("prunes_domain").get<long>();
  s.prunes_fbbt = j.at("prunes_fbbt").get<long>();
  s.prunes_logic = j.at("prunes_logic").get<long>();
  s.ns_rounds = j.at("ns_rounds").get<long>();
  s.ls_steps = j.at("ls_steps").get<long>();
  s.accepted_moves = j.at("accepted_moves").get<long>();
  return s;
}

}  // namespace

std::string run_report_to_text(const RunReport& r) {
  ordered_json j;
  j["schema_version"] = r.schema_version;
  j["artifact_version"] = r.artifact_version;
  j["command"] = r.command;
  j["config"] = r.config;
  j["status"] = r.status;
  if (!r.error_message.empty()) j["error"] = r.error_message;
  if (r.objective) j["objective"] = *r.objective;
  if (!r.best_point.empty()) j["z_e"] = r.best_point;
  if (!r.certificate.empty()) j["certificate"] = r.certificate;
  j["stats"] = stats_to_json(r.stats);
  ordered_json traj = ordered_json::array();
  for (const TrajectoryEntry& e : r.trajectory) {
    ordered_json je;
    je["z"] = e.z;
    je["phase"] = to_string(e.phase);
    je["status"] = to_string(e.status);
    if (std::isfinite(e.value)) je["value"] = e.value;
    je["accepted"] = e.accepted;
    traj.push_back(je);
  }
  j["trajectory"] = traj;
  if (!r.variable_point.empty()) j["variables"] = r.variable_point;
  if (!r.true_booleans.empty()) j["true_booleans"] = r.true_booleans;
  if (r.verified_local) j["verified_local"] = *r.verified_local;
  if (r.wall_ms) j["wall_ms"] = *r.wall_ms;
  return j.dump(2) + "\n";
}

RunReport run_report_from_text(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  RunReport r;
  r.schema_version = j.at("schema_version").get<int>();
  r.artifact_version = j.at("artifact_version").get<std::string>();
  r.command = j.at("command").get<std::string>();
  if (j.contains("config"))
    r.config = j.at("config").get<std::map<std::string, std::string>>();
  r.status = j.at("status").get<std::string>();
  if (j.contains("error")) r.error_message = j.at("error").get<std::string>();
  if (j.contains("objective")) r.objective = j.at("objective").get<double>();
  if (j.contains("z_e")) r.best_point = j.at("z_e").get<ExternalPoint>();
  if (j.contains("certificate"))
    r.certificate = j.at("certificate").get<std::string>();
  r.stats = stats_from_json(j.at("stats"));
  for (const auto& je : j.at("trajectory")) {
    TrajectoryEntry e;
    e.z = je.at("z").get<ExternalPoint>();
    e.phase = phase_from(je.at("phase").get<std::string>());
    e.status = status_from(je.at("status").get<std::string>());
    if (je.contains("value")) e.value = je.at("value").get<double>();
    e.accepted = je.at("accepted").get<bool>();
    r.trajectory.push_back(std::move(e));
  }
  if (j.contains("variables"))
    r.variable_point =
        j.at("variables").get<std::map<std::string, double>>();
  if (j.contains("true_booleans"))
    r.true_booleans = j.at("true_booleans").get<std::vector<std::string>>();
  if (j.contains("verified_local"))
    r.verified_local = j.at("verified_local").get<bool>();
  if (j.contains("wall_ms")) r.wall_ms = j.at("wall_ms").get<double>();
  return r;
}

std::string lattice_to_csv(std::vector<LatticeRow> rows) {
  if (rows.empty()) throw Error("lattice table is empty");
  std::sort(rows.begin(), rows.end(),
            [](const LatticeRow& a, const LatticeRow& b) { return a.z < b.z; });
  const size_t dims = rows.front().z.size();
  std::string out;
  for (size_t i = 0; i < dims; ++i) {
    out += "z_" + std::to_string(i + 1);
    out += ",";
  }
  out += "status,objective\n";
  for (const LatticeRow& row : rows) {
    for (int z : row.z) {
      out += std::to_string(z);
      out += ",";
    }
    out += to_string(row.status);
    out += ",";
    if (row.status == PointStatus::kOptimal) out += format_double(row.value);
    out += "\n";
  }
  return out;
}

}  // namespace ldsda
