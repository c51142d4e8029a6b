#pragma once

#include <map>
#include <optional>
#include <string>

#include "ldsda/search.hpp"

namespace ldsda {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

// Machine-readable record of one front-end run. Serialized deterministically:
// identical runs produce byte-identical documents. Wall-clock timing is
// therefore opt-in and omitted by default.
struct RunReport {
  int schema_version = kReportSchemaVersion;
  std::string artifact_version = kArtifactVersion;
  std::string command;  // solve | enumerate | verify
  std::map<std::string, std::string> config;  // flag echo, insertion-sorted
  std::string status;  // ok | infeasible_start | budget_exhausted | error
  std::string error_message;
  std::optional<double> objective;
  ExternalPoint best_point;
  std::string certificate;
  SearchStats stats;
  std::vector<TrajectoryEntry> trajectory;
  std::map<std::string, double> variable_point;
  std::vector<std::string> true_booleans;
  std::optional<bool> verified_local;
  std::optional<double> wall_ms;  // only with --emit-timing
};

std::string run_report_to_text(const RunReport& report);
RunReport run_report_from_text(const std::string& text);

// Header `z_1,...,z_n,status,objective`; rows lexicographic by z; objective
// empty unless solved to optimality; newline-terminated UTF-8.
std::string lattice_to_csv(std::vector<LatticeRow> rows);

// Shortest round-trip decimal formatting, stable across runs.
std::string format_double(double value);

}  // namespace ldsda
