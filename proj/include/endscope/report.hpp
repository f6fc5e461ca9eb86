#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "endscope/analysis.hpp"
#include "endscope/classify.hpp"

namespace endscope {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Finite numbers as JSON numbers; inf, -inf and nan as strings.
nlohmann::json number(double x);

nlohmann::json to_json(const TailModel& tail);
nlohmann::json to_json(const ConvergenceVerdict& verdict);
nlohmann::json to_json(const EndAnalysis& analysis);
nlohmann::json to_json(const PhaseTable& table, const SweepSpec& spec);

/// Top-level report {version, schema_version, config_hash, ends, sweep}.
nlohmann::json make_report(const std::string& config_hash, const std::vector<EndAnalysis>& ends,
                           const PhaseTable* sweep, const SweepSpec* spec);

/// Serialised report text (2-space indent, trailing newline).
std::string dump(const nlohmann::json& report);

/// Phase table as CSV: m,alpha,p,analytic_verdict,numeric_verdict,agreement,notes.
std::string phase_csv(const PhaseTable& table);

/// Writes through a temporary file in the same directory and renames it
/// into place.  Throws Error on IO failure.
void write_atomic(const std::string& path, const std::string& content);

inline const std::vector<std::string> kPlotKinds{"harmonic_profiles", "V_of_s", "h_trace", "phase"};

/// Plot-ready text files (name, content) for one kind of data in a report.
/// Throws ConfigError for an unknown kind or a report lacking the data.
std::vector<std::pair<std::string, std::string>> plot_files(const nlohmann::json& report,
                                                            const std::string& what);

}  // namespace endscope
