#pragma once

#include "cohortsim/analysis.hpp"
#include "cohortsim/engine.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cohortsim {

inline constexpr const char* kAgentOutcomesFile = "agent_outcomes_all_runs.csv";
inline constexpr const char* kSummaryFile = "policy_tradeoff_summary.csv";
inline constexpr const char* kConfigEffectiveFile = "config_effective.json";
inline constexpr const char* kDropoutCurvesFile = "dropout_curves.csv";
inline constexpr const char* kSemesterAggregatesFile = "semester_aggregates.csv";
inline constexpr const char* kRunLogFile = "run_log.txt";
inline constexpr const char* kAuditReportFile = "audit_report.json";
inline constexpr const char* kCalibrationReportFile = "calibration_report.json";

/// Fixed six-decimal rendering; NaN becomes an empty field.
std::string format_real(double value);

std::string agent_outcomes_csv(std::span<const AgentOutcomeRow> rows);
/// Throws ConfigError on a malformed header or row.
std::vector<AgentOutcomeRow> parse_agent_outcomes_csv(const std::string& text);

std::string summary_csv(std::span<const ScenarioSummary> summaries);
std::vector<ScenarioSummary> parse_summary_csv(const std::string& text);

/// One row per per-semester aggregate of every replication.
struct SemesterAggregateRow {
    ScenarioKind scenario = ScenarioKind::historical;
    int replication = 0;
    SemesterAggregate aggregate;
};

std::string semester_aggregates_csv(const ExperimentResult& result);
std::vector<SemesterAggregateRow> parse_semester_aggregates_csv(const std::string& text);

struct CurvePoint {
    ScenarioKind scenario = ScenarioKind::historical;
    int semester = 0;
    double cumulative_dropout = 0.0;
    double mean_stress_active = 0.0;
    double mean_belonging_active = 0.0;
};

std::string dropout_curves_csv(std::span<const CurvePoint> points);

/// Curves from in-memory results.
std::vector<CurvePoint> dropout_curve_points(const ExperimentResult& result);

/**
 * Curves recomputed from files: cumulative dropout from agent rows, active
 * means from per-semester aggregates (NaN when `aggregates` is empty).
 */
std::vector<CurvePoint> dropout_curve_points(std::span<const AgentOutcomeRow> rows,
                                             std::span<const SemesterAggregateRow> aggregates,
                                             int horizon);

/// config_to_json plus a "derived" block with seeds, frictions and record counts.
nlohmann::json config_effective_json(const ExperimentConfig& cfg);

/// Writes every per-run file into `dir`, creating it if needed. Throws IoError.
void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                              const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace cohortsim
