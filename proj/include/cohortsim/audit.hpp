#pragma once

#include "cohortsim/analysis.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cohortsim {

enum class CheckStatus { pass, fail, skipped };

struct AuditCheck {
    std::string name;
    CheckStatus status = CheckStatus::skipped;
    nlohmann::json observed;
    nlohmann::json expected;
    std::string detail;
};

struct AuditReport {
    std::vector<AuditCheck> checks;

    /// No check failed (skipped checks do not count against the run).
    bool passed() const;
    const AuditCheck* find(std::string_view name) const;
    nlohmann::json to_json() const;
};

/// Upper bound on mean final debt under the safety-net regime.
inline constexpr double kSafetyNetDebtBound = 0.01;

/**
 * Runs every check on parsed outputs. `config_effective` is the content of
 * config_effective.json (its "derived" block supplies the expected counts).
 */
AuditReport audit_outputs(std::span<const AgentOutcomeRow> rows,
                          std::span<const ScenarioSummary> summaries,
                          const nlohmann::json& config_effective);

/// Reads the output files of a run directory and audits them. Throws IoError
/// for a missing file and ConfigError for an unparseable one.
AuditReport audit(const std::filesystem::path& dir);

} // namespace cohortsim
