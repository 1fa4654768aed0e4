#pragma once

#include "cohortsim/engine.hpp"
#include "cohortsim/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cohortsim {

/// One line of agent_outcomes_all_runs.csv.
struct AgentOutcomeRow {
    ScenarioKind scenario = ScenarioKind::historical;
    int replication = 0;
    int agent_id = 0;
    int archetype_id = 0;
    Resilience resilience = Resilience::medium;
    AgentStatus status = AgentStatus::active;
    std::optional<int> dropout_semester;
    std::optional<DropoutCause> dropout_cause;
    double final_stress = 0.0;
    double final_belonging = 0.0;
    int final_debt = 0;
    int killer_failures = 0;
    int remedial_acceptances = 0;
    int courses_passed = 0;

    bool operator==(const AgentOutcomeRow&) const = default;
};

AgentOutcomeRow outcome_row(const AgentState& agent, ScenarioKind scenario, int replication,
                            const ArchetypeTable& archetypes);

/// All agent rows in (scenario, replication, agent_id) order.
std::vector<AgentOutcomeRow> outcome_rows(const ExperimentConfig& cfg,
                                          const ExperimentResult& result);

/// Rows of one scenario, in input order.
std::vector<AgentOutcomeRow> rows_for(std::span<const AgentOutcomeRow> rows, ScenarioKind kind);

/// Scenarios present in `rows`, in A, B, C order.
std::vector<ScenarioKind> scenarios_in(std::span<const AgentOutcomeRow> rows);

/// Dropout semester of every agent (0 when the agent never dropped), grouped by replication.
using DropoutHistories = std::vector<std::vector<int>>;

DropoutHistories dropout_histories(std::span<const ReplicationResult> reps);
/// Rows must belong to a single scenario.
DropoutHistories dropout_histories(std::span<const AgentOutcomeRow> rows);

/// Cumulative dropout fraction after each semester 1..horizon, mean of per-replication fractions.
std::vector<double> km_dropout_curve(const DropoutHistories& histories, int horizon);

struct ScenarioSummary {
    ScenarioKind scenario = ScenarioKind::historical;
    int n_agents = 0;       ///< agents per replication
    int n_replications = 0;
    double overall_dropout_rate = 0.0;
    double overall_graduation_rate = 0.0;
    double normative_dropout_frac = 0.0;
    double academic_dropout_frac = 0.0;
    double other_dropout_frac = 0.0;
    std::optional<double> mean_time_to_event;
    std::optional<double> median_time_to_event;
    double mean_final_debt = 0.0;
    double mean_killer_failures = 0.0;
    double mean_remedial_acceptances = 0.0;
    double equity_gap_low_vs_high_resilience = 0.0;
    double dropout_rate_low_resilience = 0.0;
    double dropout_rate_high_resilience = 0.0;

    // not part of the summary file
    double dropout_rate_std = 0.0; ///< across replications
    int n_dropped = 0;
};

/// Rows of a single scenario. Throws ContractError when empty.
ScenarioSummary summarize_scenario(std::span<const AgentOutcomeRow> rows);

/// One summary per scenario present, in A, B, C order.
std::vector<ScenarioSummary> summarize_all(std::span<const AgentOutcomeRow> rows);

/// Pooled dropout rate of one resilience class. Throws ContractError naming an empty class.
double dropout_rate_for(std::span<const AgentOutcomeRow> rows, Resilience cls);

/// Dropout rate of `low` minus dropout rate of `high`.
double equity_gap(std::span<const AgentOutcomeRow> rows, Resilience low = Resilience::low,
                  Resilience high = Resilience::high);

struct TrajectorySeries {
    std::vector<double> cumulative_dropout;
    std::vector<double> mean_stress_active;
    std::vector<double> mean_belonging_active;
    /// Over all agents; dropped agents contribute their values at dropout.
    double final_mean_stress = 0.0;
    double final_mean_belonging = 0.0;
};

/// Per-semester means over active agents, averaged across replications.
TrajectorySeries psychosocial_trajectories(std::span<const ReplicationResult> reps);

/// Final-value means over all rows (dropped agents included).
double mean_final_stress(std::span<const AgentOutcomeRow> rows);
double mean_final_belonging(std::span<const AgentOutcomeRow> rows);

struct CurveConsistency {
    bool ok = false;
    double final_cumulative = 0.0;
    double overall_dropout_rate = 0.0;
};

/// Last cumulative dropout value must equal the overall rate from final statuses.
CurveConsistency validate_dropout_curve_consistency(std::span<const AgentOutcomeRow> rows,
                                                    int horizon, double tolerance = 1e-9);

} // namespace cohortsim
