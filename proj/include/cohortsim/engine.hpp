#pragma once

#include "cohortsim/config.hpp"
#include "cohortsim/policy.hpp"
#include "cohortsim/population.hpp"
#include "cohortsim/psychodynamics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cohortsim {

struct SemesterAggregate {
    int semester = 0;
    int active = 0;
    int dropped = 0; ///< cumulative
    int graduated = 0; ///< cumulative
    double mean_stress_active = 0.0;
    double mean_belonging_active = 0.0;
};

/// One end-of-semester safety-net allocation.
struct RemedialRound {
    int semester = 0;
    int active_count = 0;
    int capacity = 0;
    /// Every pool member, in priority order.
    std::vector<RemedialDecision> decisions;

    int accepted() const;
};

struct ReplicationResult {
    ScenarioKind scenario = ScenarioKind::historical;
    int replication = 0;
    std::uint64_t seed = 0;
    std::vector<AgentState> agents;
    std::vector<SemesterAggregate> semesters;
    std::vector<RemedialRound> remedial_rounds;
};

struct AgentEvents {
    int agent_id = 0;
    std::vector<SemesterEvent> events;

    bool operator==(const AgentEvents&) const = default;
};

/// Everything one replication mutates while it runs.
struct WorldState {
    const ExperimentConfig* config = nullptr;
    ScenarioPolicy policy;
    PsychUpdateParams psych;
    std::vector<double> frictions; ///< effective friction per course index
    std::uint64_t seed = 0;
    std::vector<AgentState> agents;
    std::vector<const Archetype*> archetype_of;
    std::vector<RemedialRound> remedial_rounds;
};

/// Seed of replication `rep` of scenario `kind`; disjoint across scenarios.
std::uint64_t replication_seed(std::uint64_t master_seed, ScenarioKind kind, int rep);

/// Samples the cohort and prepares per-scenario parameters.
WorldState make_world(const ExperimentConfig& cfg, const ScenarioPolicy& policy, int rep_index);

/**
 * Advances every active agent by one semester, in ascending agent id:
 * enrolment, attempts, finals-debt resolution and tick (historical regime),
 * psych updates, graduation check, hazard. Under the safety net the remedial
 * allocation then runs as an end-of-semester barrier. Returns the events of
 * each agent that was active at the start of the semester.
 */
std::vector<AgentEvents> step_semester(WorldState& world, int semester);

DropoutCause classify_dropout_cause(const AgentState& agent, int debt_cause_threshold);

ReplicationResult run_replication(const ExperimentConfig& cfg, const ScenarioPolicy& policy,
                                  int rep_index);

struct ScenarioRun {
    ScenarioPolicy policy;
    std::vector<ReplicationResult> replications;
};

struct ExperimentResult {
    std::vector<ScenarioRun> scenarios;
    std::vector<std::string> log;

    std::size_t agent_record_count() const;
};

struct RunOptions {
    /// Overrides cfg.threads when set. 1 runs sequentially.
    std::optional<int> threads;
    /// When set, all output files are written there.
    std::optional<std::filesystem::path> output_dir;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Runs `count` jobs on up to `threads` workers; job i writes only slot i.
void parallel_for(int count, int threads, const std::function<void(int)>& job);

int resolve_threads(int requested);

} // namespace cohortsim
