#pragma once

#include "cohortsim/curriculum.hpp"
#include "cohortsim/population.hpp"
#include "cohortsim/rng.hpp"
#include "cohortsim/types.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace cohortsim {

/// How an accepted remedial candidate is resolved.
enum class RemedialMode {
    guaranteed,   ///< acceptance marks the course passed
    probabilistic ///< acceptance grants a second attempt with a boosted mean score
};

/**
 * Complete rule set of one progression regime.
 *
 * Fields only meaningful for some regimes are still present on every policy;
 * the engine reads the ones that apply to `kind`.
 */
struct ScenarioPolicy {
    ScenarioKind kind = ScenarioKind::historical;

    // historical regime
    double reg_success_scale = 1.2;
    double debt_resolution_base = 0.5;
    int ttl_age_threshold = 6;
    double ttl_success_decay = 0.5;

    // direct promotion (B and C)
    double bottleneck_target_fail_rate = 0.90;
    double nonbottleneck_friction_multiplier = 1.2;
    double pass_threshold = 0.6;
    double performance_sd = 0.15;
    /// Ability used to invert the bottleneck pass probability; <= 0 means the
    /// frequency-weighted mean ability of the archetype table.
    double representative_ability = 0.0;

    // safety net (C)
    double near_pass_low = 0.5;
    double near_pass_high = 0.6;
    double remedial_capacity_fraction = 0.30;
    RemedialMode remedial_mode = RemedialMode::guaranteed;
    double remedial_pass_prob_boost = 0.1;
    double remedial_stress_cost = 0.03;
    double remedial_belonging_bonus = 0.05;

    static ScenarioPolicy defaults(ScenarioKind kind);

    bool promotes() const { return kind != ScenarioKind::historical; }
    bool in_near_pass_band(double score) const
    {
        return score >= near_pass_low && score < near_pass_high;
    }

    /// Throws ConfigError when fields violate their ranges.
    void validate() const;

    nlohmann::json to_json() const;
    /// Reads fields present in `doc` over the regime defaults. Unknown keys are rejected.
    static ScenarioPolicy from_json(ScenarioKind kind, const nlohmann::json& doc);
};

struct AttemptOutcome {
    enum class Result { passed, regularized, failed };
    std::size_t course = 0;
    Result result = Result::failed;
    double performance_score = 0.0;
    bool near_pass = false;

    bool operator==(const AttemptOutcome&) const = default;
};

/// Regularization trial under the historical regime. Mutates the agent's transcript and debt.
AttemptOutcome attempt_course_regularity(AgentState& agent, double ability, const Course& course,
                                         std::size_t course_index, const ScenarioPolicy& policy,
                                         int semester, RandomStream& rng);

/// 1 up to the age threshold, (1 - decay)^(age - threshold) beyond it.
double ttl_multiplier(int age, const ScenarioPolicy& policy);

/// Resolves debt items independently; resolved courses become passed and leave the queue.
std::vector<std::size_t> resolve_finals_debt(AgentState& agent, double ability,
                                             const CurriculumGraph& graph,
                                             const ScenarioPolicy& policy, RandomStream& rng,
                                             int current_semester);

/// Pass probability of the promotion score model at a given mean score.
double promotion_pass_probability(double mean_score, const ScenarioPolicy& policy);

struct EffectiveFriction {
    double friction = 0.0;
    bool clamped = false;
};

EffectiveFriction effective_friction(const Course& course, const ScenarioPolicy& policy,
                                     double representative_ability);

/// Per-course frictions for a regime, in course index order.
std::vector<EffectiveFriction> effective_frictions(const CurriculumGraph& graph,
                                                   const ScenarioPolicy& policy,
                                                   double representative_ability);

/// Promotion attempt (B/C). Mutates failure counters on the agent.
AttemptOutcome attempt_course_promotion(AgentState& agent, double ability, const Course& course,
                                        std::size_t course_index, double friction,
                                        const ScenarioPolicy& policy, RandomStream& rng);

struct RemedialCandidate {
    int agent_id = 0;
    std::size_t course = 0;
    Resilience resilience = Resilience::medium;
    double performance_score = 0.0;

    bool operator==(const RemedialCandidate&) const = default;
};

/// One attempt from the semester just ended, as seen by the safety-net barrier.
struct SemesterOutcome {
    int agent_id = 0;
    Resilience resilience = Resilience::medium;
    bool bottleneck = false;
    AttemptOutcome outcome;
};

std::vector<RemedialCandidate> collect_remedial_pool(std::span<const SemesterOutcome> outcomes,
                                                     const ScenarioPolicy& policy);

struct RemedialDecision {
    int agent_id = 0;
    std::size_t course = 0;
    bool accepted = false;
    Resilience priority_class = Resilience::medium;
    double performance_score = 0.0;

    bool operator==(const RemedialDecision&) const = default;
};

/// Slots per semester: floor(fraction * active_count / 2).
int remedial_capacity(int active_count, const ScenarioPolicy& policy);

/**
 * Decides every pool member in priority order: LOW before MEDIUM before HIGH,
 * then descending score, then ascending agent id. Accepts the first `capacity`.
 * Decisions are returned in that priority order.
 */
std::vector<RemedialDecision> allocate_remedial(std::span<const RemedialCandidate> pool,
                                                int active_count, const ScenarioPolicy& policy);

} // namespace cohortsim
