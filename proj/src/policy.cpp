#include "cohortsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cohortsim {

using nlohmann::json;

ScenarioPolicy ScenarioPolicy::defaults(ScenarioKind kind)
{
    ScenarioPolicy p;
    p.kind = kind;
    return p;
}

void ScenarioPolicy::validate() const
{
    const std::string where = "scenarios." + std::string(scenario_key(kind));
    auto unit = [&](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ConfigError(where + "." + name + " must lie in [0,1]");
        }
    };
    if (!(reg_success_scale > 0.0)) {
        throw ConfigError(where + ".reg_success_scale must be positive");
    }
    unit(debt_resolution_base, "debt_resolution_base");
    if (ttl_age_threshold < 0) {
        throw ConfigError(where + ".ttl_age_threshold must be >= 0");
    }
    unit(ttl_success_decay, "ttl_success_decay");
    unit(bottleneck_target_fail_rate, "bottleneck_target_fail_rate");
    if (!(nonbottleneck_friction_multiplier >= 1.0)) {
        throw ConfigError(where + ".nonbottleneck_friction_multiplier must be >= 1");
    }
    if (!(performance_sd >= 0.0)) {
        throw ConfigError(where + ".performance_sd must be >= 0");
    }
    if (!(representative_ability < 1.0)) {
        throw ConfigError(where + ".representative_ability must be < 1");
    }
    if (!(near_pass_low < near_pass_high && near_pass_high <= pass_threshold)) {
        throw ConfigError(where + ": near-pass band must satisfy low < high <= pass_threshold");
    }
    unit(remedial_capacity_fraction, "remedial_capacity_fraction");
    if (!(remedial_stress_cost >= 0.0) || !(remedial_belonging_bonus >= 0.0)) {
        throw ConfigError(where + ": remedial stress cost and belonging bonus must be >= 0");
    }
}

json ScenarioPolicy::to_json() const
{
    return json{{"kind", scenario_label(kind)},
                {"reg_success_scale", reg_success_scale},
                {"debt_resolution_base", debt_resolution_base},
                {"ttl_age_threshold", ttl_age_threshold},
                {"ttl_success_decay", ttl_success_decay},
                {"bottleneck_target_fail_rate", bottleneck_target_fail_rate},
                {"nonbottleneck_friction_multiplier", nonbottleneck_friction_multiplier},
                {"pass_threshold", pass_threshold},
                {"performance_sd", performance_sd},
                {"representative_ability", representative_ability},
                {"near_pass_band", {near_pass_low, near_pass_high}},
                {"remedial_capacity_fraction", remedial_capacity_fraction},
                {"remedial_mode", remedial_mode == RemedialMode::guaranteed ? "GUARANTEED"
                                                                            : "PROBABILISTIC"},
                {"remedial_pass_prob_boost", remedial_pass_prob_boost},
                {"remedial_stress_cost", remedial_stress_cost},
                {"remedial_belonging_bonus", remedial_belonging_bonus}};
}

ScenarioPolicy ScenarioPolicy::from_json(ScenarioKind kind, const json& doc)
{
    ScenarioPolicy p = defaults(kind);
    if (!doc.is_object()) {
        throw ConfigError("scenarios." + std::string(scenario_key(kind)) + ": expected an object");
    }
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "kind") {
                if (parse_scenario(value.get<std::string>()) != kind) {
                    throw ConfigError("scenarios." + std::string(scenario_key(kind)) +
                                      ".kind does not match its key");
                }
            } else if (key == "reg_success_scale") {
                p.reg_success_scale = value.get<double>();
            } else if (key == "debt_resolution_base") {
                p.debt_resolution_base = value.get<double>();
            } else if (key == "ttl_age_threshold") {
                p.ttl_age_threshold = value.get<int>();
            } else if (key == "ttl_success_decay") {
                p.ttl_success_decay = value.get<double>();
            } else if (key == "bottleneck_target_fail_rate") {
                p.bottleneck_target_fail_rate = value.get<double>();
            } else if (key == "nonbottleneck_friction_multiplier") {
                p.nonbottleneck_friction_multiplier = value.get<double>();
            } else if (key == "pass_threshold") {
                p.pass_threshold = value.get<double>();
            } else if (key == "performance_sd") {
                p.performance_sd = value.get<double>();
            } else if (key == "representative_ability") {
                p.representative_ability = value.get<double>();
            } else if (key == "near_pass_band") {
                auto band = value.get<std::vector<double>>();
                if (band.size() != 2) {
                    throw ConfigError("near_pass_band must have two elements");
                }
                p.near_pass_low = band[0];
                p.near_pass_high = band[1];
            } else if (key == "remedial_capacity_fraction") {
                p.remedial_capacity_fraction = value.get<double>();
            } else if (key == "remedial_mode") {
                const auto mode = value.get<std::string>();
                if (mode == "GUARANTEED") {
                    p.remedial_mode = RemedialMode::guaranteed;
                } else if (mode == "PROBABILISTIC") {
                    p.remedial_mode = RemedialMode::probabilistic;
                } else {
                    throw ConfigError("unknown remedial_mode '" + mode + "'");
                }
            } else if (key == "remedial_pass_prob_boost") {
                p.remedial_pass_prob_boost = value.get<double>();
            } else if (key == "remedial_stress_cost") {
                p.remedial_stress_cost = value.get<double>();
            } else if (key == "remedial_belonging_bonus") {
                p.remedial_belonging_bonus = value.get<double>();
            } else {
                throw ConfigError("scenarios." + std::string(scenario_key(kind)) +
                                  ": unknown field '" + key + "'");
            }
        } catch (const json::exception& e) {
            throw ConfigError("scenarios." + std::string(scenario_key(kind)) + "." + key + ": " +
                              e.what());
        }
    }
    p.validate();
    return p;
}

AttemptOutcome attempt_course_regularity(AgentState& agent, double ability, const Course& course,
                                         std::size_t course_index, const ScenarioPolicy& policy,
                                         int semester, RandomStream& rng)
{
    if (policy.kind != ScenarioKind::historical) {
        throw ContractError("regularity attempts only exist under the historical regime");
    }
    const double p =
        std::clamp(policy.reg_success_scale * ability * (1.0 - course.friction), 0.0, 1.0);
    AttemptOutcome out;
    out.course = course_index;
    if (rng.bernoulli(p)) {
        out.result = AttemptOutcome::Result::regularized;
        agent.transcript.mark_regularized(course_index);
        agent.finals_debt.push_back(DebtItem{course_index, semester, 0});
    } else {
        out.result = AttemptOutcome::Result::failed;
        agent.transcript.record_failure(course_index);
        if (course.is_bottleneck) {
            ++agent.killer_failures;
        }
    }
    return out;
}

double ttl_multiplier(int age, const ScenarioPolicy& policy)
{
    if (age <= policy.ttl_age_threshold) {
        return 1.0;
    }
    return std::pow(1.0 - policy.ttl_success_decay, age - policy.ttl_age_threshold);
}

std::vector<std::size_t> resolve_finals_debt(AgentState& agent, double ability,
                                             const CurriculumGraph& graph,
                                             const ScenarioPolicy& policy, RandomStream& rng,
                                             int current_semester)
{
    if (policy.kind != ScenarioKind::historical) {
        throw ContractError("finals debt only exists under the historical regime");
    }
    std::vector<std::size_t> resolved;
    std::vector<DebtItem> remaining;
    remaining.reserve(agent.finals_debt.size());
    for (auto item : agent.finals_debt) {
        item.age = current_semester - item.semester_incurred;
        const double friction = graph.course(item.course).friction;
        const double p = std::clamp(policy.debt_resolution_base * ability * (1.0 - friction) *
                                        ttl_multiplier(item.age, policy),
                                    0.0, 1.0);
        if (rng.bernoulli(p)) {
            agent.transcript.mark_passed(item.course);
            resolved.push_back(item.course);
        } else {
            remaining.push_back(item);
        }
    }
    agent.finals_debt = std::move(remaining);
    return resolved;
}

double promotion_pass_probability(double mean_score, const ScenarioPolicy& policy)
{
    // the [0,1] clamp on the score does not move mass across a threshold inside (0,1]
    if (policy.pass_threshold <= 0.0) {
        return 1.0;
    }
    if (policy.pass_threshold > 1.0) {
        return 0.0;
    }
    if (policy.performance_sd <= 0.0) {
        return mean_score >= policy.pass_threshold ? 1.0 : 0.0;
    }
    return 0.5 * std::erfc((policy.pass_threshold - mean_score) /
                           (policy.performance_sd * std::sqrt(2.0)));
}

EffectiveFriction effective_friction(const Course& course, const ScenarioPolicy& policy,
                                     double representative_ability)
{
    if (!policy.promotes()) {
        return {course.friction, false};
    }
    if (!course.is_bottleneck) {
        const double f = course.friction * policy.nonbottleneck_friction_multiplier;
        return {std::clamp(f, 0.0, 1.0), f > 1.0};
    }
    if (!(representative_ability > 0.0 && representative_ability < 1.0)) {
        throw ContractError("representative ability must lie in (0,1)");
    }
    const double target = 1.0 - policy.bottleneck_target_fail_rate;
    auto pass_at = [&](double f) {
        return promotion_pass_probability(representative_ability * (1.0 - f), policy);
    };
    // pass probability is non-increasing in friction
    if (pass_at(0.0) < target) {
        return {0.0, true};
    }
    if (pass_at(1.0) > target) {
        return {1.0, true};
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        if (pass_at(mid) >= target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {lo, false};
}

std::vector<EffectiveFriction> effective_frictions(const CurriculumGraph& graph,
                                                   const ScenarioPolicy& policy,
                                                   double representative_ability)
{
    std::vector<EffectiveFriction> out;
    out.reserve(graph.course_count());
    for (const auto& c : graph.courses()) {
        out.push_back(effective_friction(c, policy, representative_ability));
    }
    return out;
}

AttemptOutcome attempt_course_promotion(AgentState& agent, double ability, const Course& course,
                                        std::size_t course_index, double friction,
                                        const ScenarioPolicy& policy, RandomStream& rng)
{
    if (!policy.promotes()) {
        throw ContractError("promotion attempts only exist under regimes B and C");
    }
    const double mean = ability * (1.0 - friction);
    const double score = std::clamp(mean + policy.performance_sd * rng.normal(), 0.0, 1.0);

    AttemptOutcome out;
    out.course = course_index;
    out.performance_score = score;
    if (score >= policy.pass_threshold) {
        out.result = AttemptOutcome::Result::passed;
        agent.transcript.mark_passed(course_index);
        return out;
    }
    out.result = AttemptOutcome::Result::failed;
    out.near_pass = policy.kind == ScenarioKind::safety_net && course.is_bottleneck &&
                    policy.in_near_pass_band(score);
    agent.transcript.record_failure(course_index);
    if (course.is_bottleneck) {
        ++agent.killer_failures;
    }
    return out;
}

std::vector<RemedialCandidate> collect_remedial_pool(std::span<const SemesterOutcome> outcomes,
                                                     const ScenarioPolicy& policy)
{
    if (policy.kind != ScenarioKind::safety_net) {
        throw ContractError("remedial pools only exist under the safety-net regime");
    }
    std::vector<RemedialCandidate> pool;
    for (const auto& o : outcomes) {
        if (o.bottleneck && o.outcome.near_pass &&
            o.outcome.result == AttemptOutcome::Result::failed) {
            pool.push_back(RemedialCandidate{o.agent_id, o.outcome.course, o.resilience,
                                             o.outcome.performance_score});
        }
    }
    return pool;
}

int remedial_capacity(int active_count, const ScenarioPolicy& policy)
{
    if (active_count <= 0) {
        return 0;
    }
    // annual budget split evenly over two semesters; epsilon absorbs representation error
    const double slots = policy.remedial_capacity_fraction * active_count / 2.0;
    return static_cast<int>(std::floor(slots + 1e-9));
}

std::vector<RemedialDecision> allocate_remedial(std::span<const RemedialCandidate> pool,
                                                int active_count, const ScenarioPolicy& policy)
{
    if (active_count < 0) {
        throw ContractError("active_count must be non-negative");
    }
    std::vector<RemedialCandidate> order(pool.begin(), pool.end());
    std::sort(order.begin(), order.end(), [](const RemedialCandidate& a, const RemedialCandidate& b) {
        if (a.resilience != b.resilience) {
            return static_cast<int>(a.resilience) < static_cast<int>(b.resilience);
        }
        if (a.performance_score != b.performance_score) {
            return a.performance_score > b.performance_score;
        }
        if (a.agent_id != b.agent_id) {
            return a.agent_id < b.agent_id;
        }
        return a.course < b.course;
    });
    const int capacity = remedial_capacity(active_count, policy);
    std::vector<RemedialDecision> decisions;
    decisions.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        decisions.push_back(RemedialDecision{order[i].agent_id, order[i].course,
                                             static_cast<int>(i) < capacity, order[i].resilience,
                                             order[i].performance_score});
    }
    return decisions;
}

} // namespace cohortsim
