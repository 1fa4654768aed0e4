#include "cohortsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace cohortsim {

AgentOutcomeRow outcome_row(const AgentState& agent, ScenarioKind scenario, int replication,
                            const ArchetypeTable& archetypes)
{
    AgentOutcomeRow row;
    row.scenario = scenario;
    row.replication = replication;
    row.agent_id = agent.agent_id;
    row.archetype_id = agent.archetype_id;
    row.resilience = archetypes.by_id(agent.archetype_id).resilience;
    row.status = agent.status;
    row.dropout_semester = agent.dropout_semester;
    row.dropout_cause = agent.dropout_cause;
    row.final_stress = agent.stress;
    row.final_belonging = agent.belonging;
    row.final_debt = static_cast<int>(agent.finals_debt.size());
    row.killer_failures = agent.killer_failures;
    row.remedial_acceptances = agent.remedial_acceptances;
    row.courses_passed = static_cast<int>(agent.transcript.passed_count());
    return row;
}

std::vector<AgentOutcomeRow> outcome_rows(const ExperimentConfig& cfg,
                                          const ExperimentResult& result)
{
    std::vector<AgentOutcomeRow> rows;
    rows.reserve(result.agent_record_count());
    for (const auto& run : result.scenarios) {
        for (const auto& rep : run.replications) {
            for (const auto& agent : rep.agents) {
                rows.push_back(outcome_row(agent, rep.scenario, rep.replication, cfg.archetypes));
            }
        }
    }
    return rows;
}

std::vector<AgentOutcomeRow> rows_for(std::span<const AgentOutcomeRow> rows, ScenarioKind kind)
{
    std::vector<AgentOutcomeRow> out;
    for (const auto& r : rows) {
        if (r.scenario == kind) {
            out.push_back(r);
        }
    }
    return out;
}

std::vector<ScenarioKind> scenarios_in(std::span<const AgentOutcomeRow> rows)
{
    bool seen[3] = {false, false, false};
    for (const auto& r : rows) {
        seen[static_cast<int>(r.scenario)] = true;
    }
    std::vector<ScenarioKind> out;
    for (int k = 0; k < 3; ++k) {
        if (seen[k]) {
            out.push_back(static_cast<ScenarioKind>(k));
        }
    }
    return out;
}

namespace {

// Row indices grouped by replication index, ascending.
std::map<int, std::vector<const AgentOutcomeRow*>> by_replication(
    std::span<const AgentOutcomeRow> rows)
{
    std::map<int, std::vector<const AgentOutcomeRow*>> groups;
    for (const auto& r : rows) {
        groups[r.replication].push_back(&r);
    }
    return groups;
}

double nan()
{
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

DropoutHistories dropout_histories(std::span<const ReplicationResult> reps)
{
    DropoutHistories out;
    out.reserve(reps.size());
    for (const auto& rep : reps) {
        std::vector<int> h;
        h.reserve(rep.agents.size());
        for (const auto& a : rep.agents) {
            h.push_back(a.dropout_semester.value_or(0));
        }
        out.push_back(std::move(h));
    }
    return out;
}

DropoutHistories dropout_histories(std::span<const AgentOutcomeRow> rows)
{
    DropoutHistories out;
    for (const auto& [rep, group] : by_replication(rows)) {
        std::vector<int> h;
        h.reserve(group.size());
        for (const auto* r : group) {
            h.push_back(r->dropout_semester.value_or(0));
        }
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<double> km_dropout_curve(const DropoutHistories& histories, int horizon)
{
    if (histories.empty()) {
        throw ContractError("dropout curve requested for an empty result set");
    }
    std::vector<double> curve(static_cast<std::size_t>(std::max(horizon, 0)), 0.0);
    for (int s = 1; s <= horizon; ++s) {
        double sum = 0.0;
        for (const auto& rep : histories) {
            if (rep.empty()) {
                continue;
            }
            const auto dropped = std::count_if(rep.begin(), rep.end(),
                                               [s](int d) { return d > 0 && d <= s; });
            sum += static_cast<double>(dropped) / static_cast<double>(rep.size());
        }
        curve[static_cast<std::size_t>(s - 1)] = sum / static_cast<double>(histories.size());
    }
    return curve;
}

double dropout_rate_for(std::span<const AgentOutcomeRow> rows, Resilience cls)
{
    long members = 0;
    long dropped = 0;
    for (const auto& r : rows) {
        if (r.resilience == cls) {
            ++members;
            dropped += r.status == AgentStatus::dropped ? 1 : 0;
        }
    }
    if (members == 0) {
        throw ContractError("resilience class " + std::string(resilience_label(cls)) +
                            " has no agents");
    }
    return static_cast<double>(dropped) / static_cast<double>(members);
}

double equity_gap(std::span<const AgentOutcomeRow> rows, Resilience low, Resilience high)
{
    return dropout_rate_for(rows, low) - dropout_rate_for(rows, high);
}

ScenarioSummary summarize_scenario(std::span<const AgentOutcomeRow> rows)
{
    if (rows.empty()) {
        throw ContractError("cannot summarise an empty result set");
    }
    ScenarioSummary s;
    s.scenario = rows.front().scenario;
    for (const auto& r : rows) {
        if (r.scenario != s.scenario) {
            throw ContractError("summarize_scenario expects rows of a single scenario");
        }
    }
    const auto groups = by_replication(rows);
    s.n_replications = static_cast<int>(groups.size());
    s.n_agents = static_cast<int>(groups.begin()->second.size());

    std::vector<double> rep_rates;
    double grad_sum = 0.0;
    for (const auto& [rep, group] : groups) {
        long dropped = 0;
        long graduated = 0;
        for (const auto* r : group) {
            dropped += r->status == AgentStatus::dropped ? 1 : 0;
            graduated += r->status == AgentStatus::graduated ? 1 : 0;
        }
        rep_rates.push_back(static_cast<double>(dropped) / static_cast<double>(group.size()));
        grad_sum += static_cast<double>(graduated) / static_cast<double>(group.size());
    }
    double rate_sum = 0.0;
    for (double r : rep_rates) {
        rate_sum += r;
    }
    const double reps = static_cast<double>(rep_rates.size());
    s.overall_dropout_rate = rate_sum / reps;
    s.overall_graduation_rate = grad_sum / reps;
    if (rep_rates.size() > 1) {
        double ss = 0.0;
        for (double r : rep_rates) {
            ss += (r - s.overall_dropout_rate) * (r - s.overall_dropout_rate);
        }
        s.dropout_rate_std = std::sqrt(ss / (reps - 1.0));
    }

    std::vector<int> times;
    long normative = 0;
    long academic = 0;
    long other = 0;
    double debt = 0.0;
    double killer = 0.0;
    double remedial = 0.0;
    for (const auto& r : rows) {
        debt += r.final_debt;
        killer += r.killer_failures;
        remedial += r.remedial_acceptances;
        if (r.status != AgentStatus::dropped) {
            continue;
        }
        times.push_back(r.dropout_semester.value_or(0));
        switch (r.dropout_cause.value_or(DropoutCause::other)) {
        case DropoutCause::normative:
            ++normative;
            break;
        case DropoutCause::academic:
            ++academic;
            break;
        case DropoutCause::other:
            ++other;
            break;
        }
    }
    const double n = static_cast<double>(rows.size());
    s.mean_final_debt = debt / n;
    s.mean_killer_failures = killer / n;
    s.mean_remedial_acceptances = remedial / n;

    s.n_dropped = static_cast<int>(times.size());
    if (!times.empty()) {
        const double d = static_cast<double>(times.size());
        s.normative_dropout_frac = static_cast<double>(normative) / d;
        s.academic_dropout_frac = static_cast<double>(academic) / d;
        s.other_dropout_frac = static_cast<double>(other) / d;
        double sum = 0.0;
        for (int t : times) {
            sum += t;
        }
        s.mean_time_to_event = sum / d;
        std::sort(times.begin(), times.end());
        const std::size_t mid = times.size() / 2;
        s.median_time_to_event = times.size() % 2 == 1
                                     ? static_cast<double>(times[mid])
                                     : 0.5 * (times[mid - 1] + times[mid]);
    }

    bool has_low = false;
    bool has_high = false;
    for (const auto& r : rows) {
        has_low = has_low || r.resilience == Resilience::low;
        has_high = has_high || r.resilience == Resilience::high;
    }
    s.dropout_rate_low_resilience = has_low ? dropout_rate_for(rows, Resilience::low) : nan();
    s.dropout_rate_high_resilience = has_high ? dropout_rate_for(rows, Resilience::high) : nan();
    s.equity_gap_low_vs_high_resilience =
        s.dropout_rate_low_resilience - s.dropout_rate_high_resilience;
    return s;
}

std::vector<ScenarioSummary> summarize_all(std::span<const AgentOutcomeRow> rows)
{
    std::vector<ScenarioSummary> out;
    for (auto kind : scenarios_in(rows)) {
        const auto subset = rows_for(rows, kind);
        out.push_back(summarize_scenario(subset));
    }
    return out;
}

TrajectorySeries psychosocial_trajectories(std::span<const ReplicationResult> reps)
{
    if (reps.empty()) {
        throw ContractError("trajectories requested for an empty result set");
    }
    TrajectorySeries t;
    const std::size_t horizon = reps.front().semesters.size();
    t.cumulative_dropout = km_dropout_curve(dropout_histories(reps), static_cast<int>(horizon));
    t.mean_stress_active.assign(horizon, 0.0);
    t.mean_belonging_active.assign(horizon, 0.0);
    for (std::size_t s = 0; s < horizon; ++s) {
        double stress = 0.0;
        double belonging = 0.0;
        int counted = 0;
        for (const auto& rep : reps) {
            if (rep.semesters[s].active > 0) {
                stress += rep.semesters[s].mean_stress_active;
                belonging += rep.semesters[s].mean_belonging_active;
                ++counted;
            }
        }
        t.mean_stress_active[s] = counted ? stress / counted : nan();
        t.mean_belonging_active[s] = counted ? belonging / counted : nan();
    }
    double stress = 0.0;
    double belonging = 0.0;
    std::size_t n = 0;
    for (const auto& rep : reps) {
        for (const auto& a : rep.agents) {
            stress += a.stress;
            belonging += a.belonging;
            ++n;
        }
    }
    if (n > 0) {
        t.final_mean_stress = stress / static_cast<double>(n);
        t.final_mean_belonging = belonging / static_cast<double>(n);
    }
    return t;
}

double mean_final_stress(std::span<const AgentOutcomeRow> rows)
{
    if (rows.empty()) {
        throw ContractError("mean final stress of an empty result set");
    }
    double sum = 0.0;
    for (const auto& r : rows) {
        sum += r.final_stress;
    }
    return sum / static_cast<double>(rows.size());
}

double mean_final_belonging(std::span<const AgentOutcomeRow> rows)
{
    if (rows.empty()) {
        throw ContractError("mean final belonging of an empty result set");
    }
    double sum = 0.0;
    for (const auto& r : rows) {
        sum += r.final_belonging;
    }
    return sum / static_cast<double>(rows.size());
}

CurveConsistency validate_dropout_curve_consistency(std::span<const AgentOutcomeRow> rows,
                                                    int horizon, double tolerance)
{
    CurveConsistency c;
    const auto curve = km_dropout_curve(dropout_histories(rows), horizon);
    c.final_cumulative = curve.empty() ? 0.0 : curve.back();
    c.overall_dropout_rate = summarize_scenario(rows).overall_dropout_rate;
    c.ok = std::abs(c.final_cumulative - c.overall_dropout_rate) <= tolerance;
    return c;
}

} // namespace cohortsim
