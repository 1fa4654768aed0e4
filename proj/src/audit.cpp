#include "cohortsim/audit.hpp"

#include "cohortsim/output.hpp"

#include <cmath>
#include <map>
#include <set>

namespace cohortsim {

using nlohmann::json;
namespace fs = std::filesystem;

bool AuditReport::passed() const
{
    for (const auto& c : checks) {
        if (c.status == CheckStatus::fail) {
            return false;
        }
    }
    return true;
}

const AuditCheck* AuditReport::find(std::string_view name) const
{
    for (const auto& c : checks) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

json AuditReport::to_json() const
{
    json list = json::array();
    for (const auto& c : checks) {
        const char* status = c.status == CheckStatus::pass   ? "pass"
                             : c.status == CheckStatus::fail ? "fail"
                                                             : "skipped";
        list.push_back({{"name", c.name},
                        {"status", status},
                        {"observed", c.observed},
                        {"expected", c.expected},
                        {"detail", c.detail}});
    }
    return {{"passed", passed()}, {"checks", std::move(list)}};
}

namespace {

CheckStatus verdict(bool ok)
{
    return ok ? CheckStatus::pass : CheckStatus::fail;
}

json by_label(const std::map<ScenarioKind, double>& values)
{
    json j = json::object();
    for (const auto& [k, v] : values) {
        j[std::string(scenario_label(k))] = v;
    }
    return j;
}

const ScenarioSummary* summary_of(std::span<const ScenarioSummary> summaries, ScenarioKind k)
{
    for (const auto& s : summaries) {
        if (s.scenario == k) {
            return &s;
        }
    }
    return nullptr;
}

// A < C < B on `value`, skipped unless all three scenarios are present.
AuditCheck ordering_check(std::string name, std::span<const ScenarioSummary> summaries,
                          double ScenarioSummary::*value, bool require_positive)
{
    AuditCheck c;
    c.name = std::move(name);
    c.expected = require_positive ? "0 < A < C < B" : "A < C < B";
    const auto* a = summary_of(summaries, ScenarioKind::historical);
    const auto* b = summary_of(summaries, ScenarioKind::direct_promotion);
    const auto* s = summary_of(summaries, ScenarioKind::safety_net);
    if (!a || !b || !s) {
        c.detail = "needs all three scenarios";
        return c;
    }
    const double va = a->*value;
    const double vb = b->*value;
    const double vc = s->*value;
    c.observed = by_label({{ScenarioKind::historical, va},
                           {ScenarioKind::direct_promotion, vb},
                           {ScenarioKind::safety_net, vc}});
    const bool ok = va < vc && vc < vb && (!require_positive || va > 0.0);
    c.status = verdict(ok);
    if (!ok) {
        c.detail = "ordering violated";
    }
    return c;
}

bool close(double a, double b, double tol)
{
    if (std::isnan(a) || std::isnan(b)) {
        return std::isnan(a) && std::isnan(b);
    }
    return std::abs(a - b) <= tol;
}

bool close(const std::optional<double>& a, const std::optional<double>& b, double tol)
{
    if (!a || !b) {
        return a.has_value() == b.has_value();
    }
    return close(*a, *b, tol);
}

} // namespace

AuditReport audit_outputs(std::span<const AgentOutcomeRow> rows,
                          std::span<const ScenarioSummary> summaries, const json& config_effective)
{
    AuditReport report;
    const json derived = config_effective.value("derived", json::object());
    const auto kinds = scenarios_in(rows);

    {
        AuditCheck c;
        c.name = "record_count";
        c.observed = rows.size();
        if (derived.contains("total_agent_records")) {
            const auto expected = derived["total_agent_records"].get<long long>();
            c.expected = expected;
            c.status = verdict(static_cast<long long>(rows.size()) == expected);
            if (c.status == CheckStatus::fail) {
                c.detail = "agent_outcomes_all_runs.csv has " + std::to_string(rows.size()) +
                           " rows, expected cohort x scenarios x replications = " +
                           std::to_string(expected);
            }
        } else {
            c.detail = "config_effective.json lacks derived.total_agent_records";
            c.status = CheckStatus::fail;
        }
        report.checks.push_back(std::move(c));
    }

    {
        AuditCheck c;
        c.name = "metadata_matches_counts";
        std::map<ScenarioKind, std::map<int, std::set<int>>> agents;
        for (const auto& r : rows) {
            agents[r.scenario][r.replication].insert(r.agent_id);
        }
        json observed = json::object();
        std::vector<std::string> problems;
        const int cohort = derived.value("cohort_size", -1);
        const int reps = derived.value("replications_per_scenario", -1);
        std::set<std::string> expected_labels;
        for (const auto& l : derived.value("scenarios", json::array())) {
            expected_labels.insert(l.get<std::string>());
        }
        std::set<std::string> observed_labels;
        for (const auto& [kind, by_rep] : agents) {
            const std::string label(scenario_label(kind));
            observed_labels.insert(label);
            json per = {{"replications", by_rep.size()}};
            if (static_cast<int>(by_rep.size()) != reps) {
                problems.push_back(label + " has " + std::to_string(by_rep.size()) +
                                   " replications");
            }
            for (const auto& [rep, ids] : by_rep) {
                if (static_cast<int>(ids.size()) != cohort) {
                    problems.push_back(label + " replication " + std::to_string(rep) + " has " +
                                       std::to_string(ids.size()) + " distinct agents");
                }
            }
            observed[label] = std::move(per);
            if (const auto* s = summary_of(summaries, kind)) {
                if (s->n_agents != cohort || s->n_replications != reps) {
                    problems.push_back(label + " summary reports n_agents " +
                                       std::to_string(s->n_agents) + ", n_replications " +
                                       std::to_string(s->n_replications));
                }
            }
        }
        if (observed_labels != expected_labels) {
            problems.push_back("scenario set differs from config_effective.json");
        }
        c.observed = std::move(observed);
        c.expected = {{"cohort_size", cohort},
                      {"replications_per_scenario", reps},
                      {"scenarios", expected_labels}};
        c.status = verdict(problems.empty());
        for (const auto& p : problems) {
            c.detail += (c.detail.empty() ? "" : "; ") + p;
        }
        report.checks.push_back(std::move(c));
    }

    {
        AuditCheck c;
        c.name = "dropout_curve_consistency";
        c.expected = "|final cumulative - overall rate| <= 1e-9";
        const int horizon = config_effective.value("horizon_semesters", 12);
        bool ok = !kinds.empty();
        json observed = json::object();
        for (auto k : kinds) {
            const auto subset = rows_for(rows, k);
            const auto cc = validate_dropout_curve_consistency(subset, horizon, 1e-9);
            observed[std::string(scenario_label(k))] = {
                {"final_cumulative", cc.final_cumulative},
                {"overall_dropout_rate", cc.overall_dropout_rate}};
            ok = ok && cc.ok;
        }
        c.observed = std::move(observed);
        c.status = verdict(ok);
        report.checks.push_back(std::move(c));
    }

    report.checks.push_back(ordering_check("dropout_ordering", summaries,
                                           &ScenarioSummary::overall_dropout_rate, false));
    report.checks.push_back(ordering_check("equity_gap_ordering", summaries,
                                           &ScenarioSummary::equity_gap_low_vs_high_resilience,
                                           true));

    {
        AuditCheck c;
        c.name = "stress_ordering";
        c.expected = "C <= B < A";
        if (kinds.size() == 3) {
            std::map<ScenarioKind, double> stress;
            for (auto k : kinds) {
                stress[k] = mean_final_stress(rows_for(rows, k));
            }
            c.observed = by_label(stress);
            const double a = stress[ScenarioKind::historical];
            const double b = stress[ScenarioKind::direct_promotion];
            const double s = stress[ScenarioKind::safety_net];
            c.status = verdict(s <= b && b < a);
        } else {
            c.detail = "needs all three scenarios";
        }
        report.checks.push_back(std::move(c));
    }

    {
        AuditCheck c;
        c.name = "promotion_debt_bound";
        c.expected = {{"B_DIRECT_PROMOTION", 0.0}, {"C_SAFETY_NET_max", kSafetyNetDebtBound}};
        json observed = json::object();
        bool ok = true;
        bool any = false;
        for (auto k : {ScenarioKind::direct_promotion, ScenarioKind::safety_net}) {
            const auto subset = rows_for(rows, k);
            if (subset.empty()) {
                continue;
            }
            any = true;
            double debt = 0.0;
            for (const auto& r : subset) {
                debt += r.final_debt;
            }
            debt /= static_cast<double>(subset.size());
            observed[std::string(scenario_label(k))] = debt;
            ok = ok && (k == ScenarioKind::direct_promotion ? debt == 0.0
                                                            : debt <= kSafetyNetDebtBound);
        }
        c.observed = std::move(observed);
        c.status = any ? verdict(ok) : CheckStatus::skipped;
        report.checks.push_back(std::move(c));
    }

    {
        AuditCheck c;
        c.name = "summary_derivable_from_outcomes";
        c.expected = "every summary column within 1e-6 of its recomputation";
        constexpr double tol = 1e-6;
        std::vector<std::string> problems;
        const auto recomputed = summarize_all(rows);
        for (const auto& r : recomputed) {
            const std::string label(scenario_label(r.scenario));
            const auto* s = summary_of(summaries, r.scenario);
            if (!s) {
                problems.push_back(label + " missing from summary");
                continue;
            }
            const std::pair<const char*, bool> columns[] = {
                {"n_agents", s->n_agents == r.n_agents},
                {"n_replications", s->n_replications == r.n_replications},
                {"overall_dropout_rate", close(s->overall_dropout_rate, r.overall_dropout_rate, tol)},
                {"overall_graduation_rate",
                 close(s->overall_graduation_rate, r.overall_graduation_rate, tol)},
                {"normative_dropout_frac",
                 close(s->normative_dropout_frac, r.normative_dropout_frac, tol)},
                {"academic_dropout_frac",
                 close(s->academic_dropout_frac, r.academic_dropout_frac, tol)},
                {"other_dropout_frac", close(s->other_dropout_frac, r.other_dropout_frac, tol)},
                {"mean_time_to_event", close(s->mean_time_to_event, r.mean_time_to_event, tol)},
                {"median_time_to_event",
                 close(s->median_time_to_event, r.median_time_to_event, tol)},
                {"mean_final_debt", close(s->mean_final_debt, r.mean_final_debt, tol)},
                {"mean_killer_failures", close(s->mean_killer_failures, r.mean_killer_failures, tol)},
                {"mean_remedial_acceptances",
                 close(s->mean_remedial_acceptances, r.mean_remedial_acceptances, tol)},
                {"equity_gap_low_vs_high_resilience",
                 close(s->equity_gap_low_vs_high_resilience, r.equity_gap_low_vs_high_resilience,
                       tol)},
                {"dropout_rate_low_resilience",
                 close(s->dropout_rate_low_resilience, r.dropout_rate_low_resilience, tol)},
                {"dropout_rate_high_resilience",
                 close(s->dropout_rate_high_resilience, r.dropout_rate_high_resilience, tol)},
            };
            for (const auto& [column, ok] : columns) {
                if (!ok) {
                    problems.push_back(label + "." + column);
                }
            }
        }
        if (summaries.size() != recomputed.size()) {
            problems.push_back("summary has " + std::to_string(summaries.size()) + " rows, outcomes have " +
                               std::to_string(recomputed.size()) + " scenarios");
        }
        c.observed = problems;
        c.status = verdict(problems.empty());
        if (!problems.empty()) {
            c.detail = "columns differing from recomputation listed in observed";
        }
        report.checks.push_back(std::move(c));
    }
    return report;
}

AuditReport audit(const fs::path& dir)
{
    const auto rows = parse_agent_outcomes_csv(read_text_file(dir / kAgentOutcomesFile));
    const auto summaries = parse_summary_csv(read_text_file(dir / kSummaryFile));
    json config;
    try {
        config = json::parse(read_text_file(dir / kConfigEffectiveFile));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(kConfigEffectiveFile) + ": " + e.what());
    }
    return audit_outputs(rows, summaries, config);
}

} // namespace cohortsim
