#include "cohortsim/analysis.hpp"
#include "cohortsim/calibration.hpp"
#include "cohortsim/output.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cohortsim;

namespace {

AgentOutcomeRow row(int rep, int id, Resilience res, AgentStatus status, std::optional<int> sem = {},
                    std::optional<DropoutCause> cause = {})
{
    AgentOutcomeRow r;
    r.scenario = ScenarioKind::historical;
    r.replication = rep;
    r.agent_id = id;
    r.archetype_id = 1;
    r.resilience = res;
    r.status = status;
    r.dropout_semester = sem;
    r.dropout_cause = cause;
    return r;
}

std::vector<AgentOutcomeRow> class_rows(Resilience res, int n, int dropped, int first_id)
{
    std::vector<AgentOutcomeRow> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(i < dropped ? row(0, first_id + i, res, AgentStatus::dropped, 3, DropoutCause::academic)
                                  : row(0, first_id + i, res, AgentStatus::active));
    }
    return out;
}

// Fraction of agents with 0 < d <= 2k, by direct enumeration per year.
std::vector<double> brute_force_yearly(const std::vector<int>& d)
{
    std::vector<double> out;
    for (int year = 1; year <= 6; ++year) {
        int count = 0;
        for (int x : d) {
            if (x >= 1 && x <= 2 * year) {
                ++count;
            }
        }
        out.push_back(static_cast<double>(count) / static_cast<double>(d.size()));
    }
    return out;
}

ExperimentConfig frozen_state_config(int cohort)
{
    ExperimentConfig cfg;
    cfg.cohort_size = cohort;
    cfg.replications_per_scenario = 2;
    cfg.threads = 1;
    cfg.scenarios = {ScenarioPolicy::defaults(ScenarioKind::historical)};
    cfg.curriculum = CurriculumGraph({testing::course("A", 1, 1.0)});
    cfg.archetypes = ArchetypeTable({testing::archetype(1, 0.5, 0.5, Resilience::low, 0.9, 0.0),
                                     testing::archetype(2, 0.5, 0.5, Resilience::high, 0.3, 1.0)});
    cfg.psych = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    cfg.hazard = {-10.0, 30.0, -40.0};
    return cfg;
}

} // namespace

TEST_SUITE("analysis")
{
    TEST_CASE("yearly cumulative dropout on hand-built histories")
    {
        const DropoutHistories none{{0, 0, 0, 0}};
        CHECK(cumulative_dropout_by_year(none, 12) == std::vector<double>(6, 0.0));

        const std::vector<int> four{1, 2, 3, 0};
        const auto got = cumulative_dropout_by_year(DropoutHistories{four}, 12);
        CHECK(got == brute_force_yearly(four));
        CHECK(got == std::vector<double>{0.5, 0.75, 0.75, 0.75, 0.75, 0.75});

        const DropoutHistories all{{1, 1, 1}};
        CHECK(cumulative_dropout_by_year(all, 12) == std::vector<double>(6, 1.0));

        CHECK_THROWS_AS(cumulative_dropout_by_year(none, 10), ConfigError);
    }

    TEST_CASE("yearly curve averages replications")
    {
        const DropoutHistories h{{1, 0}, {0, 0}};
        CHECK(cumulative_dropout_by_year(h, 12)[0] == 0.25);
    }

    TEST_CASE("semester curve on small cohorts")
    {
        const auto flat = km_dropout_curve(DropoutHistories{{0, 0, 0}}, 12);
        CHECK(flat == std::vector<double>(12, 0.0));

        const auto two = km_dropout_curve(DropoutHistories{{0, 2}}, 5);
        CHECK(two == std::vector<double>{0.0, 0.5, 0.5, 0.5, 0.5});
    }

    TEST_CASE("curve end equals the overall dropout rate")
    {
        const auto cfg = testing::small_config(80, 3);
        const auto result = run_experiment(cfg);
        const auto rows = outcome_rows(cfg, result);
        for (auto k : scenarios_in(rows)) {
            const auto subset = rows_for(rows, k);
            const auto curve = km_dropout_curve(dropout_histories(subset), cfg.horizon_semesters);
            CHECK(curve.back() == doctest::Approx(summarize_scenario(subset).overall_dropout_rate).epsilon(1e-12));
            CHECK(validate_dropout_curve_consistency(subset, cfg.horizon_semesters).ok);
        }
    }

    TEST_CASE("equity gap reference values")
    {
        auto rows = class_rows(Resilience::low, 1000, 543, 0);
        const auto high = class_rows(Resilience::high, 1000, 385, 1000);
        rows.insert(rows.end(), high.begin(), high.end());
        CHECK(equity_gap(rows) == doctest::Approx(0.158).epsilon(1e-12));

        auto wider = class_rows(Resilience::low, 1000, 723, 0);
        const auto high2 = class_rows(Resilience::high, 1000, 462, 1000);
        wider.insert(wider.end(), high2.begin(), high2.end());
        CHECK(equity_gap(wider) == doctest::Approx(0.261).epsilon(1e-12));

        auto equal = class_rows(Resilience::low, 10, 4, 0);
        const auto high3 = class_rows(Resilience::high, 10, 4, 10);
        equal.insert(equal.end(), high3.begin(), high3.end());
        CHECK(equity_gap(equal) == 0.0);
    }

    TEST_CASE("empty resilience class")
    {
        const auto rows = class_rows(Resilience::low, 10, 3, 0);
        CHECK_THROWS_WITH_AS(dropout_rate_for(rows, Resilience::high), doctest::Contains("HIGH"),
                             ContractError);
        const auto s = summarize_scenario(rows);
        CHECK(std::isnan(s.dropout_rate_high_resilience));
        CHECK(std::isnan(s.equity_gap_low_vs_high_resilience));
        CHECK(s.dropout_rate_low_resilience == doctest::Approx(0.3));
    }

    TEST_CASE("summary of four hand-built records")
    {
        std::vector<AgentOutcomeRow> rows{
            row(0, 0, Resilience::low, AgentStatus::dropped, 2, DropoutCause::normative),
            row(0, 1, Resilience::high, AgentStatus::graduated),
            row(1, 0, Resilience::low, AgentStatus::dropped, 5, DropoutCause::academic),
            row(1, 1, Resilience::high, AgentStatus::active),
        };
        rows[0].final_debt = 4;
        rows[0].killer_failures = 1;
        rows[2].killer_failures = 3;
        rows[2].remedial_acceptances = 1;
        rows[3].final_debt = 2;

        const auto s = summarize_scenario(rows);
        CHECK(s.n_agents == 2);
        CHECK(s.n_replications == 2);
        CHECK(s.overall_dropout_rate == 0.5);
        CHECK(s.overall_graduation_rate == 0.25);
        CHECK(s.normative_dropout_frac == 0.5);
        CHECK(s.academic_dropout_frac == 0.5);
        CHECK(s.other_dropout_frac == 0.0);
        CHECK(s.mean_time_to_event == 3.5);
        CHECK(s.median_time_to_event == 3.5);
        CHECK(s.mean_final_debt == 1.5);
        CHECK(s.mean_killer_failures == 1.0);
        CHECK(s.mean_remedial_acceptances == 0.25);
        CHECK(s.dropout_rate_low_resilience == 1.0);
        CHECK(s.dropout_rate_high_resilience == 0.0);
        CHECK(s.equity_gap_low_vs_high_resilience == 1.0);
        CHECK(s.dropout_rate_std == 0.0);
        CHECK(s.n_dropped == 2);
    }

    TEST_CASE("median of an odd number of exits")
    {
        const std::vector<AgentOutcomeRow> rows{
            row(0, 0, Resilience::low, AgentStatus::dropped, 7, DropoutCause::other),
            row(0, 1, Resilience::low, AgentStatus::dropped, 1, DropoutCause::other),
            row(0, 2, Resilience::high, AgentStatus::dropped, 4, DropoutCause::other),
        };
        const auto s = summarize_scenario(rows);
        CHECK(s.median_time_to_event == 4.0);
        CHECK(s.mean_time_to_event == 4.0);
        CHECK(s.other_dropout_frac == 1.0);
    }

    TEST_CASE("nobody drops: time to event is undefined and written empty")
    {
        std::vector<AgentOutcomeRow> rows{row(0, 0, Resilience::low, AgentStatus::graduated),
                                          row(0, 1, Resilience::high, AgentStatus::graduated)};
        const auto s = summarize_scenario(rows);
        CHECK(s.overall_dropout_rate == 0.0);
        CHECK_FALSE(s.mean_time_to_event.has_value());
        CHECK_FALSE(s.median_time_to_event.has_value());

        const std::vector<ScenarioSummary> one{s};
        const auto text = summary_csv(one);
        const auto line = text.substr(text.find('\n') + 1);
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',' || line[i] == '\n') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
                if (i < line.size() && line[i] == '\n') {
                    break;
                }
            }
        }
        REQUIRE(fields.size() >= 10);
        CHECK(fields[8].empty());
        CHECK(fields[9].empty());
        const auto back = parse_summary_csv(text);
        REQUIRE(back.size() == 1);
        CHECK_FALSE(back[0].mean_time_to_event.has_value());
    }

    TEST_CASE("direct promotion summaries report zero debt exactly")
    {
        const auto cfg = testing::small_config(100, 2);
        const auto rows = outcome_rows(cfg, run_experiment(cfg));
        CHECK(summarize_scenario(rows_for(rows, ScenarioKind::direct_promotion)).mean_final_debt == 0.0);
    }

    TEST_CASE("final mean stress includes dropped agents")
    {
        std::vector<AgentOutcomeRow> rows{row(0, 0, Resilience::low, AgentStatus::dropped, 1, DropoutCause::other),
                                          row(0, 1, Resilience::high, AgentStatus::active)};
        rows[0].final_stress = 0.9;
        rows[1].final_stress = 0.3;
        CHECK(mean_final_stress(rows) == doctest::Approx(0.6).epsilon(1e-15));
    }

    TEST_CASE("frozen state gives flat trajectories")
    {
        auto cfg = frozen_state_config(1);
        cfg.archetypes = ArchetypeTable({testing::archetype(1, 1.0, 0.5, Resilience::high, 0.3, 1.0)});
        const auto result = run_experiment(cfg);
        const auto t = psychosocial_trajectories(result.scenarios[0].replications);
        CHECK(t.mean_stress_active == std::vector<double>(12, 0.3));
        CHECK(t.mean_belonging_active == std::vector<double>(12, 1.0));
        CHECK(t.cumulative_dropout == std::vector<double>(12, 0.0));
    }

    TEST_CASE("active means exclude agents who dropped")
    {
        const auto cfg = frozen_state_config(40);
        const auto result = run_experiment(cfg);
        const auto& reps = result.scenarios[0].replications;
        const auto t = psychosocial_trajectories(reps);
        for (double s : t.mean_stress_active) {
            CHECK(s == doctest::Approx(0.3).epsilon(1e-12));
        }
        double stress = 0.0;
        int n = 0;
        int dropped = 0;
        for (const auto& rep : reps) {
            for (const auto& a : rep.agents) {
                stress += a.stress;
                ++n;
                dropped += a.status == AgentStatus::dropped ? 1 : 0;
            }
        }
        CHECK(dropped > 0);
        CHECK(t.final_mean_stress == doctest::Approx(stress / n).epsilon(1e-12));
        CHECK(t.final_mean_stress > 0.3);
    }

    TEST_CASE("scenario helpers")
    {
        auto rows = class_rows(Resilience::low, 2, 1, 0);
        rows[1].scenario = ScenarioKind::safety_net;
        CHECK(scenarios_in(rows) == std::vector<ScenarioKind>{ScenarioKind::historical, ScenarioKind::safety_net});
        CHECK(rows_for(rows, ScenarioKind::safety_net).size() == 1);
        CHECK_THROWS_AS(summarize_scenario(std::vector<AgentOutcomeRow>{}), ContractError);
    }
}
