#include "cohortsim/policy.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cohortsim;
using testing::course;

namespace {

AgentState fresh_agent(int id = 0, std::size_t courses = 4)
{
    AgentState a;
    a.agent_id = id;
    a.transcript = Transcript(courses);
    return a;
}

double phi_upper(double x)
{
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

std::vector<RemedialCandidate> pool_of(int low, int medium, int high)
{
    std::vector<RemedialCandidate> pool;
    int id = 0;
    auto add = [&](int n, Resilience r) {
        for (int i = 0; i < n; ++i, ++id) {
            pool.push_back({id, 0, r, 0.5 + 0.01 * (id % 7)});
        }
    };
    add(high, Resilience::high);
    add(medium, Resilience::medium);
    add(low, Resilience::low);
    return pool;
}

} // namespace

TEST_SUITE("policy")
{
    TEST_CASE("regularity with certain success and certain failure")
    {
        auto p = ScenarioPolicy::defaults(ScenarioKind::historical);
        p.reg_success_scale = 1.0;
        RandomStream rng(1);
        const auto easy = course("A", 1, 0.0);
        const auto wall = course("B", 1, 1.0, true);
        for (int i = 0; i < 200; ++i) {
            auto a = fresh_agent();
            CHECK(attempt_course_regularity(a, 1.0, easy, 0, p, 1, rng).result ==
                  AttemptOutcome::Result::regularized);
            CHECK(a.finals_debt.size() == 1);
            CHECK(a.transcript.regularized(0));
            CHECK(attempt_course_regularity(a, 1.0, wall, 1, p, 1, rng).result ==
                  AttemptOutcome::Result::failed);
            CHECK(a.killer_failures == 1);
            CHECK(a.transcript.failed_attempts(1) == 1);
        }
    }

    TEST_CASE("regularity frequency matches ability times one minus friction")
    {
        auto p = ScenarioPolicy::defaults(ScenarioKind::historical);
        p.reg_success_scale = 1.0;
        RandomStream rng(2);
        const auto c = course("A", 1, 0.4);
        int hits = 0;
        for (int i = 0; i < 100000; ++i) {
            auto a = fresh_agent();
            hits += attempt_course_regularity(a, 0.7, c, 0, p, 1, rng).result ==
                            AttemptOutcome::Result::regularized
                        ? 1
                        : 0;
        }
        CHECK(std::abs(hits / 1e5 - 0.42) <= 0.01);
    }

    TEST_CASE("ttl multiplier")
    {
        auto p = ScenarioPolicy::defaults(ScenarioKind::historical);
        p.ttl_age_threshold = 6;
        p.ttl_success_decay = 0.5;
        CHECK(ttl_multiplier(0, p) == 1.0);
        CHECK(ttl_multiplier(6, p) == 1.0);
        CHECK(ttl_multiplier(8, p) == doctest::Approx(0.25).epsilon(1e-15));
    }

    TEST_CASE("finals debt resolution")
    {
        const CurriculumGraph g({course("A", 1, 0.0), course("B", 1, 0.2)});
        auto p = ScenarioPolicy::defaults(ScenarioKind::historical);
        RandomStream rng(3);

        SUBCASE("empty queue")
        {
            auto a = fresh_agent(0, 2);
            CHECK(resolve_finals_debt(a, 0.8, g, p, rng, 3).empty());
        }
        SUBCASE("certain resolution before the threshold")
        {
            p.debt_resolution_base = 1.0;
            for (int i = 0; i < 100; ++i) {
                auto a = fresh_agent(0, 2);
                a.transcript.mark_regularized(0);
                a.finals_debt.push_back({0, 1, 0});
                CHECK(resolve_finals_debt(a, 1.0, g, p, rng, 3) == std::vector<std::size_t>{0});
                CHECK(a.finals_debt.empty());
                CHECK(a.transcript.passed(0));
            }
        }
        SUBCASE("aged item resolves at base times ttl decay")
        {
            p.debt_resolution_base = 0.8;
            p.ttl_age_threshold = 6;
            p.ttl_success_decay = 0.5;
            int hits = 0;
            for (int i = 0; i < 100000; ++i) {
                auto a = fresh_agent(0, 2);
                a.finals_debt.push_back({0, 1, 0});
                hits += resolve_finals_debt(a, 1.0, g, p, rng, 1 + 8).size() == 1 ? 1 : 0;
            }
            CHECK(std::abs(hits / 1e5 - 0.8 * 0.25) <= 0.01);
        }
        SUBCASE("unresolved items age")
        {
            p.debt_resolution_base = 0.0;
            auto a = fresh_agent(0, 2);
            a.finals_debt.push_back({1, 2, 0});
            resolve_finals_debt(a, 0.5, g, p, rng, 7);
            REQUIRE(a.finals_debt.size() == 1);
            CHECK(a.finals_debt[0].age == 5);
        }
    }

    TEST_CASE("effective friction per regime")
    {
        const auto plain = course("A", 1, 0.3);
        const auto killer = course("K", 1, 0.6, true);
        auto a = ScenarioPolicy::defaults(ScenarioKind::historical);
        CHECK(effective_friction(plain, a, 0.6).friction == 0.3);
        CHECK(effective_friction(killer, a, 0.6).friction == 0.6);

        auto b = ScenarioPolicy::defaults(ScenarioKind::direct_promotion);
        CHECK(effective_friction(plain, b, 0.6).friction == doctest::Approx(0.36).epsilon(1e-15));

        const auto f = effective_friction(killer, b, 0.6);
        CHECK_FALSE(f.clamped);
        const double pass = promotion_pass_probability(0.6 * (1.0 - f.friction), b);
        CHECK(std::abs(pass - 0.10) <= 1e-9);
    }

    TEST_CASE("infeasible friction targets are clamped and flagged")
    {
        auto b = ScenarioPolicy::defaults(ScenarioKind::direct_promotion);
        b.bottleneck_target_fail_rate = 0.0;
        const auto f = effective_friction(course("K", 1, 0.6, true), b, 0.6);
        CHECK(f.clamped);
        CHECK(f.friction == 0.0);
    }

    TEST_CASE("deterministic promotion scores")
    {
        auto c = ScenarioPolicy::defaults(ScenarioKind::safety_net);
        c.performance_sd = 0.0;
        RandomStream rng(4);
        auto a = fresh_agent();
        const auto sure = attempt_course_promotion(a, 1.0, course("A", 1, 0.0), 0, 0.0, c, rng);
        CHECK(sure.result == AttemptOutcome::Result::passed);
        CHECK(sure.performance_score == 1.0);

        const auto close = attempt_course_promotion(a, 0.55, course("K", 1, 0.0, true), 1, 0.0, c, rng);
        CHECK(close.result == AttemptOutcome::Result::failed);
        CHECK(close.near_pass);
        CHECK(a.killer_failures == 1);

        const auto plain = attempt_course_promotion(a, 0.55, course("P", 1, 0.0), 2, 0.0, c, rng);
        CHECK_FALSE(plain.near_pass);

        auto b = ScenarioPolicy::defaults(ScenarioKind::direct_promotion);
        b.performance_sd = 0.0;
        CHECK_FALSE(attempt_course_promotion(a, 0.55, course("K", 1, 0.0, true), 1, 0.0, b, rng).near_pass);
    }

    TEST_CASE("promotion pass frequency matches the normal tail")
    {
        auto b = ScenarioPolicy::defaults(ScenarioKind::direct_promotion);
        RandomStream rng(5);
        int hits = 0;
        const auto c = course("A", 1, 0.0);
        for (int i = 0; i < 100000; ++i) {
            auto a = fresh_agent();
            hits += attempt_course_promotion(a, 0.55, c, 0, 0.0, b, rng).result ==
                            AttemptOutcome::Result::passed
                        ? 1
                        : 0;
        }
        // clamping at 0 and 1 moves no mass across 0.6
        const double oracle = phi_upper((0.6 - 0.55) / 0.15);
        CHECK(std::abs(hits / 1e5 - oracle) <= 0.01);
        CHECK(promotion_pass_probability(0.55, b) == doctest::Approx(oracle).epsilon(1e-12));
    }

    TEST_CASE("remedial pool keeps bottleneck near-passes only")
    {
        const auto c = ScenarioPolicy::defaults(ScenarioKind::safety_net);
        CHECK(collect_remedial_pool({}, c).empty());

        std::vector<SemesterOutcome> outcomes;
        for (int i = 0; i < 3; ++i) {
            outcomes.push_back({i, Resilience::low, true, {0, AttemptOutcome::Result::failed, 0.55, true}});
        }
        for (int i = 3; i < 8; ++i) {
            outcomes.push_back({i, Resilience::low, true, {0, AttemptOutcome::Result::failed, 0.2, false}});
        }
        outcomes.push_back({9, Resilience::low, false, {1, AttemptOutcome::Result::failed, 0.55, true}});
        CHECK(collect_remedial_pool(outcomes, c).size() == 3);
        CHECK_THROWS_AS(collect_remedial_pool(outcomes, ScenarioPolicy::defaults(ScenarioKind::direct_promotion)),
                        ContractError);
    }

    TEST_CASE("capacity is the semester share of the annual fraction")
    {
        const auto c = ScenarioPolicy::defaults(ScenarioKind::safety_net);
        CHECK(remedial_capacity(1343, c) == 201);
        CHECK(remedial_capacity(100, c) == 15);
        CHECK(remedial_capacity(6, c) == 0);
        CHECK(remedial_capacity(0, c) == 0);
    }

    TEST_CASE("allocation honours class priority")
    {
        auto c = ScenarioPolicy::defaults(ScenarioKind::safety_net);
        const auto pool = pool_of(4, 3, 3);
        c.remedial_capacity_fraction = 1.0;
        // capacity 5 from 10 active agents
        const auto d = allocate_remedial(pool, 10, c);
        int low = 0;
        int medium = 0;
        int high = 0;
        for (const auto& x : d) {
            if (x.accepted) {
                low += x.priority_class == Resilience::low;
                medium += x.priority_class == Resilience::medium;
                high += x.priority_class == Resilience::high;
            }
        }
        CHECK(low == 4);
        CHECK(medium == 1);
        CHECK(high == 0);
        CHECK(d.size() == pool.size());
    }

    TEST_CASE("allocation with no slots and with spare slots")
    {
        auto c = ScenarioPolicy::defaults(ScenarioKind::safety_net);
        const auto pool = pool_of(2, 2, 2);
        for (const auto& x : allocate_remedial(pool, 0, c)) {
            CHECK_FALSE(x.accepted);
        }
        c.remedial_capacity_fraction = 1.0;
        for (const auto& x : allocate_remedial(pool, 100, c)) {
            CHECK(x.accepted);
        }
    }

    TEST_CASE("within a class higher scores go first, then lower ids")
    {
        auto c = ScenarioPolicy::defaults(ScenarioKind::safety_net);
        c.remedial_capacity_fraction = 1.0;
        const std::vector<RemedialCandidate> pool{{5, 0, Resilience::low, 0.52},
                                                  {2, 0, Resilience::low, 0.58},
                                                  {1, 0, Resilience::low, 0.52}};
        const auto d = allocate_remedial(pool, 4, c);
        REQUIRE(d.size() == 3);
        CHECK(d[0].agent_id == 2);
        CHECK(d[1].agent_id == 1);
        CHECK(d[2].agent_id == 5);
        CHECK(d[0].accepted);
        CHECK(d[1].accepted);
        CHECK_FALSE(d[2].accepted);
    }

    TEST_CASE("policy validation and json round trip")
    {
        auto c = ScenarioPolicy::defaults(ScenarioKind::safety_net);
        c.near_pass_low = 0.7;
        CHECK_THROWS_AS(c.validate(), ConfigError);

        const auto p = ScenarioPolicy::defaults(ScenarioKind::safety_net);
        CHECK(ScenarioPolicy::from_json(ScenarioKind::safety_net, p.to_json()).to_json() == p.to_json());
        CHECK_THROWS_AS(ScenarioPolicy::from_json(ScenarioKind::safety_net, {{"bogus", 1}}), ConfigError);
    }
}
