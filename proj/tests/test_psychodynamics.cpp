#include "cohortsim/psychodynamics.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cohortsim;

namespace {

long double logistic_oracle(long double z)
{
    return 1.0L / (1.0L + std::exp(-z));
}

AgentState agent_with(double stress, double belonging)
{
    AgentState a;
    a.stress = stress;
    a.belonging = belonging;
    return a;
}

SemesterEvent fail_event(double friction)
{
    return SemesterEvent{SemesterEvent::Kind::fail, 0, friction, 0};
}

} // namespace

TEST_SUITE("psychodynamics")
{
    TEST_CASE("hazard matches a long double logistic on a 100-point grid")
    {
        const HazardParams params[] = {{-4.0, 3.0, -3.0}, {-2.0, 6.0, -1.0}, {-6.0, 1.0, -6.0}};
        double worst = 0.0;
        for (const auto& h : params) {
            for (int i = 0; i < 10; ++i) {
                for (int j = 0; j < 10; ++j) {
                    const double s = i / 9.0;
                    const double b = j / 9.0;
                    const long double z = static_cast<long double>(h.alpha0) +
                                          static_cast<long double>(h.alpha1) * s +
                                          static_cast<long double>(h.alpha2) * b;
                    const double err = std::abs(static_cast<long double>(dropout_hazard(s, b, h)) -
                                                logistic_oracle(z));
                    worst = std::max(worst, err);
                }
            }
        }
        CHECK(worst <= 1e-12);
    }

    TEST_CASE("hazard rises with stress and falls with belonging")
    {
        const HazardParams h{-4.0, 3.0, -3.0};
        for (int i = 0; i < 100; ++i) {
            const double lo = i / 100.0;
            const double hi = (i + 1) / 100.0;
            for (double other : {0.0, 0.3, 0.7, 1.0}) {
                CHECK(dropout_hazard(hi, other, h) > dropout_hazard(lo, other, h));
                CHECK(dropout_hazard(other, hi, h) < dropout_hazard(other, lo, h));
            }
        }
    }

    TEST_CASE("hazard reference points")
    {
        CHECK(dropout_hazard(0.3, 0.6, {0.0, 2.0, -1.0}) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(dropout_hazard(1.0, 0.0, {-4.0, 4.0, -2.0}) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(std::abs(dropout_hazard(0.5, 0.5, {-4.0, 4.0, -2.0}) - 0.04742587317756678) < 1e-12);
    }

    TEST_CASE("hazard coefficients must have the stated signs")
    {
        CHECK_THROWS_AS((HazardParams{-4.0, 0.0, -3.0}.validate()), ConfigError);
        CHECK_THROWS_AS((HazardParams{-4.0, 3.0, 0.5}.validate()), ConfigError);
        CHECK_NOTHROW((HazardParams{-4.0, 3.0, -3.0}.validate()));
    }

    TEST_CASE("sample_dropout at the extremes and in frequency")
    {
        RandomStream rng(123);
        for (int i = 0; i < 1000; ++i) {
            CHECK_FALSE(sample_dropout(0.0, rng));
            CHECK(sample_dropout(1.0, rng));
        }
        int hits = 0;
        for (int i = 0; i < 100000; ++i) {
            hits += sample_dropout(0.3, rng) ? 1 : 0;
        }
        CHECK(std::abs(hits / 1e5 - 0.3) <= 0.005);
    }

    TEST_CASE("fail raises stress by gain times friction times reactivity")
    {
        auto arch = testing::archetype(1, 1.0, 0.6);
        arch.stress_reactivity = 1.5;
        PsychUpdateParams u;
        u.stress_fail_gain = 0.1;
        u.belonging_fail_loss = 0.0;
        auto a = agent_with(0.5, 0.5);
        apply_event(a, fail_event(0.6), arch, u);
        CHECK(a.stress == doctest::Approx(0.59).epsilon(1e-12));
        CHECK(a.belonging == 0.5);
    }

    TEST_CASE("updates clamp to the unit interval")
    {
        auto arch = testing::archetype(1, 1.0, 0.6);
        PsychUpdateParams u;
        u.stress_fail_gain = 0.2;
        u.belonging_fail_loss = 0.5;
        auto a = agent_with(0.95, 0.1);
        apply_event(a, fail_event(1.0), arch, u);
        CHECK(a.stress == 1.0);
        CHECK(a.belonging == 0.0);

        u.stress_pass_relief = 0.5;
        u.belonging_pass_gain = 2.0;
        auto b = agent_with(0.1, 0.9);
        apply_event(b, SemesterEvent{SemesterEvent::Kind::pass, 0, 0.2, 0}, arch, u);
        CHECK(b.stress == 0.0);
        CHECK(b.belonging == 1.0);
    }

    TEST_CASE("pass with zero gains leaves the state alone")
    {
        auto arch = testing::archetype(1, 1.0, 0.6);
        PsychUpdateParams u;
        u.stress_pass_relief = 0.0;
        u.belonging_pass_gain = 0.0;
        auto a = agent_with(0.37, 0.61);
        const auto before = a;
        apply_event(a, SemesterEvent{SemesterEvent::Kind::pass, 0, 0.3, 0}, arch, u);
        CHECK(a == before);
    }

    TEST_CASE("pass and fail scale belonging by sensitivity")
    {
        auto arch = testing::archetype(1, 1.0, 0.6);
        arch.belonging_sensitivity = 2.0;
        PsychUpdateParams u;
        u.belonging_pass_gain = 0.03;
        u.belonging_fail_loss = 0.04;
        u.stress_fail_gain = 0.0;
        auto a = agent_with(0.5, 0.5);
        apply_event(a, SemesterEvent{SemesterEvent::Kind::pass, 0, 0.0, 0}, arch, u);
        CHECK(a.belonging == doctest::Approx(0.56));
        apply_event(a, fail_event(0.3), arch, u);
        CHECK(a.belonging == doctest::Approx(0.48));
    }

    TEST_CASE("debt tick adds stress per queued item and regularize is neutral")
    {
        auto arch = testing::archetype(1, 1.0, 0.6);
        PsychUpdateParams u;
        u.debt_stress_per_item = 0.02;
        auto a = agent_with(0.2, 0.5);
        apply_event(a, SemesterEvent{SemesterEvent::Kind::debt_tick, std::nullopt, 0.0, 4}, arch, u);
        CHECK(a.stress == doctest::Approx(0.28));
        const auto before = a;
        apply_event(a, SemesterEvent{SemesterEvent::Kind::regularize, 2, 0.5, 0}, arch, u);
        CHECK(a == before);
    }

    TEST_CASE("remedial events use their own constants")
    {
        auto arch = testing::archetype(1, 1.0, 0.6);
        PsychUpdateParams u;
        u.remedial_stress_cost = 0.03;
        u.remedial_belonging_bonus = 0.05;
        auto a = agent_with(0.4, 0.4);
        apply_event(a, SemesterEvent{SemesterEvent::Kind::remedial_accept, 0, 0.5, 0}, arch, u);
        apply_event(a, SemesterEvent{SemesterEvent::Kind::remedial_success, 0, 0.5, 0}, arch, u);
        CHECK(a.stress == doctest::Approx(0.43));
        CHECK(a.belonging == doctest::Approx(0.45));
    }
}
