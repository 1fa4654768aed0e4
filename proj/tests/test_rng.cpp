#include "cohortsim/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace cohortsim;

TEST_SUITE("rng")
{
    TEST_CASE("a stream is a pure function of its address")
    {
        auto a = agent_stream(11, 3, 4, Purpose::attempts);
        auto b = agent_stream(11, 3, 4, Purpose::attempts);
        for (int i = 0; i < 100; ++i) {
            CHECK(a.next_u64() == b.next_u64());
        }
    }

    TEST_CASE("neighbouring addresses give different streams")
    {
        std::set<std::uint64_t> first;
        for (std::uint64_t agent = 0; agent < 20; ++agent) {
            for (std::uint64_t sem = 1; sem <= 12; ++sem) {
                for (auto p : {Purpose::attempts, Purpose::debt, Purpose::dropout}) {
                    first.insert(agent_stream(5, agent, sem, p).next_u64());
                }
            }
        }
        CHECK(first.size() == 20 * 12 * 3);
    }

    TEST_CASE("mix_key depends on word order")
    {
        CHECK(mix_key({1, 2}) != mix_key({2, 1}));
        CHECK(mix_key({1, 2}) == mix_key({1, 2}));
    }

    TEST_CASE("uniform lies in [0,1) with the right moments")
    {
        RandomStream s(42);
        double sum = 0.0;
        double sq = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double u = s.uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
            sum += u;
            sq += u * u;
        }
        CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
        CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
    }

    TEST_CASE("normal draws have zero mean and unit variance")
    {
        RandomStream s(7);
        double sum = 0.0;
        double sq = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double z = s.normal();
            sum += z;
            sq += z * z;
        }
        CHECK(std::abs(sum / n) < 0.01);
        CHECK(std::abs(sq / n - 1.0) < 0.02);
    }

    TEST_CASE("bernoulli edge probabilities")
    {
        RandomStream s(3);
        for (int i = 0; i < 1000; ++i) {
            CHECK_FALSE(s.bernoulli(0.0));
            CHECK(s.bernoulli(1.0));
            CHECK_FALSE(s.bernoulli(-0.5));
            CHECK(s.bernoulli(1.5));
        }
    }

    TEST_CASE("bernoulli frequency at 1e5 draws")
    {
        for (double p : {0.1, 0.42, 0.9}) {
            RandomStream s(mix_key({17, static_cast<std::uint64_t>(p * 100)}));
            int hits = 0;
            for (int i = 0; i < 100000; ++i) {
                hits += s.bernoulli(p) ? 1 : 0;
            }
            CHECK(std::abs(hits / 1e5 - p) <= 0.01);
        }
    }
}
