#include "cohortsim/curriculum.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

using namespace cohortsim;
using testing::course;

namespace {

const char* const kTwoCourses = R"({"courses": [
  {"id": "A", "name": "a", "nominal_semester": 1, "friction": 0.1, "is_bottleneck": false, "prerequisites": []},
  {"id": "B", "name": "b", "nominal_semester": 2, "friction": 0.1, "is_bottleneck": false, "prerequisites": ["A"]}
]})";

std::vector<std::string> ids_of(const CurriculumGraph& g, const std::vector<std::size_t>& idx)
{
    std::vector<std::string> out;
    for (auto i : idx) {
        out.push_back(g.course(i).id);
    }
    return out;
}

// Every simple directed cycle, as the set of its node ids, by brute force over id permutations.
std::set<std::set<std::string>> brute_force_cycles(const std::vector<Course>& courses)
{
    std::map<std::string, std::set<std::string>> requires_;
    std::vector<std::string> ids;
    for (const auto& c : courses) {
        ids.push_back(c.id);
        requires_[c.id].insert(c.prerequisites.begin(), c.prerequisites.end());
    }
    std::set<std::set<std::string>> cycles;
    std::sort(ids.begin(), ids.end());
    const auto n = ids.size();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::string> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                members.push_back(ids[i]);
            }
        }
        std::sort(members.begin(), members.end());
        do {
            bool closed = true;
            for (std::size_t k = 0; k < members.size() && closed; ++k) {
                closed = requires_[members[k]].count(members[(k + 1) % members.size()]) > 0;
            }
            if (closed) {
                cycles.insert({members.begin(), members.end()});
            }
        } while (std::next_permutation(members.begin(), members.end()));
    }
    return cycles;
}

bool reaches_bottleneck(const CurriculumGraph& g, std::size_t start)
{
    std::map<std::string, const Course*> by_id;
    for (const auto& c : g.courses()) {
        by_id[c.id] = &c;
    }
    std::set<std::string> seen;
    std::vector<std::string> stack(g.course(start).prerequisites);
    while (!stack.empty()) {
        auto id = stack.back();
        stack.pop_back();
        if (!seen.insert(id).second) {
            continue;
        }
        const Course* c = by_id.at(id);
        if (c->is_bottleneck) {
            return true;
        }
        stack.insert(stack.end(), c->prerequisites.begin(), c->prerequisites.end());
    }
    return false;
}

} // namespace

TEST_SUITE("curriculum")
{
    TEST_CASE("minimal chain loads as two nodes and one edge")
    {
        const auto g = load_curriculum(kTwoCourses);
        REQUIRE(g.course_count() == 2);
        CHECK(g.prerequisite_indices(*g.index_of("A")).empty());
        REQUIRE(g.prerequisite_indices(*g.index_of("B")).size() == 1);
        CHECK(g.prerequisite_indices(*g.index_of("B"))[0] == *g.index_of("A"));
    }

    TEST_CASE("two-course cycle is rejected naming both courses")
    {
        const char* text = R"({"courses": [
          {"id": "A", "name": "a", "nominal_semester": 1, "friction": 0.1, "is_bottleneck": false, "prerequisites": ["B"]},
          {"id": "B", "name": "b", "nominal_semester": 1, "friction": 0.1, "is_bottleneck": false, "prerequisites": ["A"]}
        ]})";
        try {
            load_curriculum(text);
            FAIL("expected a ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("cycle") != std::string::npos);
            CHECK(msg.find("A") != std::string::npos);
            CHECK(msg.find("B") != std::string::npos);
        }
    }

    TEST_CASE("malformed documents raise ConfigError")
    {
        CHECK_THROWS_AS(load_curriculum("not json"), ConfigError);
        CHECK_THROWS_AS(load_curriculum(R"({"courses": [{"id": "A"}]})"), ConfigError);
        CHECK_THROWS_AS(load_curriculum(R"({"lessons": []})"), ConfigError);
    }

    TEST_CASE("shipped curriculum has 42 courses and three first-year bottlenecks")
    {
        const auto g = load_curriculum_file(std::string(COHORTSIM_DATA_DIR) + "/curriculum_default.json");
        CHECK(g.course_count() == 42);
        std::set<std::string> names;
        for (const auto& c : g.courses()) {
            if (c.is_bottleneck) {
                CHECK(c.nominal_semester <= 2);
                names.insert(c.name);
            }
        }
        CHECK(names == std::set<std::string>{"Calculus I", "Physics I", "Algebra"});
        CHECK(validate_graph(g).ok());
    }

    TEST_CASE("friction out of range gives exactly one finding")
    {
        const CurriculumGraph g({course("A", 1, 0.2), course("B", 2, 1.3, false, {"A"})});
        const auto r = validate_graph(g);
        REQUIRE(r.findings.size() == 1);
        CHECK(r.findings[0].kind == Finding::Kind::friction_out_of_range);
        CHECK(r.findings[0].course_ids == std::vector<std::string>{"B"});
    }

    TEST_CASE("three-cycle finding agrees with brute-force enumeration")
    {
        const std::vector<Course> courses{course("A", 1, 0.1, false, {"C"}),
                                          course("B", 1, 0.1, false, {"A"}),
                                          course("C", 1, 0.1, false, {"B"})};
        const auto r = validate_graph(CurriculumGraph(courses));
        REQUIRE(r.findings.size() == 1);
        CHECK(r.findings[0].kind == Finding::Kind::cycle);
        const auto& ids = r.findings[0].course_ids;
        const auto expected = brute_force_cycles(courses);
        REQUIRE(expected.size() == 1);
        CHECK(std::set<std::string>(ids.begin(), ids.end()) == *expected.begin());
        CHECK(ids.size() == 3);
    }

    TEST_CASE("dangling, self and duplicate references are reported")
    {
        const CurriculumGraph g({course("A", 1, 0.1, false, {"A"}), course("B", 1, 0.1, false, {"Z"}),
                                 course("B", 2, 0.1)});
        const auto r = validate_graph(g);
        std::set<Finding::Kind> kinds;
        for (const auto& f : r.findings) {
            kinds.insert(f.kind);
        }
        CHECK(kinds.count(Finding::Kind::self_prerequisite) == 1);
        CHECK(kinds.count(Finding::Kind::dangling_prerequisite) == 1);
        CHECK(kinds.count(Finding::Kind::duplicate_id) == 1);
    }

    TEST_CASE("available courses follow prerequisites and regime")
    {
        const CurriculumGraph g({course("A", 1, 0.1), course("B", 2, 0.1, false, {"A"})});
        const auto a = *g.index_of("A");
        Transcript empty(2);
        CHECK(ids_of(g, available_courses(g, empty, ScenarioKind::direct_promotion, 8)) ==
              std::vector<std::string>{"A"});

        Transcript reg(2);
        reg.mark_regularized(a);
        CHECK(ids_of(g, available_courses(g, reg, ScenarioKind::historical, 8)) ==
              std::vector<std::string>{"B"});
        CHECK(ids_of(g, available_courses(g, reg, ScenarioKind::direct_promotion, 8)) ==
              std::vector<std::string>{"A"});

        Transcript passed(2);
        passed.mark_passed(a);
        CHECK(ids_of(g, available_courses(g, passed, ScenarioKind::direct_promotion, 8)) ==
              std::vector<std::string>{"B"});
    }

    TEST_CASE("workload cap truncates in plan order")
    {
        const CurriculumGraph g({course("E", 2, 0.1), course("D", 1, 0.1), course("C", 1, 0.1),
                                 course("B", 3, 0.1), course("A", 2, 0.1)});
        Transcript t(5);
        CHECK(ids_of(g, available_courses(g, t, ScenarioKind::historical, 3)) ==
              std::vector<std::string>{"C", "D", "A"});
        CHECK(available_courses(g, t, ScenarioKind::historical, 0).empty());
    }

    TEST_CASE("passing a regularized course clears the regularized mark")
    {
        Transcript t(3);
        t.mark_regularized(1);
        CHECK(t.regularized(1));
        CHECK(t.regularized_count() == 1);
        t.mark_passed(1);
        CHECK_FALSE(t.regularized(1));
        CHECK(t.passed(1));
        CHECK(t.passed_count() == 1);
        t.mark_passed(1);
        CHECK(t.passed_count() == 1);
    }

    TEST_CASE("generator is deterministic in its seed")
    {
        GeneratorConfig p;
        const auto a = generate_synthetic_curriculum(p, 7);
        const auto b = generate_synthetic_curriculum(p, 7);
        CHECK(a.to_json() == b.to_json());
        CHECK(a.course_count() == 42);
        CHECK(a.bottleneck_count() == 3);
        CHECK(validate_graph(a).ok());
    }

    TEST_CASE("single-course generator output has no edges")
    {
        GeneratorConfig p;
        p.course_count = 1;
        p.bottleneck_count = 0;
        p.bottleneck_frictions.clear();
        p.bottleneck_names.clear();
        const auto g = generate_synthetic_curriculum(p, 1);
        REQUIRE(g.course_count() == 1);
        CHECK(g.course(0).prerequisites.empty());
    }

    TEST_CASE("every later course of the generated fixture sits behind a bottleneck")
    {
        const auto g = generate_synthetic_curriculum(GeneratorConfig{}, 7);
        for (std::size_t i = 0; i < g.course_count(); ++i) {
            if (g.course(i).nominal_semester > 2) {
                CHECK_MESSAGE(reaches_bottleneck(g, i), g.course(i).id);
            }
        }
    }

    TEST_CASE("downstream_of agrees with a naive reachability search")
    {
        const auto g = generate_synthetic_curriculum(GeneratorConfig{}, 11);
        for (std::size_t b = 0; b < g.course_count(); ++b) {
            std::set<std::size_t> naive;
            bool grew = true;
            while (grew) {
                grew = false;
                for (std::size_t i = 0; i < g.course_count(); ++i) {
                    if (naive.count(i)) {
                        continue;
                    }
                    for (auto p : g.prerequisite_indices(i)) {
                        if (p == b || naive.count(p)) {
                            naive.insert(i);
                            grew = true;
                            break;
                        }
                    }
                }
            }
            const auto d = downstream_of(g, b);
            CHECK(std::set<std::size_t>(d.begin(), d.end()) == naive);
        }
    }

    TEST_CASE("generator config round-trips through json")
    {
        GeneratorConfig p;
        p.chain_density = 0.3;
        p.course_count = 30;
        const auto q = GeneratorConfig::from_json(p.to_json());
        CHECK(q.to_json() == p.to_json());
    }

    TEST_CASE("curriculum json round-trips")
    {
        const auto g = generate_synthetic_curriculum(GeneratorConfig{}, 3);
        CHECK(curriculum_from_json(g.to_json()).to_json() == g.to_json());
    }
}
