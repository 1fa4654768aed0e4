#pragma once

#include "cohortsim/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cohortsim {

struct Course {
    std::string id;
    std::string name;
    int nominal_semester = 1;
    double friction = 0.0;
    bool is_bottleneck = false;
    std::vector<std::string> prerequisites;
};

/**
 * Prerequisite graph over a fixed set of courses.
 *
 * Construction never throws on semantic problems (dangling prerequisites,
 * cycles, out-of-range friction); those are reported by validate_graph.
 * load_curriculum and generate_synthetic_curriculum only hand out graphs that
 * passed validation.
 */
class CurriculumGraph {
public:
    CurriculumGraph() = default;
    explicit CurriculumGraph(std::vector<Course> courses);

    const std::vector<Course>& courses() const { return courses_; }
    std::size_t course_count() const { return courses_.size(); }
    const Course& course(std::size_t index) const { return courses_.at(index); }

    std::optional<std::size_t> index_of(std::string_view id) const;

    /// Resolved prerequisite indices of a course; dangling ids are dropped.
    const std::vector<std::size_t>& prerequisite_indices(std::size_t index) const
    {
        return prereq_indices_[index];
    }

    /// Course indices ordered by (nominal_semester, id): the recommended plan.
    const std::vector<std::size_t>& plan_order() const { return plan_order_; }

    /// Position of each course when sorted by id alone.
    std::size_t id_rank(std::size_t index) const { return id_rank_[index]; }

    std::size_t bottleneck_count() const;

    nlohmann::json to_json() const;

private:
    std::vector<Course> courses_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> prereq_indices_;
    std::vector<std::size_t> plan_order_;
    std::vector<std::size_t> id_rank_;
};

struct Finding {
    enum class Kind { duplicate_id, dangling_prerequisite, self_prerequisite, friction_out_of_range,
                      nominal_semester_out_of_range, late_bottleneck, cycle };
    Kind kind;
    std::vector<std::string> course_ids;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool ok() const { return findings.empty(); }
};

ValidationReport validate_graph(const CurriculumGraph& graph);

/// Parses and validates a curriculum document. Throws ConfigError naming the offending course.
CurriculumGraph load_curriculum(std::string_view source);
CurriculumGraph curriculum_from_json(const nlohmann::json& doc);
CurriculumGraph load_curriculum_file(const std::string& path);

/// Tracks which courses an agent has passed, regularized, or failed.
class Transcript {
public:
    Transcript() = default;
    explicit Transcript(std::size_t course_count)
        : state_(course_count, State::none)
        , failed_(course_count, 0)
    {
    }

    std::size_t size() const { return state_.size(); }
    bool passed(std::size_t i) const { return state_[i] == State::passed; }
    bool regularized(std::size_t i) const { return state_[i] == State::regularized; }
    int failed_attempts(std::size_t i) const { return failed_[i]; }

    /// Passing a course removes it from the regularized set.
    void mark_passed(std::size_t i);
    void mark_regularized(std::size_t i);
    void record_failure(std::size_t i) { ++failed_[i]; }

    std::size_t passed_count() const { return passed_count_; }
    std::size_t regularized_count() const;
    int total_failed_attempts() const;

    bool operator==(const Transcript&) const = default;

private:
    enum class State : std::uint8_t { none, regularized, passed };
    std::vector<State> state_;
    std::vector<int> failed_;
    std::size_t passed_count_ = 0;
};

/**
 * Courses the agent may enrol in this semester, in plan order, truncated to
 * workload_cap. A prerequisite is satisfied when passed; under the historical
 * regime a regularized prerequisite also counts. Courses already passed or
 * sitting in finals debt are never offered.
 */
std::vector<std::size_t> available_courses(const CurriculumGraph& graph,
                                           const Transcript& transcript, ScenarioKind regime,
                                           int workload_cap);

struct GeneratorConfig {
    int course_count = 42;
    int semesters = 10;
    int bottleneck_count = 3;
    std::vector<double> bottleneck_frictions{0.62, 0.66, 0.58};
    std::vector<std::string> bottleneck_names{"Calculus I", "Physics I", "Algebra"};
    double friction_min = 0.04;
    double friction_max = 0.20;
    /// Probability of each extra prerequisite edge to an earlier course.
    double chain_density = 0.15;
    /// Minimum share of non-year-1 courses each bottleneck must transitively block.
    double min_blocked_share = 0.6;

    nlohmann::json to_json() const;
    static GeneratorConfig from_json(const nlohmann::json& doc);
};

/// Deterministic in (params, seed). Throws ConfigError on infeasible params.
CurriculumGraph generate_synthetic_curriculum(const GeneratorConfig& params, std::uint64_t seed);

/// Indices of courses transitively requiring `index` (not including itself).
std::vector<std::size_t> downstream_of(const CurriculumGraph& graph, std::size_t index);

} // namespace cohortsim
