#pragma once

#include "cohortsim/curriculum.hpp"
#include "cohortsim/rng.hpp"
#include "cohortsim/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cohortsim {

enum class PlanningHorizon { overloader, balanced, conservative };

/// Courses attempted per semester: 6 / 5 / 4.
int workload_cap(PlanningHorizon horizon);

struct NormalSpec {
    double mean = 0.0;
    double std = 0.0;
};

struct Archetype {
    int id = 0;
    std::string label;
    double frequency = 0.0;
    double ability = 0.5;
    PlanningHorizon planning_horizon = PlanningHorizon::balanced;
    double stress_reactivity = 1.0;
    double belonging_sensitivity = 1.0;
    Resilience resilience = Resilience::medium;
    NormalSpec init_stress;
    NormalSpec init_belonging;
};

class ArchetypeTable {
public:
    ArchetypeTable() = default;
    /// Throws ConfigError when the table violates its invariants.
    explicit ArchetypeTable(std::vector<Archetype> archetypes);

    const std::vector<Archetype>& archetypes() const { return archetypes_; }
    std::size_t size() const { return archetypes_.size(); }
    const Archetype& by_id(int id) const;

    /// Frequency-weighted mean ability.
    double mean_ability() const;

    nlohmann::json to_json() const;

private:
    std::vector<Archetype> archetypes_;
    std::vector<std::size_t> index_by_id_;
};

ArchetypeTable archetypes_from_json(const nlohmann::json& doc);
ArchetypeTable load_archetype_file(const std::string& path);

struct DebtItem {
    std::size_t course = 0;
    int semester_incurred = 0;
    int age = 0;

    bool operator==(const DebtItem&) const = default;
};

enum class AgentStatus { active, dropped, graduated };
enum class DropoutCause { normative, academic, other };

std::string_view status_label(AgentStatus s);
std::string_view cause_label(DropoutCause c);

struct AgentState {
    int agent_id = 0;
    int archetype_id = 0;
    double stress = 0.0;
    double belonging = 0.0;
    Transcript transcript;
    std::vector<DebtItem> finals_debt;
    AgentStatus status = AgentStatus::active;
    std::optional<int> dropout_semester;
    std::optional<DropoutCause> dropout_cause;
    std::optional<int> graduation_semester;
    int killer_failures = 0;
    int remedial_acceptances = 0;

    bool active() const { return status == AgentStatus::active; }
    bool operator==(const AgentState&) const = default;
};

/// Truncated-normal draw by resampling into [0,1] (100 tries, then clamp).
double truncated_unit_normal(const NormalSpec& spec, RandomStream& rng);

/// Initial (stress, belonging) for an agent of archetype `a`.
std::pair<double, double> init_psych_state(const Archetype& a, RandomStream& rng);

/// Samples n agents with ids 0..n-1. Deterministic in (table, n, seed).
std::vector<AgentState> sample_cohort(const ArchetypeTable& table, int n, std::uint64_t seed);

} // namespace cohortsim
