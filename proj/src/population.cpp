#include "cohortsim/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cohortsim {

using nlohmann::json;

int workload_cap(PlanningHorizon horizon)
{
    switch (horizon) {
    case PlanningHorizon::overloader:
        return 6;
    case PlanningHorizon::balanced:
        return 5;
    case PlanningHorizon::conservative:
        return 4;
    }
    return 5;
}

namespace {

std::string_view horizon_label(PlanningHorizon h)
{
    switch (h) {
    case PlanningHorizon::overloader:
        return "OVERLOADER";
    case PlanningHorizon::balanced:
        return "BALANCED";
    case PlanningHorizon::conservative:
        return "CONSERVATIVE";
    }
    return "?";
}

PlanningHorizon parse_horizon(const std::string& s)
{
    if (s == "OVERLOADER") {
        return PlanningHorizon::overloader;
    }
    if (s == "BALANCED") {
        return PlanningHorizon::balanced;
    }
    if (s == "CONSERVATIVE") {
        return PlanningHorizon::conservative;
    }
    throw ConfigError("unknown planning_horizon '" + s + "'");
}

} // namespace

std::string_view status_label(AgentStatus s)
{
    switch (s) {
    case AgentStatus::active:
        return "ACTIVE";
    case AgentStatus::dropped:
        return "DROPPED";
    case AgentStatus::graduated:
        return "GRADUATED";
    }
    return "?";
}

std::string_view cause_label(DropoutCause c)
{
    switch (c) {
    case DropoutCause::normative:
        return "NORMATIVE";
    case DropoutCause::academic:
        return "ACADEMIC";
    case DropoutCause::other:
        return "OTHER";
    }
    return "?";
}

ArchetypeTable::ArchetypeTable(std::vector<Archetype> archetypes)
    : archetypes_(std::move(archetypes))
{
    if (archetypes_.empty()) {
        throw ConfigError("archetype table is empty");
    }
    std::set<int> ids;
    double total = 0.0;
    int max_id = 0;
    for (const auto& a : archetypes_) {
        const std::string where = "archetype " + std::to_string(a.id);
        if (a.id < 1 || !ids.insert(a.id).second) {
            throw ConfigError(where + ": ids must be unique positive integers");
        }
        if (!(a.frequency >= 0.0 && a.frequency <= 1.0)) {
            throw ConfigError(where + ": frequency outside [0,1]");
        }
        if (!(a.ability > 0.0 && a.ability < 1.0)) {
            throw ConfigError(where + ": ability must lie strictly inside (0,1)");
        }
        if (!(a.stress_reactivity > 0.0) || !(a.belonging_sensitivity > 0.0)) {
            throw ConfigError(where + ": reactivity and sensitivity must be positive");
        }
        if (!(a.init_stress.std >= 0.0) || !(a.init_belonging.std >= 0.0)) {
            throw ConfigError(where + ": initial-state std must be non-negative");
        }
        total += a.frequency;
        max_id = std::max(max_id, a.id);
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("archetype frequencies sum to " + std::to_string(total) + ", expected 1");
    }
    index_by_id_.assign(static_cast<std::size_t>(max_id) + 1, archetypes_.size());
    for (std::size_t i = 0; i < archetypes_.size(); ++i) {
        index_by_id_[static_cast<std::size_t>(archetypes_[i].id)] = i;
    }
}

const Archetype& ArchetypeTable::by_id(int id) const
{
    if (id < 0 || static_cast<std::size_t>(id) >= index_by_id_.size() ||
        index_by_id_[static_cast<std::size_t>(id)] == archetypes_.size()) {
        throw ContractError("no archetype with id " + std::to_string(id));
    }
    return archetypes_[index_by_id_[static_cast<std::size_t>(id)]];
}

double ArchetypeTable::mean_ability() const
{
    double m = 0.0;
    for (const auto& a : archetypes_) {
        m += a.frequency * a.ability;
    }
    return m;
}

json ArchetypeTable::to_json() const
{
    json list = json::array();
    for (const auto& a : archetypes_) {
        list.push_back({{"id", a.id},
                        {"label", a.label},
                        {"frequency", a.frequency},
                        {"ability", a.ability},
                        {"planning_horizon", horizon_label(a.planning_horizon)},
                        {"stress_reactivity", a.stress_reactivity},
                        {"belonging_sensitivity", a.belonging_sensitivity},
                        {"resilience", resilience_label(a.resilience)},
                        {"init_stress", {{"mean", a.init_stress.mean}, {"std", a.init_stress.std}}},
                        {"init_belonging",
                         {{"mean", a.init_belonging.mean}, {"std", a.init_belonging.std}}}});
    }
    return json{{"archetypes", std::move(list)}};
}

ArchetypeTable archetypes_from_json(const json& doc)
{
    if (!doc.is_object() || !doc.contains("archetypes") || !doc["archetypes"].is_array()) {
        throw ConfigError("archetype table: expected {\"archetypes\": [...]}");
    }
    static const std::set<std::string> allowed{
        "id",         "label",          "frequency",  "ability",       "planning_horizon",
        "stress_reactivity", "belonging_sensitivity", "resilience", "init_stress",
        "init_belonging"};
    std::vector<Archetype> out;
    for (const auto& item : doc["archetypes"]) {
        try {
            for (const auto& [key, _] : item.items()) {
                if (!allowed.count(key)) {
                    throw ConfigError("archetype: unknown field '" + key + "'");
                }
            }
            Archetype a;
            a.id = item.at("id").get<int>();
            a.label = item.at("label").get<std::string>();
            a.frequency = item.at("frequency").get<double>();
            a.ability = item.at("ability").get<double>();
            a.planning_horizon = parse_horizon(item.at("planning_horizon").get<std::string>());
            a.stress_reactivity = item.at("stress_reactivity").get<double>();
            a.belonging_sensitivity = item.at("belonging_sensitivity").get<double>();
            a.resilience = parse_resilience(item.at("resilience").get<std::string>());
            a.init_stress = {item.at("init_stress").at("mean").get<double>(),
                             item.at("init_stress").at("std").get<double>()};
            a.init_belonging = {item.at("init_belonging").at("mean").get<double>(),
                                item.at("init_belonging").at("std").get<double>()};
            out.push_back(std::move(a));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("archetype table: ") + e.what());
        }
    }
    return ArchetypeTable(std::move(out));
}

ArchetypeTable load_archetype_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open archetype file " + path);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("archetype file " + path + ": " + e.what());
    }
    return archetypes_from_json(doc);
}

double truncated_unit_normal(const NormalSpec& spec, RandomStream& rng)
{
    if (spec.std <= 0.0) {
        return std::clamp(spec.mean, 0.0, 1.0);
    }
    double x = spec.mean;
    for (int attempt = 0; attempt < 100; ++attempt) {
        x = spec.mean + spec.std * rng.normal();
        if (x >= 0.0 && x <= 1.0) {
            return x;
        }
    }
    return std::clamp(x, 0.0, 1.0);
}

std::pair<double, double> init_psych_state(const Archetype& a, RandomStream& rng)
{
    const double stress = truncated_unit_normal(a.init_stress, rng);
    const double belonging = truncated_unit_normal(a.init_belonging, rng);
    return {stress, belonging};
}

std::vector<AgentState> sample_cohort(const ArchetypeTable& table, int n, std::uint64_t seed)
{
    if (n < 0) {
        throw ContractError("cohort size must be non-negative");
    }
    std::vector<double> cumulative;
    double acc = 0.0;
    for (const auto& a : table.archetypes()) {
        acc += a.frequency;
        cumulative.push_back(acc);
    }

    std::vector<AgentState> cohort(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto pick = agent_stream(seed, static_cast<std::uint64_t>(i), 0, Purpose::archetype);
        const double u = pick.uniform() * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                             cumulative.size() - 1);
        const Archetype& a = table.archetypes()[k];

        AgentState& agent = cohort[static_cast<std::size_t>(i)];
        agent.agent_id = i;
        agent.archetype_id = a.id;
        auto psych = agent_stream(seed, static_cast<std::uint64_t>(i), 0, Purpose::init_psych);
        std::tie(agent.stress, agent.belonging) = init_psych_state(a, psych);
    }
    return cohort;
}

} // namespace cohortsim
