#include "cohortsim/types.hpp"

namespace cohortsim {

std::string_view scenario_label(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::historical:
        return "A_HISTORICAL";
    case ScenarioKind::direct_promotion:
        return "B_DIRECT_PROMOTION";
    case ScenarioKind::safety_net:
        return "C_SAFETY_NET";
    }
    return "?";
}

std::string_view scenario_key(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::historical:
        return "A";
    case ScenarioKind::direct_promotion:
        return "B";
    case ScenarioKind::safety_net:
        return "C";
    }
    return "?";
}

ScenarioKind parse_scenario(std::string_view text)
{
    for (auto kind : {ScenarioKind::historical, ScenarioKind::direct_promotion,
                      ScenarioKind::safety_net}) {
        if (text == scenario_label(kind) || text == scenario_key(kind)) {
            return kind;
        }
    }
    throw ConfigError("unknown scenario '" + std::string(text) + "'");
}

std::string_view resilience_label(Resilience r)
{
    switch (r) {
    case Resilience::low:
        return "LOW";
    case Resilience::medium:
        return "MEDIUM";
    case Resilience::high:
        return "HIGH";
    }
    return "?";
}

Resilience parse_resilience(std::string_view text)
{
    if (text == "LOW") {
        return Resilience::low;
    }
    if (text == "MEDIUM") {
        return Resilience::medium;
    }
    if (text == "HIGH") {
        return Resilience::high;
    }
    throw ConfigError("unknown resilience class '" + std::string(text) + "'");
}

} // namespace cohortsim
