#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cohortsim {

enum class ScenarioKind { historical, direct_promotion, safety_net };

enum class Resilience { low, medium, high };

/// Raised for malformed or invalid input files and configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an output file cannot be written or an input file cannot be read.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an operation is called outside of its contract.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// "A_HISTORICAL", "B_DIRECT_PROMOTION", "C_SAFETY_NET".
std::string_view scenario_label(ScenarioKind kind);
/// "A", "B", "C": key used in the experiment config.
std::string_view scenario_key(ScenarioKind kind);
/// Accepts either the label or the key form.
ScenarioKind parse_scenario(std::string_view text);

std::string_view resilience_label(Resilience r);
Resilience parse_resilience(std::string_view text);

} // namespace cohortsim
