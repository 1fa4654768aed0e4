#pragma once

#include "cohortsim/curriculum.hpp"
#include "cohortsim/policy.hpp"
#include "cohortsim/population.hpp"
#include "cohortsim/psychodynamics.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cohortsim {

struct ExperimentConfig {
    int cohort_size = 1343;
    int horizon_semesters = 12;
    int replications_per_scenario = 20;
    std::uint64_t master_seed = 20240601;
    /// 0 picks std::thread::hardware_concurrency().
    int threads = 0;
    /// Debt items at dropout needed to call an exit normative.
    int debt_cause_threshold = 3;

    std::vector<ScenarioPolicy> scenarios;
    HazardParams hazard;
    PsychUpdateParams psych;
    CurriculumGraph curriculum;
    ArchetypeTable archetypes;

    /// Raw `calibration` section; interpreted by the calibration module.
    nlohmann::json calibration = nlohmann::json::object();

    const ScenarioPolicy* scenario(ScenarioKind kind) const;
    /// Ability used for bottleneck friction inversion under `policy`.
    double representative_ability(const ScenarioPolicy& policy) const;

    /// Throws ConfigError on any invariant violation.
    void validate() const;
};

/**
 * Builds a config from a JSON document. Curriculum and archetype sections
 * may be inline objects or paths (resolved against base_dir); the curriculum
 * may also be `{"generator": {...}, "seed": N}`. Unknown keys are rejected.
 */
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});

/// Reads a config file, applies dotted-path overrides ("a.b=value"), then parses.
ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  const std::vector<std::string>& overrides = {},
                                  std::optional<std::uint64_t> seed_override = std::nullopt);

/// Applies one "dotted.path=value" override in place. The value is parsed as
/// JSON when possible, otherwise taken as a string. Throws ConfigError.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Fully resolved, self-contained config (curriculum and archetypes inline).
/// Feeding it back to config_from_json reproduces the same config.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Path of the shipped default config.
std::filesystem::path default_config_path();

} // namespace cohortsim
