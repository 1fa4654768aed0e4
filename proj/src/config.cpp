#include "cohortsim/config.hpp"

#include <algorithm>
#include <fstream>

namespace cohortsim {

using nlohmann::json;
namespace fs = std::filesystem;

const ScenarioPolicy* ExperimentConfig::scenario(ScenarioKind kind) const
{
    for (const auto& s : scenarios) {
        if (s.kind == kind) {
            return &s;
        }
    }
    return nullptr;
}

double ExperimentConfig::representative_ability(const ScenarioPolicy& policy) const
{
    return policy.representative_ability > 0.0 ? policy.representative_ability
                                               : archetypes.mean_ability();
}

void ExperimentConfig::validate() const
{
    if (cohort_size <= 0) {
        throw ConfigError("cohort_size must be > 0");
    }
    if (horizon_semesters < 1) {
        throw ConfigError("horizon_semesters must be >= 1");
    }
    if (replications_per_scenario < 1) {
        throw ConfigError("replications_per_scenario must be >= 1");
    }
    if (threads < 0) {
        throw ConfigError("threads must be >= 0");
    }
    if (debt_cause_threshold < 0) {
        throw ConfigError("debt_cause_threshold must be >= 0");
    }
    if (scenarios.empty()) {
        throw ConfigError("at least one scenario is required");
    }
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        scenarios[i].validate();
        for (std::size_t j = 0; j < i; ++j) {
            if (scenarios[j].kind == scenarios[i].kind) {
                throw ConfigError("duplicate scenario " +
                                  std::string(scenario_key(scenarios[i].kind)));
            }
        }
    }
    hazard.validate();
    psych.validate();
    if (curriculum.course_count() == 0) {
        throw ConfigError("curriculum has no courses");
    }
    if (archetypes.size() == 0) {
        throw ConfigError("archetype table is empty");
    }
}

namespace {

json read_json_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

fs::path resolve(const fs::path& base, const std::string& p)
{
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

CurriculumGraph curriculum_section(const json& section, const fs::path& base)
{
    if (section.is_string()) {
        return load_curriculum_file(resolve(base, section.get<std::string>()).string());
    }
    if (section.is_object() && section.contains("generator")) {
        for (const auto& [key, _] : section.items()) {
            if (key != "generator" && key != "seed") {
                throw ConfigError("curriculum: unknown field '" + key + "'");
            }
        }
        const auto params = GeneratorConfig::from_json(section.at("generator"));
        const auto seed = section.value("seed", std::uint64_t{7});
        return generate_synthetic_curriculum(params, seed);
    }
    return curriculum_from_json(section);
}

ArchetypeTable archetype_section(const json& section, const fs::path& base)
{
    if (section.is_string()) {
        return load_archetype_file(resolve(base, section.get<std::string>()).string());
    }
    return archetypes_from_json(section);
}

template <class T>
T get_field(const json& obj, const char* key, const std::string& where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

HazardParams hazard_section(const json& section)
{
    HazardParams h;
    for (const auto& [key, value] : section.items()) {
        if (key == "alpha0") {
            h.alpha0 = get_field<double>(section, "alpha0", "hazard");
        } else if (key == "alpha1") {
            h.alpha1 = get_field<double>(section, "alpha1", "hazard");
        } else if (key == "alpha2") {
            h.alpha2 = get_field<double>(section, "alpha2", "hazard");
        } else {
            throw ConfigError("hazard: unknown field '" + key + "'");
        }
    }
    return h;
}

PsychUpdateParams psych_section(const json& section)
{
    PsychUpdateParams u;
    const std::pair<const char*, double*> fields[] = {
        {"stress_fail_gain", &u.stress_fail_gain},
        {"stress_pass_relief", &u.stress_pass_relief},
        {"belonging_pass_gain", &u.belonging_pass_gain},
        {"belonging_fail_loss", &u.belonging_fail_loss},
        {"debt_stress_per_item", &u.debt_stress_per_item},
    };
    for (const auto& [key, value] : section.items()) {
        auto it = std::find_if(std::begin(fields), std::end(fields),
                               [&](const auto& f) { return key == f.first; });
        if (it == std::end(fields)) {
            throw ConfigError("psych: unknown field '" + key + "'");
        }
        *it->second = get_field<double>(section, it->first, "psych");
    }
    return u;
}

} // namespace

ExperimentConfig config_from_json(const json& doc, const fs::path& base_dir)
{
    if (!doc.is_object()) {
        throw ConfigError("config: expected a JSON object");
    }
    static const std::vector<std::string> known{
        "cohort_size", "horizon_semesters", "replications_per_scenario", "master_seed", "threads",
        "debt_cause_threshold", "scenarios", "hazard", "psych", "curriculum", "archetypes",
        "calibration", "derived", "calibration_result"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("config: unknown field '" + key + "'");
        }
    }

    ExperimentConfig cfg;
    if (doc.contains("cohort_size")) {
        cfg.cohort_size = get_field<int>(doc, "cohort_size", "config");
    }
    if (doc.contains("horizon_semesters")) {
        cfg.horizon_semesters = get_field<int>(doc, "horizon_semesters", "config");
    }
    if (doc.contains("replications_per_scenario")) {
        cfg.replications_per_scenario = get_field<int>(doc, "replications_per_scenario", "config");
    }
    if (doc.contains("master_seed")) {
        cfg.master_seed = get_field<std::uint64_t>(doc, "master_seed", "config");
    }
    if (doc.contains("threads")) {
        cfg.threads = get_field<int>(doc, "threads", "config");
    }
    if (doc.contains("debt_cause_threshold")) {
        cfg.debt_cause_threshold = get_field<int>(doc, "debt_cause_threshold", "config");
    }
    if (doc.contains("hazard")) {
        cfg.hazard = hazard_section(doc["hazard"]);
    }
    if (doc.contains("psych")) {
        cfg.psych = psych_section(doc["psych"]);
    }

    if (doc.contains("scenarios")) {
        const auto& section = doc["scenarios"];
        if (!section.is_object()) {
            throw ConfigError("scenarios: expected an object keyed by A, B, C");
        }
        for (auto kind : {ScenarioKind::historical, ScenarioKind::direct_promotion,
                          ScenarioKind::safety_net}) {
            const std::string key(scenario_key(kind));
            if (section.contains(key)) {
                cfg.scenarios.push_back(ScenarioPolicy::from_json(kind, section[key]));
            }
        }
        for (const auto& [key, _] : section.items()) {
            if (key != "A" && key != "B" && key != "C") {
                throw ConfigError("scenarios: unknown scenario key '" + key + "'");
            }
        }
    } else {
        for (auto kind : {ScenarioKind::historical, ScenarioKind::direct_promotion,
                          ScenarioKind::safety_net}) {
            cfg.scenarios.push_back(ScenarioPolicy::defaults(kind));
        }
    }

    if (!doc.contains("curriculum") || !doc.contains("archetypes")) {
        throw ConfigError("config: curriculum and archetypes are required");
    }
    cfg.curriculum = curriculum_section(doc["curriculum"], base_dir);
    cfg.archetypes = archetype_section(doc["archetypes"], base_dir);
    if (doc.contains("calibration")) {
        cfg.calibration = doc["calibration"];
    }
    cfg.validate();
    return cfg;
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) {
            throw ConfigError("override '" + assignment + "' has an empty path segment");
        }
        if (!node->is_object()) {
            throw ConfigError("override '" + path + "': '" + key + "' is not inside an object");
        }
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) {
            (*node)[key] = json::object();
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

ExperimentConfig load_config_file(const fs::path& path, const std::vector<std::string>& overrides,
                                  std::optional<std::uint64_t> seed_override)
{
    json doc = read_json_file(path);
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    if (seed_override) {
        doc["master_seed"] = *seed_override;
    }
    return config_from_json(doc, path.parent_path());
}

json config_to_json(const ExperimentConfig& cfg)
{
    json scenarios = json::object();
    for (const auto& s : cfg.scenarios) {
        scenarios[std::string(scenario_key(s.kind))] = s.to_json();
    }
    return json{{"cohort_size", cfg.cohort_size},
                {"horizon_semesters", cfg.horizon_semesters},
                {"replications_per_scenario", cfg.replications_per_scenario},
                {"master_seed", cfg.master_seed},
                {"threads", cfg.threads},
                {"debt_cause_threshold", cfg.debt_cause_threshold},
                {"hazard",
                 {{"alpha0", cfg.hazard.alpha0},
                  {"alpha1", cfg.hazard.alpha1},
                  {"alpha2", cfg.hazard.alpha2}}},
                {"psych",
                 {{"stress_fail_gain", cfg.psych.stress_fail_gain},
                  {"stress_pass_relief", cfg.psych.stress_pass_relief},
                  {"belonging_pass_gain", cfg.psych.belonging_pass_gain},
                  {"belonging_fail_loss", cfg.psych.belonging_fail_loss},
                  {"debt_stress_per_item", cfg.psych.debt_stress_per_item}}},
                {"scenarios", std::move(scenarios)},
                {"curriculum", cfg.curriculum.to_json()},
                {"archetypes", cfg.archetypes.to_json()},
                {"calibration", cfg.calibration}};
}

fs::path default_config_path()
{
    return fs::path(COHORTSIM_DATA_DIR) / "default_config.json";
}

} // namespace cohortsim
