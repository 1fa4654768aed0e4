#pragma once

#include "cohortsim/config.hpp"
#include "cohortsim/curriculum.hpp"
#include "cohortsim/population.hpp"

#include <filesystem>
#include <unistd.h>
#include <string>
#include <vector>

namespace testing {

inline cohortsim::Course course(std::string id, int semester, double friction, bool bottleneck = false,
                                std::vector<std::string> prereqs = {})
{
    cohortsim::Course c;
    c.id = id;
    c.name = "Course " + id;
    c.nominal_semester = semester;
    c.friction = friction;
    c.is_bottleneck = bottleneck;
    c.prerequisites = std::move(prereqs);
    return c;
}

inline cohortsim::Archetype archetype(int id, double frequency, double ability,
                                      cohortsim::Resilience res = cohortsim::Resilience::medium,
                                      double stress = 0.3, double belonging = 0.6, double std = 0.0)
{
    cohortsim::Archetype a;
    a.id = id;
    a.label = "archetype " + std::to_string(id);
    a.frequency = frequency;
    a.ability = ability;
    a.resilience = res;
    a.init_stress = {stress, std};
    a.init_belonging = {belonging, std};
    return a;
}

/// Three-scenario config over a small chain curriculum and a three-class table.
inline cohortsim::ExperimentConfig small_config(int cohort = 60, int reps = 2)
{
    using namespace cohortsim;
    ExperimentConfig cfg;
    cfg.cohort_size = cohort;
    cfg.replications_per_scenario = reps;
    cfg.threads = 1;
    cfg.master_seed = 99;
    cfg.scenarios = {ScenarioPolicy::defaults(ScenarioKind::historical),
                     ScenarioPolicy::defaults(ScenarioKind::direct_promotion),
                     ScenarioPolicy::defaults(ScenarioKind::safety_net)};
    cfg.curriculum = CurriculumGraph({course("K1", 1, 0.6, true), course("K2", 1, 0.6, true),
                                      course("M1", 2, 0.1, false, {"K1"}),
                                      course("M2", 2, 0.1, false, {"K2"}),
                                      course("M3", 3, 0.1, false, {"M1", "M2"})});
    cfg.archetypes = ArchetypeTable({archetype(1, 0.3, 0.55, Resilience::low, 0.4, 0.4, 0.1),
                                     archetype(2, 0.4, 0.65, Resilience::medium, 0.3, 0.55, 0.1),
                                     archetype(3, 0.3, 0.8, Resilience::high, 0.2, 0.7, 0.1)});
    return cfg;
}

inline cohortsim::ExperimentConfig shipped_config()
{
    return cohortsim::load_config_file(cohortsim::default_config_path());
}

/// Fresh, empty directory under the build tree, private to this process.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::path(COHORTSIM_TEST_TMP) / std::to_string(::getpid()) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing
