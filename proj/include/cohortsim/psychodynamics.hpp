#pragma once

#include "cohortsim/population.hpp"
#include "cohortsim/rng.hpp"

#include <optional>

namespace cohortsim {

struct HazardParams {
    double alpha0 = -4.0; ///< baseline log-odds
    double alpha1 = 3.0;  ///< stress coefficient, > 0
    double alpha2 = -3.0; ///< belonging coefficient, < 0

    /// Throws ConfigError unless alpha1 > 0 and alpha2 < 0.
    void validate() const;
    bool operator==(const HazardParams&) const = default;
};

struct PsychUpdateParams {
    double stress_fail_gain = 0.15;
    double stress_pass_relief = 0.02;
    double belonging_pass_gain = 0.02;
    double belonging_fail_loss = 0.02;
    double debt_stress_per_item = 0.02;
    double remedial_stress_cost = 0.03;
    double remedial_belonging_bonus = 0.05;

    void validate() const;
    bool operator==(const PsychUpdateParams&) const = default;
};

struct SemesterEvent {
    enum class Kind { pass, fail, regularize, debt_tick, remedial_accept, remedial_success };
    Kind kind;
    std::optional<std::size_t> course;
    double friction = 0.0;
    /// DEBT_TICK only: queue length at the tick.
    int queue_length = 0;

    bool operator==(const SemesterEvent&) const = default;
};

std::string_view event_label(SemesterEvent::Kind kind);

/// Applies one event to an active agent; stress and belonging stay in [0,1].
void apply_event(AgentState& agent, const SemesterEvent& e, const Archetype& a,
                 const PsychUpdateParams& u);

/// Logistic hazard 1 / (1 + exp(-(alpha0 + alpha1*stress + alpha2*belonging))).
double dropout_hazard(double stress, double belonging, const HazardParams& h);

bool sample_dropout(double hazard, RandomStream& rng);

} // namespace cohortsim
