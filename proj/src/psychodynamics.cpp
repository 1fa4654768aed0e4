#include "cohortsim/psychodynamics.hpp"

#include <algorithm>
#include <cmath>

namespace cohortsim {

void HazardParams::validate() const
{
    if (!(alpha1 > 0.0)) {
        throw ConfigError("hazard.alpha1 must be > 0");
    }
    if (!(alpha2 < 0.0)) {
        throw ConfigError("hazard.alpha2 must be < 0");
    }
    if (!std::isfinite(alpha0)) {
        throw ConfigError("hazard.alpha0 must be finite");
    }
}

void PsychUpdateParams::validate() const
{
    for (double v : {stress_fail_gain, stress_pass_relief, belonging_pass_gain, belonging_fail_loss,
                     debt_stress_per_item, remedial_stress_cost, remedial_belonging_bonus}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError("psych update magnitudes must be finite and non-negative");
        }
    }
}

std::string_view event_label(SemesterEvent::Kind kind)
{
    using K = SemesterEvent::Kind;
    switch (kind) {
    case K::pass:
        return "PASS";
    case K::fail:
        return "FAIL";
    case K::regularize:
        return "REGULARIZE";
    case K::debt_tick:
        return "DEBT_TICK";
    case K::remedial_accept:
        return "REMEDIAL_ACCEPT";
    case K::remedial_success:
        return "REMEDIAL_SUCCESS";
    }
    return "?";
}

void apply_event(AgentState& agent, const SemesterEvent& e, const Archetype& a,
                 const PsychUpdateParams& u)
{
    using K = SemesterEvent::Kind;
    double stress = agent.stress;
    double belonging = agent.belonging;
    switch (e.kind) {
    case K::fail:
        stress += u.stress_fail_gain * e.friction * a.stress_reactivity;
        belonging -= u.belonging_fail_loss * a.belonging_sensitivity;
        break;
    case K::pass:
        stress -= u.stress_pass_relief;
        belonging += u.belonging_pass_gain * a.belonging_sensitivity;
        break;
    case K::debt_tick:
        stress += u.debt_stress_per_item * e.queue_length;
        break;
    case K::remedial_accept:
        stress += u.remedial_stress_cost;
        break;
    case K::remedial_success:
        belonging += u.remedial_belonging_bonus;
        break;
    case K::regularize:
        break;
    }
    agent.stress = std::clamp(stress, 0.0, 1.0);
    agent.belonging = std::clamp(belonging, 0.0, 1.0);
}

double dropout_hazard(double stress, double belonging, const HazardParams& h)
{
    const double z = h.alpha0 + h.alpha1 * stress + h.alpha2 * belonging;
    // branch keeps exp() from overflowing on either tail
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double ez = std::exp(z);
    return ez / (1.0 + ez);
}

bool sample_dropout(double hazard, RandomStream& rng)
{
    return rng.bernoulli(hazard);
}

} // namespace cohortsim
