// Spring-damper ground model with unilateral normal force, plus the
// threshold-based ground-truth gait-phase labeler.
#pragma once

#include "srl/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace srl::contact {

struct GroundModel {
    double stiffness = 2.0e4;    ///< N/m
    double damping = 300.0;      ///< N s/m, resists penetration rate only
    double ground_height = 0.0;  ///< m, world z of the surface
    double friction_coeff = 0.8;

    void validate() const {
        if (!(stiffness > 0.0) || !std::isfinite(stiffness))
            throw ModelConfigError("GroundModel: stiffness must be > 0");
        if (damping < 0.0 || !std::isfinite(damping))
            throw ModelConfigError("GroundModel: damping must be >= 0");
        if (friction_coeff < 0.0 || !std::isfinite(friction_coeff))
            throw ModelConfigError("GroundModel: friction_coeff must be >= 0");
        if (!std::isfinite(ground_height))
            throw ModelConfigError("GroundModel: ground_height must be finite");
    }
};

struct ContactState {
    double foot_height = 0.0;   ///< m
    double foot_velocity = 0.0; ///< m/s, vertical
    double grf = 0.0;           ///< N, vertical, never negative
    double grf_tangential = 0.0; ///< N, capped by friction_coeff * grf
    bool in_contact = false;
};

/// Normal force from penetration depth delta = ground_height - foot_height:
/// grf = max(0, k*delta + c*d(delta)/dt). Damping only ever adds force while
/// the foot moves further down, and the total is clamped at zero so contact
/// never pulls.
inline ContactState ground_reaction(const GroundModel& ground, double foot_height,
                                    double foot_velocity,
                                    double foot_velocity_tangential = 0.0) {
    if (!std::isfinite(foot_height) || !std::isfinite(foot_velocity) ||
        !std::isfinite(foot_velocity_tangential))
        throw InvalidStateError("ground_reaction: non-finite input");

    ContactState c;
    c.foot_height = foot_height;
    c.foot_velocity = foot_velocity;
    const double delta = ground.ground_height - foot_height;
    c.in_contact = delta > 0.0;
    if (c.in_contact) {
        const double delta_rate = -foot_velocity;
        c.grf = std::max(0.0, ground.stiffness * delta + ground.damping * delta_rate);
        const double cap = ground.friction_coeff * c.grf;
        c.grf_tangential =
            std::clamp(-ground.damping * foot_velocity_tangential, -cap, cap);
    }
    return c;
}

enum class GaitPhase { Swing = 0, ContactMoment = 1, Stance = 2 };

inline const char* to_string(GaitPhase p) {
    switch (p) {
        case GaitPhase::Swing: return "SW";
        case GaitPhase::ContactMoment: return "CM";
        case GaitPhase::Stance: return "ST";
    }
    return "?";
}

inline GaitPhase phase_from_index(int i) {
    if (i < 0 || i > 2)
        throw InvalidStateError("phase_from_index: label out of range " +
                                std::to_string(i));
    return static_cast<GaitPhase>(i);
}

struct PhaseThresholds {
    double contact_threshold = 5.0; ///< N, below this the foot counts as free
    double stance_threshold = 60.0; ///< N, at or above this is full stance

    void validate() const {
        if (!(contact_threshold >= 0.0) || !(stance_threshold > contact_threshold))
            throw ModelConfigError(
                "PhaseThresholds: need 0 <= contact_threshold < stance_threshold");
    }
};

/// Ground-truth labeler. The band between the thresholds is the contact
/// moment only while load is still building; once the force stops rising
/// (late stance, unloading) it is treated as stance, so liftoff runs
/// ST -> SW without an intervening CM.
inline GaitPhase label_phase(const ContactState& contact, double grf_rate,
                             const PhaseThresholds& thresholds) {
    if (!std::isfinite(grf_rate))
        throw InvalidStateError("label_phase: non-finite grf_rate");
    if (contact.grf < thresholds.contact_threshold) return GaitPhase::Swing;
    if (contact.grf >= thresholds.stance_threshold) return GaitPhase::Stance;
    return grf_rate > 0.0 ? GaitPhase::ContactMoment : GaitPhase::Stance;
}

} // namespace srl::contact
