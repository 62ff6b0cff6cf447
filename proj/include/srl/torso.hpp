// Prescribed torso motion. The torso is replayed, not integrated: the
// simulator asks for position, velocity and acceleration at any time and
// feeds them to the dynamics as the floating-base trajectory.
#pragma once

#include "srl/core.hpp"

#include <cmath>

namespace srl::sim {

/// Sinusoidal bob-and-pitch replay around a fixed stance point, the
/// default desk-scale stand-in for treadmill walking: vertical +-2 cm and
/// pitch +-3 degrees at the gait frequency.
struct TorsoMotion {
    double height = 1.02;        ///< m, mean COM height
    double amp_x = 0.0;          ///< m, fore-aft sway amplitude
    double amp_z = 0.02;         ///< m
    double amp_pitch = 0.0524;   ///< rad (~3 deg)
    double freq = 1.0 / 1.1;     ///< Hz, typically 1/cycle_period
    double phase_z = 0.0;        ///< rad
    double phase_pitch = 1.5707963267948966; ///< rad, pitch leads bob by default
    bool stationary = false;     ///< freeze all oscillation

    void validate() const {
        if (!(height > 0.0) || !std::isfinite(height))
            throw ModelConfigError("TorsoMotion: height must be > 0");
        if (amp_z < 0.0 || amp_x < 0.0 || amp_pitch < 0.0 || freq < 0.0)
            throw ModelConfigError("TorsoMotion: amplitudes and freq must be >= 0");
    }

    void state_at(double t, Vec3* q_b, Vec3* dq_b, Vec3* qdd_b) const {
        if (stationary || freq == 0.0) {
            if (q_b) *q_b = Vec3(0.0, height, 0.0);
            if (dq_b) *dq_b = Vec3::Zero();
            if (qdd_b) *qdd_b = Vec3::Zero();
            return;
        }
        const double w = 2.0 * M_PI * freq;
        const double az = w * t + phase_z;
        const double ap = w * t + phase_pitch;
        if (q_b)
            *q_b = Vec3(amp_x * std::sin(az), height + amp_z * std::sin(az),
                        amp_pitch * std::sin(ap));
        if (dq_b)
            *dq_b = Vec3(amp_x * w * std::cos(az), amp_z * w * std::cos(az),
                         amp_pitch * w * std::cos(ap));
        if (qdd_b)
            *qdd_b = Vec3(-amp_x * w * w * std::sin(az), -amp_z * w * w * std::sin(az),
                          -amp_pitch * w * w * std::sin(ap));
    }
};

} // namespace srl::sim
