// Hybrid leg controller: force-sensorless impedance control on the hip
// and PID position control on the knee.
//
// The impedance law compensates the model terms (inertia feedforward,
// Coriolis, gravity, torso coupling) and imposes
//     M e_dd + B(t) e_d + K(t) e = J_s^T F_s     (hip axis, e = q_s - q_d)
// without measuring F_s: choosing the impedance inertia equal to the leg
// inertia block makes the force-feedback coefficient vanish, so ground
// contact passes straight through as the interaction force.
#pragma once

#include "srl/core.hpp"
#include "srl/dynamics.hpp"
#include "srl/gait.hpp"
#include "srl/record.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace srl::control {

struct ImpedanceParams {
    double M = 0.8;    ///< kg m^2, fixed per run (nominal hip inertia)
    double B = 16.0;   ///< N m s/rad, current damping B(t)
    double K = 60.0;   ///< N m/rad, current stiffness K(t)
    double dB = 0.0;   ///< N m s/rad per s, rate of B
    double dK = 0.0;   ///< N m/rad per s, rate of K
    double B0 = 16.0;  ///< nominal baseline (low-impedance level)
    double K0 = 60.0;
    double dBmax = 150.0;
    double dKmax = 2000.0;

    void validate() const {
        if (!(M > 0.0) || !(B > 0.0) || !(K > 0.0))
            throw ControllerConfigError("ImpedanceParams: M, B, K must be > 0");
        if (!std::isfinite(M) || !std::isfinite(B) || !std::isfinite(K) ||
            !std::isfinite(dB) || !std::isfinite(dK))
            throw ControllerConfigError("ImpedanceParams: non-finite value");
        if (std::abs(dB) > dBmax || std::abs(dK) > dKmax)
            throw ControllerConfigError("ImpedanceParams: rate cap exceeded");
    }
};

/// Defaults are sized for the knee at a 100 Hz control rate. The knee's
/// apparent inertia (Schur complement of the leg mass matrix) bottoms out
/// near 0.025 kg m^2, so sampled-data stability requires kd*dt < 2*m_eff
/// and kp*dt < 2*kd; the values below keep ~35% margin on both.
struct PidGains {
    double kp = 400.0; ///< N m/rad
    double ki = 60.0;  ///< N m/(rad s)
    double kd = 3.0;   ///< N m s/rad
    double integral_limit = 20.0; ///< N m, clamp on the integral term

    void validate() const {
        if (kp < 0.0 || ki < 0.0 || kd < 0.0)
            throw ControllerConfigError("PidGains: gains must be >= 0");
        if (!(integral_limit > 0.0))
            throw ControllerConfigError("PidGains: integral_limit must be > 0");
    }
};

/// Integral state threaded explicitly through pid_torque calls.
struct PidState {
    double integral = 0.0; ///< N m, accumulated ki * integral(e)
};

struct ControlCommand {
    Vec2 tau_s = Vec2::Zero();
    std::array<bool, 2> saturated = {false, false};
};

/// Hip torque of the impedance law. torso_accel is the prescribed base
/// acceleration entering the coupling feedforward; torso_feedback = false
/// zeroes the M_bs^T qdd_b + C_sb dq_b terms (ablation switch).
inline double impedance_torque(const dynamics::DynamicsTerms& terms,
                               const gait::ReferenceTriple& ref,
                               const dynamics::GeneralizedState& state,
                               const Vec3& torso_accel, const ImpedanceParams& imp,
                               bool torso_feedback = true) {
    imp.validate();
    if (!state.finite() || !all_finite(torso_accel))
        throw InvalidStateError("impedance_torque: non-finite input");

    Vec2 tau = terms.M_ss * ref.ddq + terms.C_ss * state.dq_s + terms.G_s;
    if (torso_feedback)
        tau += terms.M_bs.transpose() * torso_accel + terms.C_sb * state.dq_b;
    const double e = state.q_s(0) - ref.q(0);
    const double de = state.dq_s(0) - ref.dq(0);
    return tau(0) - imp.B * de - imp.K * e;
}

/// Knee PID. The integral already carries ki, so the clamp is in N m.
inline double pid_torque(double ref_angle, double ref_vel, double state_angle,
                         double state_vel, const PidGains& gains, double dt,
                         PidState& pid) {
    if (!(dt > 0.0)) throw ControllerConfigError("pid_torque: dt must be > 0");
    const double e = ref_angle - state_angle;
    const double de = ref_vel - state_vel;
    pid.integral = std::clamp(pid.integral + gains.ki * e * dt,
                              -gains.integral_limit, gains.integral_limit);
    return gains.kp * e + pid.integral + gains.kd * de;
}

struct HybridOptions {
    double torque_limit = 80.0; ///< N m per joint
    bool torso_feedback = true;
    bool knee_gravity_ff = true;
};

inline ControlCommand hybrid_control(const dynamics::DynamicsTerms& terms,
                                     const gait::ReferenceTriple& ref,
                                     const dynamics::GeneralizedState& state,
                                     const Vec3& torso_accel,
                                     const ImpedanceParams& imp, const PidGains& gains,
                                     double dt, PidState& pid,
                                     const HybridOptions& opt = {}) {
    gains.validate();
    ControlCommand cmd;
    cmd.tau_s(0) =
        impedance_torque(terms, ref, state, torso_accel, imp, opt.torso_feedback);
    cmd.tau_s(1) = pid_torque(ref.q(1), ref.dq(1), state.q_s(1), state.dq_s(1),
                              gains, dt, pid);
    if (opt.knee_gravity_ff) cmd.tau_s(1) += terms.G_s(1);
    for (int i = 0; i < 2; ++i) {
        if (std::abs(cmd.tau_s(i)) > opt.torque_limit) {
            cmd.tau_s(i) = std::clamp(cmd.tau_s(i), -opt.torque_limit, opt.torque_limit);
            cmd.saturated[static_cast<std::size_t>(i)] = true;
        }
    }
    return cmd;
}

/// Coefficient multiplying the measured force in the exact impedance law:
/// (M_ss M_imp^-1 - I). Identically zero when the impedance inertia is the
/// leg inertia block, which is what lets the controller drop the force
/// sensor.
inline Mat2 force_feedback_coefficient(const Mat2& M_ss, const Mat2& M_imp) {
    return M_ss * M_imp.inverse() - Mat2::Identity();
}

struct ResidualReport {
    double max_abs = 0.0; ///< N m
    double rms = 0.0;     ///< N m
    std::size_t count = 0;
};

/// Verification instrument: evaluate r(t) = M e_dd + B(t) e_d + K(t) e
/// - [J_s^T F_s]_hip over a trace. Under exact-model, disturbance-free
/// conditions the residual is integration-error sized; with an injected
/// hip disturbance the residual reconstructs it. Expects rows whose
/// acceleration reflects the same command as their B, K columns; for
/// zero-order-held simulator traces use zoh_residual_check instead.
inline ResidualReport closed_loop_error_dynamics_check(const sim::SimRecord& rec,
                                                       double M_imp) {
    ResidualReport rep;
    double ss = 0.0;
    for (const auto& r : rec.rows) {
        const double e = r.q_s(0) - r.q_d(0);
        const double de = r.dq_s(0) - r.dq_d(0);
        const double dde = r.qdd_s(0) - r.ddq_d(0);
        const double resid = M_imp * dde + r.B * de + r.K * e - r.jtf_hip;
        rep.max_abs = std::max(rep.max_abs, std::abs(resid));
        ss += resid * resid;
        ++rep.count;
    }
    if (rep.count > 0) rep.rms = std::sqrt(ss / static_cast<double>(rep.count));
    return rep;
}

/// Residual check for simulator traces, where torque is held constant for
/// `hold` physics steps after each controller update. Substituting the
/// impedance law into the hip row of the leg dynamics gives the identity
/// [M_ss(q) (qdd_s - qdd_d)]_hip + B e_d + K e - [J^T F_s]_hip = 0, exact
/// while the command computed at the update instant is the one acting.
/// Each update row's error state is therefore paired with the acceleration
/// one row later (the first produced by that command), and M_ss is rebuilt
/// at that row's recorded configuration. External hip disturbances show up
/// in the residual by design.
inline ResidualReport zoh_residual_check(const sim::SimRecord& rec,
                                         const dynamics::ModelParams& model,
                                         std::size_t hold) {
    if (hold == 0) throw ControllerConfigError("zoh_residual_check: hold must be > 0");
    ResidualReport rep;
    double ss = 0.0;
    for (std::size_t i = 0; i + 1 < rec.rows.size(); i += hold) {
        const auto& cmd = rec.rows[i];
        const auto& nxt = rec.rows[i + 1];
        dynamics::GeneralizedState st;
        st.q_b = nxt.q_b;
        st.dq_b = nxt.dq_b;
        st.q_s = nxt.q_s;
        st.dq_s = nxt.dq_s;
        const auto terms = dynamics::eval_terms(model, st);
        const double e = cmd.q_s(0) - cmd.q_d(0);
        const double de = cmd.dq_s(0) - cmd.dq_d(0);
        const double resid = terms.M_ss.row(0).dot(nxt.qdd_s - cmd.ddq_d) +
                             cmd.B * de + cmd.K * e - nxt.jtf_hip;
        rep.max_abs = std::max(rep.max_abs, std::abs(resid));
        ss += resid * resid;
        ++rep.count;
    }
    if (rep.count > 0) rep.rms = std::sqrt(ss / static_cast<double>(rep.count));
    return rep;
}

} // namespace srl::control
