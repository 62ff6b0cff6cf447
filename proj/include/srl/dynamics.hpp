// Planar floating-base dynamics of a torso + 2-link supernumerary leg.
//
// Generalized coordinates q = [x, z, pitch, theta_hip, theta_knee]:
// the torso is a free planar rigid body (x forward, z up, pitch CCW), the
// leg hangs from a torso-fixed attachment point below the torso COM. Link
// angles are relative: theta_hip w.r.t. the torso axis, theta_knee w.r.t.
// link 1; both zero means the leg points straight down.
//
// The block-partitioned terms (M_bb, M_bs, M_ss, C blocks, G, contact
// Jacobian) are evaluated in closed form from body Jacobians. The Coriolis
// matrix uses Christoffel symbols of the first kind, so d/dt(M) - 2C is
// skew-symmetric by construction.
#pragma once

#include "srl/core.hpp"

#include <array>
#include <cmath>

namespace srl::dynamics {

struct ModelParams {
    double torso_mass = 40.0;          ///< kg
    double torso_inertia = 2.5;        ///< kg m^2 about torso COM
    std::array<double, 2> link_masses = {2.0, 1.5};        ///< kg
    std::array<double, 2> link_lengths = {0.45, 0.45};     ///< m
    std::array<double, 2> link_com_offsets = {0.225, 0.225}; ///< m from joint
    std::array<double, 2> link_inertias = {
        2.0 * 0.45 * 0.45 / 12.0, 1.5 * 0.45 * 0.45 / 12.0}; ///< kg m^2 (rod)
    double attachment_offset = 0.15;   ///< m below torso COM, torso frame
    double gravity = 9.81;             ///< m/s^2, magnitude

    /// Strict validation for simulation configs. Unit tests may build
    /// degenerate models (zero link mass) directly without calling this.
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ModelConfigError(std::string("ModelParams: ") + name +
                                       " must be strictly positive");
        };
        positive(torso_mass, "torso_mass");
        positive(torso_inertia, "torso_inertia");
        for (int i = 0; i < 2; ++i) {
            positive(link_masses[i], "link_masses");
            positive(link_lengths[i], "link_lengths");
            positive(link_com_offsets[i], "link_com_offsets");
            positive(link_inertias[i], "link_inertias");
        }
        if (gravity < 0.0 || !std::isfinite(gravity))
            throw ModelConfigError("ModelParams: gravity must be >= 0");
        if (attachment_offset < 0.0 || !std::isfinite(attachment_offset))
            throw ModelConfigError("ModelParams: attachment_offset must be >= 0");
    }
};

/// Floating-base coordinates q_b = [x, z, pitch] and leg joints
/// q_s = [hip, knee], with matching velocities.
struct GeneralizedState {
    Vec3 q_b = Vec3::Zero();
    Vec2 q_s = Vec2::Zero();
    Vec3 dq_b = Vec3::Zero();
    Vec2 dq_s = Vec2::Zero();

    Vec5 q() const { return (Vec5() << q_b, q_s).finished(); }
    Vec5 dq() const { return (Vec5() << dq_b, dq_s).finished(); }

    bool finite() const {
        return all_finite(q_b) && all_finite(q_s) && all_finite(dq_b) &&
               all_finite(dq_s);
    }
};

/// Block-partitioned M, C, G and the leg contact Jacobian at one state.
struct DynamicsTerms {
    Mat3 M_bb;
    Mat32 M_bs;
    Mat2 M_ss;
    Mat3 C_bb;
    Mat32 C_bs;
    Mat23 C_sb;
    Mat2 C_ss;
    Vec3 G_b;
    Vec2 G_s;
    Mat2 J_s; ///< d(foot position)/d(q_s), rows = (x, z)

    Mat5 full_mass() const {
        Mat5 M;
        M.topLeftCorner<3, 3>() = M_bb;
        M.topRightCorner<3, 2>() = M_bs;
        M.bottomLeftCorner<2, 3>() = M_bs.transpose();
        M.bottomRightCorner<2, 2>() = M_ss;
        return M;
    }

    Mat5 full_coriolis() const {
        Mat5 C;
        C.topLeftCorner<3, 3>() = C_bb;
        C.topRightCorner<3, 2>() = C_bs;
        C.bottomLeftCorner<2, 3>() = C_sb;
        C.bottomRightCorner<2, 2>() = C_ss;
        return C;
    }
};

/// Forces external to the actuation: ground reaction at the foot (world
/// frame, N) and an injected joint-space disturbance (N m).
struct ExternalForces {
    Vec2 F_s = Vec2::Zero();
    Vec2 tau_d = Vec2::Zero();
};

struct Accelerations {
    Vec3 qdd_b;
    Vec2 qdd_s;
};

namespace detail {

inline Vec2 unit_down(double a) { return Vec2(std::sin(a), -std::cos(a)); }
inline Vec2 unit_down_d(double a) { return Vec2(std::cos(a), std::sin(a)); }

/// Per-body COM kinematics: position, velocity Jacobian and its partial
/// derivatives w.r.t. the three angle coordinates (pitch, hip, knee).
struct BodyKin {
    Vec2 com;
    Mat25 Jv = Mat25::Zero();
    std::array<Mat25, 3> dJv = {Mat25::Zero(), Mat25::Zero(), Mat25::Zero()};
    Vec5 Jw = Vec5::Zero();
    double mass = 0.0;
    double inertia = 0.0;
};

inline std::array<BodyKin, 3> body_kinematics(const ModelParams& p,
                                              const GeneralizedState& s) {
    const double x = s.q_b(0), z = s.q_b(1), phi = s.q_b(2);
    const double a1 = phi + s.q_s(0);
    const double a2 = a1 + s.q_s(1);
    const double d = p.attachment_offset;
    const double l1 = p.link_lengths[0];
    const double c1 = p.link_com_offsets[0];
    const double c2 = p.link_com_offsets[1];

    const Vec2 u_phi = unit_down(phi), du_phi = unit_down_d(phi);
    const Vec2 u1 = unit_down(a1), du1 = unit_down_d(a1);
    const Vec2 u2 = unit_down(a2), du2 = unit_down_d(a2);

    std::array<BodyKin, 3> bodies;

    // Torso.
    BodyKin& b0 = bodies[0];
    b0.com = Vec2(x, z);
    b0.Jv.col(0) = Vec2(1, 0);
    b0.Jv.col(1) = Vec2(0, 1);
    b0.Jw(2) = 1.0;
    b0.mass = p.torso_mass;
    b0.inertia = p.torso_inertia;

    // Link 1 (hip to knee). Columns of Jv: x, z, pitch, hip, knee.
    BodyKin& b1 = bodies[1];
    b1.com = b0.com + d * u_phi + c1 * u1;
    b1.Jv.col(0) = Vec2(1, 0);
    b1.Jv.col(1) = Vec2(0, 1);
    b1.Jv.col(2) = d * du_phi + c1 * du1;
    b1.Jv.col(3) = c1 * du1;
    b1.Jw(2) = b1.Jw(3) = 1.0;
    b1.mass = p.link_masses[0];
    b1.inertia = p.link_inertias[0];
    // d(du)/da = -u, applied per chain-rule on the angle arguments.
    b1.dJv[0].col(2) = -d * u_phi - c1 * u1; // d/d(pitch)
    b1.dJv[0].col(3) = -c1 * u1;
    b1.dJv[1].col(2) = -c1 * u1;             // d/d(hip)
    b1.dJv[1].col(3) = -c1 * u1;

    // Link 2 (knee to foot).
    BodyKin& b2 = bodies[2];
    b2.com = b0.com + d * u_phi + l1 * u1 + c2 * u2;
    b2.Jv.col(0) = Vec2(1, 0);
    b2.Jv.col(1) = Vec2(0, 1);
    b2.Jv.col(2) = d * du_phi + l1 * du1 + c2 * du2;
    b2.Jv.col(3) = l1 * du1 + c2 * du2;
    b2.Jv.col(4) = c2 * du2;
    b2.Jw(2) = b2.Jw(3) = b2.Jw(4) = 1.0;
    b2.mass = p.link_masses[1];
    b2.inertia = p.link_inertias[1];
    b2.dJv[0].col(2) = -d * u_phi - l1 * u1 - c2 * u2;
    b2.dJv[0].col(3) = -l1 * u1 - c2 * u2;
    b2.dJv[0].col(4) = -c2 * u2;
    b2.dJv[1].col(2) = -l1 * u1 - c2 * u2;
    b2.dJv[1].col(3) = -l1 * u1 - c2 * u2;
    b2.dJv[1].col(4) = -c2 * u2;
    b2.dJv[2].col(2) = -c2 * u2;
    b2.dJv[2].col(3) = -c2 * u2;
    b2.dJv[2].col(4) = -c2 * u2;

    return bodies;
}

} // namespace detail

/// Foot (leg end-effector) position in the world frame.
inline Vec2 foot_position(const ModelParams& p, const GeneralizedState& s) {
    const double phi = s.q_b(2);
    const double a1 = phi + s.q_s(0);
    const double a2 = a1 + s.q_s(1);
    return Vec2(s.q_b(0), s.q_b(1)) + p.attachment_offset * detail::unit_down(phi) +
           p.link_lengths[0] * detail::unit_down(a1) +
           p.link_lengths[1] * detail::unit_down(a2);
}

/// Full foot Jacobian d(foot)/dq, 2x5 (base columns included).
inline Mat25 foot_jacobian_full(const ModelParams& p, const GeneralizedState& s) {
    const double phi = s.q_b(2);
    const double a1 = phi + s.q_s(0);
    const double a2 = a1 + s.q_s(1);
    const Vec2 du_phi = detail::unit_down_d(phi);
    const Vec2 du1 = detail::unit_down_d(a1);
    const Vec2 du2 = detail::unit_down_d(a2);
    const double l1 = p.link_lengths[0], l2 = p.link_lengths[1];
    Mat25 J = Mat25::Zero();
    J.col(0) = Vec2(1, 0);
    J.col(1) = Vec2(0, 1);
    J.col(2) = p.attachment_offset * du_phi + l1 * du1 + l2 * du2;
    J.col(3) = l1 * du1 + l2 * du2;
    J.col(4) = l2 * du2;
    return J;
}

/// Foot velocity including the contribution of base motion.
inline Vec2 foot_velocity(const ModelParams& p, const GeneralizedState& s) {
    return foot_jacobian_full(p, s) * s.dq();
}

/// Contact Jacobian restricted to the leg joints: J_s = d(foot)/d(q_s).
inline Mat2 contact_jacobian(const ModelParams& p, const GeneralizedState& s) {
    if (!s.finite())
        throw InvalidStateError("contact_jacobian: non-finite state");
    return foot_jacobian_full(p, s).rightCols<2>();
}

/// Evaluate all block-partitioned dynamics terms at a state.
///
/// M is assembled as sum of m J_v^T J_v + I J_w J_w^T over the three
/// bodies; C from Christoffel symbols of the exact dM/dq; G as the
/// gradient of the gravitational potential.
inline DynamicsTerms eval_terms(const ModelParams& p, const GeneralizedState& s) {
    if (!s.finite())
        throw InvalidStateError("eval_terms: non-finite state");

    const auto bodies = detail::body_kinematics(p, s);

    Mat5 M = Mat5::Zero();
    std::array<Mat5, 5> dM;
    dM.fill(Mat5::Zero());
    Vec5 G = Vec5::Zero();

    for (const auto& b : bodies) {
        M += b.mass * b.Jv.transpose() * b.Jv + b.inertia * b.Jw * b.Jw.transpose();
        for (int k = 0; k < 3; ++k) {
            const Mat5 term = b.mass * (b.dJv[k].transpose() * b.Jv +
                                        b.Jv.transpose() * b.dJv[k]);
            dM[k + 2] += term; // angle coordinates are q2..q4
        }
        G += p.gravity * b.mass * b.Jv.row(1).transpose();
    }

    const Vec5 dq = s.dq();
    Mat5 C = Mat5::Zero();
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            double cij = 0.0;
            for (int k = 0; k < 5; ++k)
                cij += 0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k)) * dq(k);
            C(i, j) = cij;
        }

    DynamicsTerms t;
    t.M_bb = M.topLeftCorner<3, 3>();
    t.M_bs = M.topRightCorner<3, 2>();
    t.M_ss = M.bottomRightCorner<2, 2>();
    t.C_bb = C.topLeftCorner<3, 3>();
    t.C_bs = C.topRightCorner<3, 2>();
    t.C_sb = C.bottomLeftCorner<2, 3>();
    t.C_ss = C.bottomRightCorner<2, 2>();
    t.G_b = G.head<3>();
    t.G_s = G.tail<2>();
    t.J_s = foot_jacobian_full(p, s).rightCols<2>();
    return t;
}

/// Leg accelerations from the nominal leg model with the base acceleration
/// prescribed: M_ss qdd_s = tau_s + J_s^T F_s + tau_d - C_ss dq_s - G_s
/// - M_bs^T qdd_b - C_sb dq_b. The base row is not integrated; qdd_b is
/// echoed back.
inline Accelerations forward_dynamics(const ModelParams&,
                                      const GeneralizedState& s,
                                      const Vec2& tau_s,
                                      const Vec3& torso_accel_cmd,
                                      const ExternalForces& ext,
                                      const DynamicsTerms& t) {
    const Vec2 rhs = tau_s + t.J_s.transpose() * ext.F_s + ext.tau_d -
                     t.C_ss * s.dq_s - t.G_s -
                     t.M_bs.transpose() * torso_accel_cmd - t.C_sb * s.dq_b;
    const double det = t.M_ss.determinant();
    const double scale = t.M_ss.cwiseAbs().maxCoeff();
    if (!(std::abs(det) > 1e-12 * std::max(scale * scale, 1e-12)))
        throw ModelConfigError("forward_dynamics: singular leg inertia matrix");
    Accelerations acc;
    acc.qdd_b = torso_accel_cmd;
    acc.qdd_s = t.M_ss.inverse() * rhs;
    return acc;
}

inline Accelerations forward_dynamics(const ModelParams& p,
                                      const GeneralizedState& s,
                                      const Vec2& tau_s,
                                      const Vec3& torso_accel_cmd,
                                      const ExternalForces& ext) {
    return forward_dynamics(p, s, tau_s, torso_accel_cmd, ext, eval_terms(p, s));
}

/// Kinetic energy from per-body COM velocities. Written independently of
/// the mass-matrix assembly so energy checks exercise a second route.
inline double kinetic_energy(const ModelParams& p, const GeneralizedState& s) {
    const double phi = s.q_b(2);
    const double a1 = phi + s.q_s(0);
    const double a2 = a1 + s.q_s(1);
    const double dphi = s.dq_b(2);
    const double da1 = dphi + s.dq_s(0);
    const double da2 = da1 + s.dq_s(1);
    const Vec2 v_base(s.dq_b(0), s.dq_b(1));

    const Vec2 v_hip = v_base + p.attachment_offset * dphi * detail::unit_down_d(phi);
    const Vec2 v_c1 = v_hip + p.link_com_offsets[0] * da1 * detail::unit_down_d(a1);
    const Vec2 v_knee = v_hip + p.link_lengths[0] * da1 * detail::unit_down_d(a1);
    const Vec2 v_c2 = v_knee + p.link_com_offsets[1] * da2 * detail::unit_down_d(a2);

    return 0.5 * p.torso_mass * v_base.squaredNorm() +
           0.5 * p.torso_inertia * dphi * dphi +
           0.5 * p.link_masses[0] * v_c1.squaredNorm() +
           0.5 * p.link_inertias[0] * da1 * da1 +
           0.5 * p.link_masses[1] * v_c2.squaredNorm() +
           0.5 * p.link_inertias[1] * da2 * da2;
}

/// Gravitational potential with zero level at world z = 0.
inline double potential_energy(const ModelParams& p, const GeneralizedState& s) {
    const auto bodies = detail::body_kinematics(p, s);
    double V = 0.0;
    for (const auto& b : bodies) V += p.gravity * b.mass * b.com(1);
    return V;
}

inline double total_energy(const ModelParams& p, const GeneralizedState& s) {
    if (!s.finite())
        throw InvalidStateError("total_energy: non-finite state");
    return kinetic_energy(p, s) + potential_energy(p, s);
}

} // namespace srl::dynamics
