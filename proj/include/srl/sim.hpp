// Closed-loop fixed-step simulation: RK4 on the leg joints at the physics
// rate, zero-order-hold control at the control rate, prescribed torso
// replay, spring-damper contact re-evaluated at every integrator stage.
#pragma once

#include "srl/classifier.hpp"
#include "srl/contact.hpp"
#include "srl/controller.hpp"
#include "srl/core.hpp"
#include "srl/dynamics.hpp"
#include "srl/gait.hpp"
#include "srl/record.hpp"
#include "srl/torso.hpp"
#include "srl/vic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace srl::sim {

enum class ControllerMode { IIC_low, IIC_high, VIC, Passive };

inline const char* to_string(ControllerMode m) {
    switch (m) {
        case ControllerMode::IIC_low: return "iic_low";
        case ControllerMode::IIC_high: return "iic_high";
        case ControllerMode::VIC: return "vic";
        case ControllerMode::Passive: return "passive";
    }
    return "?";
}

/// Hip-axis disturbance pulse, active on [t_start, t_end).
struct DisturbancePulse {
    double t_start = 0.0;
    double t_end = 0.0;
    double torque = 0.0; ///< N m
};

struct ScenarioConfig {
    dynamics::ModelParams model;
    contact::GroundModel ground;
    contact::PhaseThresholds thresholds;
    TorsoMotion torso;
    ControllerMode mode = ControllerMode::IIC_low;
    vic::SchedulerConfig scheduler; ///< LI doubles as the IIC_low pair, HI as IIC_high
    control::PidGains pid;
    control::HybridOptions options;
    double dt_physics = 1e-3;  ///< s
    double dt_control = 1e-2;  ///< s, integer multiple of dt_physics
    double duration = 10.0;    ///< s, integer multiple of dt_physics
    double init_hip_offset = 0.0; ///< rad added to the hip at t = 0
    bool contact_enabled = true;
    std::vector<DisturbancePulse> disturbances;
    std::uint64_t seed = 0;

    void validate() const {
        model.validate();
        ground.validate();
        thresholds.validate();
        torso.validate();
        scheduler.validate();
        pid.validate();
        if (!(dt_physics > 0.0) || !(duration > 0.0))
            throw ConfigError("ScenarioConfig: dt_physics and duration must be > 0");
        const double ratio = dt_control / dt_physics;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0)
            throw ConfigError("ScenarioConfig: dt_control must be an integer multiple of dt_physics");
        const double steps = duration / dt_physics;
        if (std::abs(steps - std::round(steps)) > 1e-6)
            throw ConfigError("ScenarioConfig: duration must be an integer multiple of dt_physics");
    }
};

/// A fully assembled run: configuration plus reference generator plus the
/// classifier (required only in VIC mode).
struct Scenario {
    ScenarioConfig cfg;
    gait::GaitReference reference;
    std::optional<nn::PhaseClassifier> classifier;
};

/// Nominal impedance inertia: the hip entry of M_ss averaged over one
/// reference cycle. Fixed per run so the impedance model has constant M.
inline double nominal_hip_inertia(const dynamics::ModelParams& model,
                                  const gait::GaitReference& ref, double dt = 0.01) {
    const double T = ref.cycle_period();
    double acc = 0.0;
    std::size_t n = 0;
    for (double t = 0.0; t < T - 1e-12; t += dt, ++n) {
        dynamics::GeneralizedState s;
        s.q_s = ref.at(t).q;
        acc += dynamics::eval_terms(model, s).M_ss(0, 0);
    }
    if (n == 0) throw ConfigError("nominal_hip_inertia: empty reference cycle");
    return acc / static_cast<double>(n);
}

namespace detail {

struct StageEval {
    Vec2 qdd_s;
    contact::ContactState contact;
    double jtf_hip = 0.0;
};

/// Plant derivative at (t, q_s, dq_s) under a held torque command.
inline StageEval eval_plant(const ScenarioConfig& cfg, double t, const Vec2& q_s,
                            const Vec2& dq_s, const Vec2& tau, double tau_d_hip) {
    dynamics::GeneralizedState s;
    cfg.torso.state_at(t, &s.q_b, &s.dq_b, nullptr);
    Vec3 qdd_b;
    cfg.torso.state_at(t, nullptr, nullptr, &qdd_b);
    s.q_s = q_s;
    s.dq_s = dq_s;

    StageEval out;
    dynamics::ExternalForces ext;
    if (cfg.contact_enabled) {
        const Vec2 foot = dynamics::foot_position(cfg.model, s);
        const Vec2 foot_v = dynamics::foot_velocity(cfg.model, s);
        out.contact = contact::ground_reaction(cfg.ground, foot(1), foot_v(1), foot_v(0));
        ext.F_s = Vec2(out.contact.grf_tangential, out.contact.grf);
    } else {
        out.contact.foot_height = dynamics::foot_position(cfg.model, s)(1);
    }
    ext.tau_d = Vec2(tau_d_hip, 0.0);

    const auto terms = dynamics::eval_terms(cfg.model, s);
    out.jtf_hip = (terms.J_s.transpose() * ext.F_s)(0);
    out.qdd_s = dynamics::forward_dynamics(cfg.model, s, tau, qdd_b, ext, terms).qdd_s;
    return out;
}

inline double disturbance_at(const ScenarioConfig& cfg, double t) {
    double tau = 0.0;
    for (const auto& p : cfg.disturbances)
        if (t >= p.t_start && t < p.t_end) tau += p.torque;
    return tau;
}

} // namespace detail

/// One RK4 step of the leg under a held command; contact and torso terms
/// are re-evaluated at every stage. Throws DivergenceError when the state
/// leaves the finite domain.
inline void step(const ScenarioConfig& cfg, double t, Vec2& q_s, Vec2& dq_s,
                 const Vec2& tau) {
    const double h = cfg.dt_physics;
    try {
        const double tau_d0 = detail::disturbance_at(cfg, t);
        const double tau_dh = detail::disturbance_at(cfg, t + 0.5 * h);
        const double tau_d1 = detail::disturbance_at(cfg, t + h);

        const auto k1 = detail::eval_plant(cfg, t, q_s, dq_s, tau, tau_d0);
        const auto k2 = detail::eval_plant(cfg, t + 0.5 * h, q_s + 0.5 * h * dq_s,
                                           dq_s + 0.5 * h * k1.qdd_s, tau, tau_dh);
        const Vec2 v2 = dq_s + 0.5 * h * k1.qdd_s;
        const auto k3 = detail::eval_plant(cfg, t + 0.5 * h, q_s + 0.5 * h * v2,
                                           dq_s + 0.5 * h * k2.qdd_s, tau, tau_dh);
        const Vec2 v3 = dq_s + 0.5 * h * k2.qdd_s;
        const auto k4 = detail::eval_plant(cfg, t + h, q_s + h * v3,
                                           dq_s + h * k3.qdd_s, tau, tau_d1);

        const Vec2 v4 = dq_s + h * k3.qdd_s;
        q_s += h / 6.0 * (dq_s + 2.0 * v2 + 2.0 * v3 + v4);
        dq_s += h / 6.0 * (k1.qdd_s + 2.0 * k2.qdd_s + 2.0 * k3.qdd_s + k4.qdd_s);
    } catch (const InvalidStateError&) {
        // an intermediate RK4 stage left the finite domain
        throw DivergenceError("simulation diverged", t);
    }

    if (!all_finite(q_s) || !all_finite(dq_s))
        throw DivergenceError("simulation diverged", t);
}

inline SimRecord run_scenario(const Scenario& scenario) {
    const ScenarioConfig& cfg = scenario.cfg;
    cfg.validate();
    if (cfg.mode == ControllerMode::VIC && !scenario.classifier)
        throw ConfigError("run_scenario: VIC mode requires a classifier");

    const long n_steps = std::lround(cfg.duration / cfg.dt_physics);
    const long ctrl_every = std::lround(cfg.dt_control / cfg.dt_physics);

    const double M_imp = nominal_hip_inertia(cfg.model, scenario.reference);

    // Impedance parameters per mode; VIC threads them through the scheduler.
    vic::SchedulerConfig sched_cfg = cfg.scheduler;
    sched_cfg.gate.dt_control = cfg.dt_control;
    std::optional<vic::ImpedanceScheduler> scheduler;
    control::ImpedanceParams imp;
    imp.M = M_imp;
    imp.dBmax = sched_cfg.dBmax;
    imp.dKmax = sched_cfg.dKmax;
    imp.B0 = sched_cfg.LI.B;
    imp.K0 = sched_cfg.LI.K;
    switch (cfg.mode) {
        case ControllerMode::IIC_low:
        case ControllerMode::Passive:
            imp.B = sched_cfg.LI.B;
            imp.K = sched_cfg.LI.K;
            break;
        case ControllerMode::IIC_high:
            imp.B = sched_cfg.HI.B;
            imp.K = sched_cfg.HI.K;
            break;
        case ControllerMode::VIC:
            scheduler.emplace(sched_cfg, M_imp);
            imp = scheduler->current();
            break;
    }

    dynamics::GeneralizedState state;
    const auto ref0 = scenario.reference.at(0.0);
    state.q_s = ref0.q + Vec2(cfg.init_hip_offset, 0.0);
    state.dq_s = ref0.dq;

    control::PidState pid;
    Vec2 tau = Vec2::Zero();
    double grf_prev = 0.0;
    double grf_rate = 0.0;
    contact::GaitPhase phase_true = contact::GaitPhase::Swing;
    contact::GaitPhase phase_pred = contact::GaitPhase::Swing;
    double confidence = 1.0;
    GateVerdict verdict = GateVerdict::Accepted;
    double dist_norm = 0.0;

    SimRecord rec;
    rec.rows.reserve(static_cast<std::size_t>(n_steps) + 1);

    for (long i = 0; i <= n_steps; ++i) {
        const double t = static_cast<double>(i) * cfg.dt_physics;
        cfg.torso.state_at(t, &state.q_b, &state.dq_b, nullptr);
        const auto ref = scenario.reference.at(t);

        // Pre-step plant evaluation: contact state, accelerations and the
        // measured interaction force at exactly this sample.
        const auto pre = detail::eval_plant(cfg, t, state.q_s, state.dq_s, tau,
                                            detail::disturbance_at(cfg, t));

        const bool control_tick = (i % ctrl_every) == 0 && i < n_steps;
        if (control_tick) {
            grf_rate = (i == 0) ? 0.0 : (pre.contact.grf - grf_prev) / cfg.dt_control;
            grf_prev = pre.contact.grf;
            phase_true = contact::label_phase(pre.contact, grf_rate, cfg.thresholds);

            const double e = state.q_s(0) - ref.q(0);
            const double de = state.dq_s(0) - ref.dq(0);
            if (cfg.mode == ControllerMode::VIC) {
                nn::PhaseFeatures f;
                f.abs_err = std::abs(e);
                f.abs_derr = std::abs(de);
                f.grf = pre.contact.grf;
                f.grf_rate = grf_rate;
                const auto r = scheduler->update(*scenario.classifier, f);
                imp = r.params;
                phase_pred = r.label;
                confidence = r.confidence;
                verdict = r.verdict;
            } else {
                phase_pred = phase_true;
                confidence = 1.0;
                verdict = GateVerdict::Accepted;
            }
            dist_norm = std::abs((imp.B - imp.B0) * de + (imp.K - imp.K0) * e);

            if (cfg.mode == ControllerMode::Passive) {
                tau = Vec2::Zero();
            } else {
                Vec3 qdd_b;
                cfg.torso.state_at(t, nullptr, nullptr, &qdd_b);
                const auto terms = dynamics::eval_terms(cfg.model, state);
                tau = control::hybrid_control(terms, ref, state, qdd_b, imp, cfg.pid,
                                              cfg.dt_control, pid, cfg.options)
                          .tau_s;
            }
        }

        RecordRow row;
        row.t = t;
        row.q_b = state.q_b;
        row.dq_b = state.dq_b;
        row.q_s = state.q_s;
        row.dq_s = state.dq_s;
        row.qdd_s = pre.qdd_s;
        row.q_d = ref.q;
        row.dq_d = ref.dq;
        row.ddq_d = ref.ddq;
        row.tau = tau;
        row.grf = pre.contact.grf;
        row.grf_tan = pre.contact.grf_tangential;
        {
            const Vec2 foot = dynamics::foot_position(cfg.model, state);
            row.foot_x = foot(0);
            row.foot_z = foot(1);
        }
        row.phase_true = phase_true;
        row.phase_pred = phase_pred;
        row.confidence = confidence;
        row.B = imp.B;
        row.K = imp.K;
        row.gate = verdict;
        row.jtf_hip = pre.jtf_hip;
        row.dist_norm = dist_norm;
        row.energy = dynamics::total_energy(cfg.model, state);
        rec.rows.push_back(row);

        if (i < n_steps) {
            try {
                step(cfg, t, state.q_s, state.dq_s, tau);
            } catch (const DivergenceError&) {
                throw DivergenceError("run_scenario: simulation diverged", t);
            }
        }
    }
    return rec;
}

struct SweepItem {
    std::optional<SimRecord> record;
    std::string error;
};

/// Run scenarios independently, in parallel up to SRL_SIM_THREADS (or the
/// hardware concurrency). Failures are captured per item; the sweep always
/// completes.
inline std::vector<SweepItem> run_sweep(const std::vector<Scenario>& scenarios) {
    std::vector<SweepItem> items(scenarios.size());
    if (scenarios.empty()) throw ConfigError("run_sweep: no scenarios");

    std::size_t max_threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SRL_SIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1)
            max_threads = static_cast<std::size_t>(v);
    }
    max_threads = std::min(max_threads, scenarios.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= scenarios.size()) return;
            try {
                items[i].record = run_scenario(scenarios[i]);
            } catch (const std::exception& e) {
                items[i].error = e.what();
            }
        }
    };
    if (max_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(max_threads);
        for (std::size_t i = 0; i < max_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return items;
}

} // namespace srl::sim
