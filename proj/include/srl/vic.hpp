// Variable impedance pipeline: phase label -> sigmoid-smoothed impedance
// level -> stability gate with previous-cycle fallback.
//
// The gate admits a candidate (B, K) only if the three closed-loop
// stability inequalities hold with the rates implied by the previous
// accepted pair:
//   (1) alpha*B + K - alpha^2*M + K_e >= 0
//   (2) B - alpha*M > 0
//   (3) 2*alpha*K + 2*alpha*K_e - alpha*dB - dK > 0
// A rejected candidate is replaced by the previous pair for that cycle.
#pragma once

#include "srl/classifier.hpp"
#include "srl/contact.hpp"
#include "srl/controller.hpp"
#include "srl/core.hpp"
#include "srl/record.hpp"

#include <algorithm>
#include <cmath>

namespace srl::vic {

struct ImpedancePair {
    double B = 0.0; ///< N m s/rad
    double K = 0.0; ///< N m/rad
};

struct GateConfig {
    double alpha = 0.0;         ///< 1/s; <= 0 means derive 0.5*B0/M at setup
    double env_stiffness = 0.0; ///< K_e, conservative default 0
    double dt_control = 0.01;   ///< s

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw ControllerConfigError("GateConfig: alpha must be > 0");
        if (env_stiffness < 0.0 || !std::isfinite(env_stiffness))
            throw ControllerConfigError("GateConfig: env_stiffness must be >= 0");
        if (!(dt_control > 0.0))
            throw ControllerConfigError("GateConfig: dt_control must be > 0");
    }
};

/// Transition smoothing gain, s = 1 / (1 + exp(-a (x - b))). x counts
/// control cycles since the commanded impedance level changed; with
/// a = 0.25, b = 20 the midpoint sits 20 cycles after the switch.
inline double smooth_gain(double cycles_since_switch, double a = 0.25, double b = 20.0) {
    if (cycles_since_switch < 0.0)
        throw InvalidStateError("smooth_gain: negative cycle count");
    return 1.0 / (1.0 + std::exp(-a * (cycles_since_switch - b)));
}

/// Scheduled step between the levels: delta = s * (HI - LI) per parameter.
inline ImpedancePair impedance_delta(double s, const ImpedancePair& hi,
                                     const ImpedancePair& lo) {
    if (s < 0.0 || s > 1.0 || !std::isfinite(s))
        throw InvalidStateError("impedance_delta: s outside [0,1]");
    return {s * (hi.B - lo.B), s * (hi.K - lo.K)};
}

struct GateResult {
    control::ImpedanceParams accepted;
    sim::GateVerdict verdict = sim::GateVerdict::Accepted;
};

/// Evaluate the three stability inequalities for `candidate`, with rates
/// taken against `previous` over one control period. On rejection the
/// previous parameters are returned unchanged (their rates zeroed).
inline GateResult stability_gate(const control::ImpedanceParams& candidate,
                                 const control::ImpedanceParams& previous,
                                 const GateConfig& gate) {
    gate.validate();
    const double a = gate.alpha, ke = gate.env_stiffness, m = candidate.M;
    const double dB = (candidate.B - previous.B) / gate.dt_control;
    const double dK = (candidate.K - previous.K) / gate.dt_control;

    GateResult r;
    sim::GateVerdict verdict = sim::GateVerdict::Accepted;
    if (!(a * candidate.B + candidate.K - a * a * m + ke >= 0.0))
        verdict = sim::GateVerdict::RejectedCond1;
    else if (!(candidate.B - a * m > 0.0))
        verdict = sim::GateVerdict::RejectedCond2;
    else if (!(2.0 * a * candidate.K + 2.0 * a * ke - a * dB - dK > 0.0))
        verdict = sim::GateVerdict::RejectedCond3;

    r.verdict = verdict;
    if (verdict == sim::GateVerdict::Accepted) {
        r.accepted = candidate;
        r.accepted.dB = dB;
        r.accepted.dK = dK;
    } else {
        r.accepted = previous;
        r.accepted.dB = 0.0;
        r.accepted.dK = 0.0;
    }
    return r;
}

struct SchedulerConfig {
    ImpedancePair LI = {16.0, 60.0};
    ImpedancePair HI = {32.0, 300.0};
    double sigmoid_a = 0.25;
    double sigmoid_b = 20.0;
    GateConfig gate;
    double dBmax = 150.0;  ///< rate caps, N m s/rad per s and N m/rad per s
    double dKmax = 2000.0;
    double tau_d_bound = 40.0; ///< N m, budget for the Delta-impedance disturbance

    void validate() const {
        if (!(HI.B > LI.B) || !(LI.B > 0.0) || !(HI.K > LI.K) || !(LI.K > 0.0))
            throw ControllerConfigError("SchedulerConfig: need HI > LI > 0 per parameter");
        if (!(sigmoid_a > 0.0) || !(sigmoid_b >= 0.0))
            throw ControllerConfigError("SchedulerConfig: bad sigmoid constants");
        if (!(dBmax > 0.0) || !(dKmax > 0.0))
            throw ControllerConfigError("SchedulerConfig: rate caps must be > 0");
    }
};

struct ScheduleResult {
    control::ImpedanceParams params;
    contact::GaitPhase label = contact::GaitPhase::Swing;
    double confidence = 1.0;
    sim::GateVerdict verdict = sim::GateVerdict::Accepted;
};

/// Per-run scheduler state machine. Stance commands the high level, swing
/// and contact-moment the low level; a level change restarts the sigmoid
/// clock. Candidates move from the last accepted pair toward the sigmoid
/// value under the rate caps, then pass the gate. Emitted values therefore
/// stay within [LI, HI] and are always gate-approved.
class ImpedanceScheduler {
  public:
    ImpedanceScheduler(const SchedulerConfig& cfg, double impedance_inertia)
        : cfg_(cfg) {
        cfg_.validate();
        if (!(impedance_inertia > 0.0))
            throw ControllerConfigError("ImpedanceScheduler: inertia must be > 0");
        if (cfg_.gate.alpha <= 0.0)
            cfg_.gate.alpha = 0.5 * cfg_.LI.B / impedance_inertia;
        cfg_.gate.validate();

        last_.M = impedance_inertia;
        last_.B = cfg_.LI.B;
        last_.K = cfg_.LI.K;
        last_.B0 = cfg_.LI.B;
        last_.K0 = cfg_.LI.K;
        last_.dBmax = cfg_.dBmax;
        last_.dKmax = cfg_.dKmax;
        // Start settled at the low level, long after any switch.
        target_high_ = false;
        cycles_ = settled_cycles();
    }

    const SchedulerConfig& config() const { return cfg_; }
    const control::ImpedanceParams& current() const { return last_; }

    ScheduleResult update(const nn::PhaseClassifier& clf, const nn::PhaseFeatures& f) {
        const auto [label, conf] = clf.classify(f);
        return update_with_label(label, conf);
    }

    ScheduleResult update_with_label(contact::GaitPhase label, double confidence = 1.0) {
        const bool want_high = label == contact::GaitPhase::Stance;
        if (want_high != target_high_) {
            target_high_ = want_high;
            cycles_ = equivalent_cycles(want_high);
        } else if (cycles_ < settled_cycles()) {
            ++cycles_;
        }

        double s = smooth_gain(static_cast<double>(cycles_), cfg_.sigmoid_a, cfg_.sigmoid_b);
        if (cycles_ >= settled_cycles()) s = 1.0; // snap once the ramp has converged
        const ImpedancePair d = impedance_delta(s, cfg_.HI, cfg_.LI);
        const double raw_B = target_high_ ? cfg_.LI.B + d.B : cfg_.HI.B - d.B;
        const double raw_K = target_high_ ? cfg_.LI.K + d.K : cfg_.HI.K - d.K;

        control::ImpedanceParams cand = last_;
        const double step_B = cfg_.dBmax * cfg_.gate.dt_control;
        const double step_K = cfg_.dKmax * cfg_.gate.dt_control;
        cand.B = std::clamp(raw_B, last_.B - step_B, last_.B + step_B);
        cand.K = std::clamp(raw_K, last_.K - step_K, last_.K + step_K);

        const GateResult g = stability_gate(cand, last_, cfg_.gate);
        last_ = g.accepted;
        return {last_, label, confidence, g.verdict};
    }

  private:
    long settled_cycles() const {
        // s within 1e-6 of 1: x >= b + ln(1e6)/a.
        return static_cast<long>(std::ceil(cfg_.sigmoid_b + std::log(1e6) / cfg_.sigmoid_a));
    }

    /// Sigmoid clock position whose scheduled value equals the last accepted
    /// K when ramping toward `to_high`. A direction change mid-ramp then
    /// resumes continuously instead of jumping to the far branch.
    long equivalent_cycles(bool to_high) const {
        const double span = cfg_.HI.K - cfg_.LI.K;
        double frac = (last_.K - cfg_.LI.K) / span;
        if (!to_high) frac = 1.0 - frac;
        frac = std::clamp(frac, 0.0, 1.0);
        if (frac <= 0.0) return 0;
        if (frac >= 1.0) return settled_cycles();
        const double x = cfg_.sigmoid_b + std::log(frac / (1.0 - frac)) / cfg_.sigmoid_a;
        return std::clamp(static_cast<long>(std::llround(x)), long{0}, settled_cycles());
    }

    SchedulerConfig cfg_;
    control::ImpedanceParams last_;
    bool target_high_ = false;
    long cycles_ = 0;
};

} // namespace srl::vic
