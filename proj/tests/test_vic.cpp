#include <catch2/catch_amalgamated.hpp>

#include <srl/vic.hpp>

#include <random>

using namespace srl;
using namespace srl::vic;
using srl::contact::GaitPhase;
using srl::sim::GateVerdict;

namespace {

control::ImpedanceParams params(double M, double B, double K) {
    control::ImpedanceParams p;
    p.M = M;
    p.B = B;
    p.K = K;
    p.B0 = B;
    p.K0 = K;
    return p;
}

/// Independent re-statement of the three stability inequalities.
GateVerdict oracle(double M, double B, double K, double dB, double dK, double alpha,
                   double ke) {
    if (!(alpha * B + K - alpha * alpha * M + ke >= 0.0)) return GateVerdict::RejectedCond1;
    if (!(B - alpha * M > 0.0)) return GateVerdict::RejectedCond2;
    if (!(2.0 * alpha * K + 2.0 * alpha * ke - alpha * dB - dK > 0.0))
        return GateVerdict::RejectedCond3;
    return GateVerdict::Accepted;
}

} // namespace

TEST_CASE("smoothing gain hits the documented sigmoid values", "[vic]") {
    REQUIRE(smooth_gain(20.0) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(smooth_gain(0.0) == Catch::Approx(1.0 / (1.0 + std::exp(5.0))).margin(1e-12));
    REQUIRE(smooth_gain(0.0) == Catch::Approx(0.00669285).margin(1e-8));
    REQUIRE(smooth_gain(60.0) > 0.9999);
    double prev = -1.0;
    for (double x = 0.0; x <= 80.0; x += 0.5) {
        const double s = smooth_gain(x);
        REQUIRE(s > prev);
        REQUIRE(s > 0.0);
        REQUIRE(s < 1.0);
        prev = s;
    }
    REQUIRE_THROWS_AS(smooth_gain(-1.0), InvalidStateError);
}

TEST_CASE("impedance delta interpolates between the levels", "[vic]") {
    const ImpedancePair hi{40.0, 400.0}, lo{5.0, 40.0};
    REQUIRE(impedance_delta(0.0, hi, lo).K == 0.0);
    REQUIRE(impedance_delta(0.0, hi, lo).B == 0.0);
    REQUIRE(impedance_delta(1.0, hi, lo).B == Catch::Approx(35.0));
    REQUIRE(impedance_delta(1.0, hi, lo).K == Catch::Approx(360.0));
    REQUIRE(impedance_delta(0.5, hi, lo).K == Catch::Approx(180.0));
    REQUIRE_THROWS_AS(impedance_delta(1.5, hi, lo), InvalidStateError);
}

TEST_CASE("stability gate accepts and rejects per the inequalities", "[vic]") {
    GateConfig gate;
    gate.alpha = 1.0;
    gate.dt_control = 0.01;

    // alpha=1, M=1, B=40, K=400, zero rates: 439 >= 0, 39 > 0, 800 > 0.
    const auto ok = stability_gate(params(1.0, 40.0, 400.0), params(1.0, 40.0, 400.0), gate);
    REQUIRE(ok.verdict == GateVerdict::Accepted);
    REQUIRE(ok.accepted.B == 40.0);
    REQUIRE(ok.accepted.dB == 0.0);

    // B = 0.5 < alpha*M = 1 violates condition 2; previous comes back.
    const auto prev = params(1.0, 40.0, 400.0);
    const auto rej = stability_gate(params(1.0, 0.5, 400.0), prev, gate);
    REQUIRE(rej.verdict == GateVerdict::RejectedCond2);
    REQUIRE(rej.accepted.B == prev.B);
    REQUIRE(rej.accepted.K == prev.K);

    // K ramp with dK = 2*alpha*K_cand + 1 violates condition 3.
    const double k_prev = 100.0;
    const double dk = (2.0 * gate.alpha * k_prev + 1.0) / (1.0 - 2.0 * gate.alpha * gate.dt_control);
    const auto cand = params(1.0, 40.0, k_prev + gate.dt_control * dk);
    const auto rej3 = stability_gate(cand, params(1.0, 40.0, k_prev), gate);
    REQUIRE(rej3.verdict == GateVerdict::RejectedCond3);

    GateConfig bad;
    bad.alpha = 0.0;
    REQUIRE_THROWS_AS(stability_gate(cand, cand, bad), ControllerConfigError);
    GateConfig bad2;
    bad2.alpha = 1.0;
    bad2.env_stiffness = -1.0;
    REQUIRE_THROWS_AS(stability_gate(cand, cand, bad2), ControllerConfigError);
}

TEST_CASE("gate verdicts agree with the oracle over random tuples", "[vic]") {
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> uB(0.01, 60.0), uK(0.1, 600.0),
        uM(0.05, 3.0), uA(0.05, 30.0), uKe(0.0, 200.0);
    GateConfig gate;
    gate.dt_control = 0.01;
    for (int i = 0; i < 100000; ++i) {
        const auto prev = params(0.0, uB(rng), uK(rng));
        auto cand = params(uM(rng), uB(rng), uK(rng));
        gate.alpha = uA(rng);
        gate.env_stiffness = uKe(rng);
        const auto got = stability_gate(cand, prev, gate);
        const auto want = oracle(cand.M, cand.B, cand.K, (cand.B - prev.B) / gate.dt_control,
                                 (cand.K - prev.K) / gate.dt_control, gate.alpha,
                                 gate.env_stiffness);
        REQUIRE(got.verdict == want);
        if (want == GateVerdict::Accepted) {
            REQUIRE(got.accepted.B == cand.B);
        } else {
            REQUIRE(got.accepted.B == prev.B);
            REQUIRE(got.accepted.K == prev.K);
        }
    }
}

TEST_CASE("steady swing emits the low level exactly", "[vic]") {
    SchedulerConfig cfg;
    ImpedanceScheduler sched(cfg, 0.8);
    for (int i = 0; i < 50; ++i) {
        const auto r = sched.update_with_label(GaitPhase::Swing);
        REQUIRE(r.params.B == cfg.LI.B);
        REQUIRE(r.params.K == cfg.LI.K);
        REQUIRE(r.verdict == GateVerdict::Accepted);
    }
}

TEST_CASE("held stance ramps the stiffness along the sigmoid", "[vic]") {
    SchedulerConfig cfg;
    ImpedanceScheduler sched(cfg, 0.8);
    for (int i = 0; i < 10; ++i) sched.update_with_label(GaitPhase::Swing);

    std::vector<double> K_seq, B_seq;
    for (int i = 0; i < 120; ++i) {
        const auto r = sched.update_with_label(GaitPhase::Stance);
        REQUIRE(r.verdict == GateVerdict::Accepted);
        K_seq.push_back(r.params.K);
        B_seq.push_back(r.params.B);
    }
    const double mid_K = 0.5 * (cfg.LI.K + cfg.HI.K);
    int crossing = -1;
    for (std::size_t i = 0; i < K_seq.size(); ++i) {
        REQUIRE(K_seq[i] >= cfg.LI.K);
        REQUIRE(K_seq[i] <= cfg.HI.K);
        REQUIRE(B_seq[i] >= cfg.LI.B);
        REQUIRE(B_seq[i] <= cfg.HI.B);
        if (i > 0) REQUIRE(K_seq[i] >= K_seq[i - 1]);
        if (crossing < 0 && K_seq[i] >= mid_K) crossing = static_cast<int>(i);
    }
    REQUIRE(K_seq.front() <= cfg.LI.K + 0.02 * (cfg.HI.K - cfg.LI.K));
    REQUIRE(K_seq.back() >= cfg.HI.K - 0.01 * cfg.HI.K);
    REQUIRE(crossing >= 19);
    REQUIRE(crossing <= 21);
}

TEST_CASE("every emitted pair is gate-safe under arbitrary label churn", "[vic]") {
    SchedulerConfig cfg;
    ImpedanceScheduler sched(cfg, 0.8);
    std::mt19937 rng(62);
    std::uniform_int_distribution<int> dwell(1, 40), lab(0, 2);
    control::ImpedanceParams prev = sched.current();
    int cycles = 0;
    while (cycles < 5000) {
        const auto phase = contact::phase_from_index(lab(rng));
        const int hold = dwell(rng);
        for (int i = 0; i < hold && cycles < 5000; ++i, ++cycles) {
            const auto r = sched.update_with_label(phase);
            const double dB = (r.params.B - prev.B) / cfg.gate.dt_control;
            const double dK = (r.params.K - prev.K) / cfg.gate.dt_control;
            REQUIRE(oracle(r.params.M, r.params.B, r.params.K, dB, dK,
                           sched.config().gate.alpha,
                           sched.config().gate.env_stiffness) == GateVerdict::Accepted);
            REQUIRE(r.params.B >= cfg.LI.B);
            REQUIRE(r.params.B <= cfg.HI.B);
            REQUIRE(r.params.K >= cfg.LI.K);
            REQUIRE(r.params.K <= cfg.HI.K);
            REQUIRE(std::abs(dB) <= cfg.dBmax + 1e-9);
            REQUIRE(std::abs(dK) <= cfg.dKmax + 1e-9);
            prev = r.params;
        }
    }
}

TEST_CASE("a rejected candidate falls back to the previous cycle", "[vic]") {
    // A huge level gap with loose rate caps makes the first stance
    // candidate violate condition 3, so that cycle re-emits the previous
    // parameters and flags the rejection.
    SchedulerConfig cfg;
    cfg.LI = {16.0, 2.0};
    cfg.HI = {32.0, 5000.0};
    cfg.dKmax = 1e6;
    ImpedanceScheduler sched(cfg, 0.8);
    for (int i = 0; i < 5; ++i) sched.update_with_label(GaitPhase::Swing);
    const auto before = sched.current();
    const auto r = sched.update_with_label(GaitPhase::Stance);
    REQUIRE(r.verdict == GateVerdict::RejectedCond3);
    REQUIRE(r.params.K == before.K);
    REQUIRE(r.params.B == before.B);
}

TEST_CASE("scheduler configuration is validated", "[vic]") {
    SchedulerConfig bad;
    bad.LI = {40.0, 400.0};
    bad.HI = {5.0, 40.0};
    REQUIRE_THROWS_AS(ImpedanceScheduler(bad, 0.8), ControllerConfigError);
    SchedulerConfig bad2;
    bad2.sigmoid_a = 0.0;
    REQUIRE_THROWS_AS(ImpedanceScheduler(bad2, 0.8), ControllerConfigError);
    SchedulerConfig good;
    REQUIRE_THROWS_AS(ImpedanceScheduler(good, 0.0), ControllerConfigError);
}
