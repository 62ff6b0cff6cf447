#include <catch2/catch_amalgamated.hpp>

#include <srl/metrics.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

using namespace srl;
using namespace srl::metrics;

namespace {

SignalWindow window_of(std::vector<double> v, double dt) {
    SignalWindow w;
    w.values = std::move(v);
    w.dt = dt;
    w.t1 = 0.0;
    w.t2 = dt * static_cast<double>(w.values.size() - 1);
    return w;
}

std::vector<double> sampled(double (*f)(double), double dt, double dur) {
    std::vector<double> x;
    for (double t = 0.0; t <= dur + 0.5 * dt; t += dt) x.push_back(f(t));
    return x;
}

} // namespace

TEST_CASE("rmsj of a constant signal is zero", "[metrics]") {
    // the 1/dt^2 stencil amplifies filter round-off, hence the loose margin
    const auto w = window_of(std::vector<double>(500, 7.5), 1e-3);
    REQUIRE(rmsj(w) == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("rmsj of sin(t) over one period is sqrt(1/2)", "[metrics]") {
    // s'' = -sin(t); RMS over [0, 2*pi] = 1/sqrt(2). The 0.16 Hz content is
    // far below the default 20 Hz cutoff, so filtering changes nothing.
    const double dt = 2.0 * M_PI / 4000.0;
    const auto w = window_of(sampled([](double t) { return std::sin(t); }, dt,
                                     2.0 * M_PI),
                             dt);
    REQUIRE(rmsj(w) == Catch::Approx(std::sqrt(0.5)).epsilon(0.01));
}

TEST_CASE("rmsj of t^3/6 over [0, sqrt(3)] is one", "[metrics]") {
    // s'' = t, so RMS over [0, T] is T/sqrt(3): exactly 1 at T = sqrt(3).
    // Filtering off: the analytic oracle should see the bare differences.
    const double T = std::sqrt(3.0);
    const double dt = T / 3000.0;
    const auto w = window_of(
        sampled([](double t) { return t * t * t / 6.0; }, dt, T), dt);
    REQUIRE(rmsj(w, 0.0) == Catch::Approx(1.0).epsilon(0.01));
}

TEST_CASE("rmsj scales linearly with the signal", "[metrics]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> base(800);
    double acc = 0.0;
    for (auto& v : base) {
        acc += 0.2 * u(rng);
        v = acc;
    }
    auto w = window_of(base, 1e-3);
    const double r1 = rmsj(w);
    for (auto& v : w.values) v *= 3.7;
    REQUIRE(rmsj(w) == Catch::Approx(3.7 * r1).epsilon(1e-9));
}

TEST_CASE("rmsj ignores constant and linear components", "[metrics]") {
    const double dt = 1e-3;
    auto w = window_of(sampled([](double t) { return std::sin(8.0 * t); }, dt, 1.0), dt);
    const double r0 = rmsj(w, 0.0);
    auto shifted = w;
    for (std::size_t i = 0; i < shifted.values.size(); ++i)
        shifted.values[i] += 4.2 - 1.3 * static_cast<double>(i) * dt;
    // Unfiltered: the difference stencils annihilate affine parts exactly.
    REQUIRE(rmsj(shifted, 0.0) == Catch::Approx(r0).epsilon(1e-9));
    // Filtered: a pure constant shift passes the DC-exact filter unchanged.
    auto offset = w;
    for (auto& v : offset.values) v += 11.0;
    REQUIRE(rmsj(offset) == Catch::Approx(rmsj(w)).epsilon(1e-9));
}

TEST_CASE("window validation rejects degenerate inputs", "[metrics]") {
    SignalWindow w;
    w.values = std::vector<double>(100, 1.0);
    w.dt = 1e-2;
    w.t1 = 0.5;
    w.t2 = 0.5;
    REQUIRE_THROWS_AS(rmsj(w), InvalidStateError);
    w.t2 = 2.0; // beyond the 0.99 s span
    REQUIRE_THROWS_AS(rmsj(w), InvalidStateError);
    w.t1 = 0.90;
    w.t2 = 0.92; // only 3 samples
    REQUIRE_THROWS_AS(rmsj(w), InvalidStateError);
    w.t1 = 0.0;
    w.t2 = 0.99;
    REQUIRE_NOTHROW(rmsj(w));
}

TEST_CASE("peak force of a ramp is its endpoint", "[metrics]") {
    std::vector<double> ramp(501);
    for (std::size_t i = 0; i < ramp.size(); ++i)
        ramp[i] = 50.0 * static_cast<double>(i) / 500.0;
    REQUIRE(peak_force(window_of(ramp, 1e-2)) == Catch::Approx(50.0));
    REQUIRE(peak_force(window_of(std::vector<double>(100, 0.0), 1e-2)) == 0.0);
}

TEST_CASE("peak force dominates the window mean", "[metrics]") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> u(0.0, 40.0);
    std::vector<double> v(600);
    for (auto& x : v) x = u(rng);
    const auto w = window_of(v, 1e-3);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    REQUIRE(peak_force(w) >= mean);
}

TEST_CASE("rms tracking error oracles", "[metrics]") {
    const std::vector<double> q(400, 0.3);
    REQUIRE(rms_tracking_error(q, q) == 0.0);

    std::vector<double> offs = q;
    for (auto& v : offs) v += 0.1;
    REQUIRE(rms_tracking_error(offs, q) == Catch::Approx(0.1).epsilon(1e-12));

    const double A = 0.05;
    std::vector<double> qs(4000), qd(4000, 0.0);
    for (std::size_t i = 0; i < qs.size(); ++i)
        qs[i] = A * std::sin(2.0 * M_PI * static_cast<double>(i) / 400.0);
    REQUIRE(rms_tracking_error(qs, qd) == Catch::Approx(A / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("rms tracking error validates its inputs", "[metrics]") {
    const std::vector<double> a(10, 0.0), b(11, 0.0);
    REQUIRE_THROWS_AS(rms_tracking_error(a, b), InvalidStateError);
    REQUIRE_THROWS_AS(rms_tracking_error({}, {}), InvalidStateError);
    REQUIRE_THROWS_AS(rms_tracking_error(a, a, 5, 4), InvalidStateError);
}

TEST_CASE("rising windows run from threshold crossing to first maximum", "[metrics]") {
    // Two clipped sine lobes at 1 Hz; with filtering off the indices are
    // analytic: upcross of 1.0 at asin(0.1)/(2*pi) s, maximum at 0.25 s.
    const double dt = 1e-3;
    std::vector<double> f;
    for (double t = 0.0; t < 2.0; t += dt)
        f.push_back(std::max(0.0, 10.0 * std::sin(2.0 * M_PI * t)));
    const auto wins = rising_windows(f, dt, 1.0, 0.0);
    REQUIRE(wins.size() == 2);
    const std::size_t cross = static_cast<std::size_t>(
        std::ceil(std::asin(0.1) / (2.0 * M_PI) / dt));
    REQUIRE(wins[0].first >= cross - 1);
    REQUIRE(wins[0].first <= cross + 1);
    REQUIRE(wins[0].last >= 248);
    REQUIRE(wins[0].last <= 252);
    REQUIRE(wins[1].first >= 1000 + cross - 1);
    REQUIRE(wins[1].last <= 1252);
    REQUIRE(wins[1].last >= 1248);
}

TEST_CASE("signals that never cross give no windows", "[metrics]") {
    const std::vector<double> flat(300, 0.2);
    REQUIRE(rising_windows(flat, 1e-3, 1.0).empty());
    REQUIRE_THROWS_AS(mean_rising_rmsj(flat, 1e-3, 1.0), InvalidStateError);
}

TEST_CASE("mean rising rmsj averages the per-window values", "[metrics]") {
    const double dt = 1e-3;
    std::vector<double> f;
    for (double t = 0.0; t < 2.0; t += dt)
        f.push_back(std::max(0.0, 10.0 * std::sin(2.0 * M_PI * t)));
    const auto wins = rising_windows(f, dt, 1.0, 0.0);
    REQUIRE(wins.size() == 2);
    double acc = 0.0;
    for (const auto& win : wins) {
        SignalWindow w;
        w.values = f;
        w.dt = dt;
        w.t1 = static_cast<double>(win.first) * dt;
        w.t2 = static_cast<double>(win.last) * dt;
        acc += rmsj(w, 0.0);
    }
    REQUIRE(mean_rising_rmsj(f, dt, 1.0, 0.0) == Catch::Approx(0.5 * acc).epsilon(1e-12));
}

TEST_CASE("metrics table round-trips through its CSV header", "[metrics]") {
    const std::string path = "metrics_test_tmp.csv";
    save_metrics_csv({{"walk-1", "iic_low", 1200.5, 32.25, 0.041},
                      {"walk-2", "vic", 2100.0, 110.0, 0.034}},
                     path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    REQUIRE(header == "run_id,mode,rmsj,peak_force_N,rms_err_rad");
    REQUIRE(row1.rfind("walk-1,iic_low,", 0) == 0);
    REQUIRE(row2.rfind("walk-2,vic,", 0) == 0);
    std::remove(path.c_str());
}
