// Evaluation metrics: root-mean-square jerk of a signal window (the
// smoothness index), peak force, and RMS tracking error, plus detection of
// the force rising-phase windows used for the controller comparison.
#pragma once

#include "srl/core.hpp"
#include "srl/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace srl::metrics {

/// A window [t1, t2] into a uniformly sampled scalar signal starting at
/// t = 0.
struct SignalWindow {
    std::vector<double> values;
    double dt = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;

    void validate() const {
        if (!(dt > 0.0)) throw InvalidStateError("SignalWindow: dt must be > 0");
        if (!(t1 < t2)) throw InvalidStateError("SignalWindow: need t1 < t2");
        const double span = dt * static_cast<double>(values.size() - 1);
        if (t1 < -1e-12 || t2 > span + 1e-12)
            throw InvalidStateError("SignalWindow: window outside the sampled span");
        if (last_index() - first_index() + 1 < 5)
            throw InvalidStateError("SignalWindow: need at least 5 samples in window");
    }

    std::size_t first_index() const {
        return static_cast<std::size_t>(std::ceil(t1 / dt - 1e-9));
    }
    std::size_t last_index() const {
        return std::min(values.size() - 1,
                        static_cast<std::size_t>(std::floor(t2 / dt + 1e-9)));
    }
};

/// Root mean square of the signal's second time derivative over the
/// window: sqrt( 1/(t2-t1) * integral |s''|^2 dt ). The signal is low-pass
/// filtered (zero phase) at cutoff_hz before differencing; the default
/// cutoff matches the reported metric configuration.
inline double rmsj(const SignalWindow& w, double cutoff_hz = 20.0) {
    w.validate();
    std::vector<double> filtered = w.values;
    if (cutoff_hz > 0.0 && cutoff_hz < 0.5 / w.dt)
        filtered = signal::filtfilt_lowpass(filtered, cutoff_hz, 1.0 / w.dt);
    const std::vector<double> d2 = signal::second_derivative(filtered, w.dt);
    const std::size_t a = w.first_index(), b = w.last_index();
    std::vector<double> sq(d2.begin() + static_cast<std::ptrdiff_t>(a),
                           d2.begin() + static_cast<std::ptrdiff_t>(b + 1));
    for (auto& v : sq) v *= v;
    const double span = w.dt * static_cast<double>(b - a);
    return std::sqrt(signal::trapezoid(sq, w.dt) / span);
}

inline double peak_force(const SignalWindow& w) {
    w.validate();
    const std::size_t a = w.first_index(), b = w.last_index();
    return *std::max_element(w.values.begin() + static_cast<std::ptrdiff_t>(a),
                             w.values.begin() + static_cast<std::ptrdiff_t>(b + 1));
}

/// RMS of (measured - desired) over an index range [first, last].
inline double rms_tracking_error(const std::vector<double>& q,
                                 const std::vector<double>& q_d,
                                 std::size_t first = 0,
                                 std::size_t last = static_cast<std::size_t>(-1)) {
    if (q.size() != q_d.size())
        throw InvalidStateError("rms_tracking_error: length mismatch");
    if (q.empty()) throw InvalidStateError("rms_tracking_error: empty input");
    last = std::min(last, q.size() - 1);
    if (first > last) throw InvalidStateError("rms_tracking_error: empty window");
    double ss = 0.0;
    for (std::size_t i = first; i <= last; ++i) ss += (q[i] - q_d[i]) * (q[i] - q_d[i]);
    return std::sqrt(ss / static_cast<double>(last - first + 1));
}

struct IndexWindow {
    std::size_t first = 0;
    std::size_t last = 0;
};

/// Rising-phase windows of a force trace: each runs from the upward
/// crossing of `threshold` to the first local maximum that follows. The
/// trace is low-pass filtered first so contact ringing does not split
/// windows.
inline std::vector<IndexWindow> rising_windows(const std::vector<double>& force,
                                               double dt, double threshold,
                                               double cutoff_hz = 20.0) {
    if (force.size() < 5) return {};
    std::vector<double> f = force;
    if (cutoff_hz > 0.0 && cutoff_hz < 0.5 / dt)
        f = signal::filtfilt_lowpass(f, cutoff_hz, 1.0 / dt);
    std::vector<IndexWindow> out;
    std::size_t i = 1;
    const std::size_t n = f.size();
    while (i < n) {
        if (f[i - 1] < threshold && f[i] >= threshold) {
            std::size_t j = i;
            while (j + 1 < n && f[j + 1] >= f[j]) ++j;
            if (j > i && j + 1 < n) out.push_back({i, j});
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

/// Mean RMSJ over all rising-phase windows of a force trace; the standard
/// smoothness figure for a full multi-step run. Windows shorter than 5
/// samples are skipped.
inline double mean_rising_rmsj(const std::vector<double>& force, double dt,
                               double threshold, double cutoff_hz = 20.0) {
    const auto windows = rising_windows(force, dt, threshold, cutoff_hz);
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& win : windows) {
        if (win.last - win.first + 1 < 5) continue;
        SignalWindow w;
        w.values = force;
        w.dt = dt;
        w.t1 = static_cast<double>(win.first) * dt;
        w.t2 = static_cast<double>(win.last) * dt;
        acc += rmsj(w, cutoff_hz);
        ++n;
    }
    if (n == 0) throw InvalidStateError("mean_rising_rmsj: no rising windows found");
    return acc / static_cast<double>(n);
}

struct MetricsRow {
    std::string run_id;
    std::string mode;
    double rmsj = 0.0;
    double peak_force_N = 0.0;
    double rms_err_rad = 0.0;
};

inline void save_metrics_csv(const std::vector<MetricsRow>& rows,
                             const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("save_metrics_csv: cannot open " + path);
    out << "run_id,mode,rmsj,peak_force_N,rms_err_rad\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g\n", r.run_id.c_str(),
                      r.mode.c_str(), r.rmsj, r.peak_force_N, r.rms_err_rad);
        out << buf;
    }
}

} // namespace srl::metrics
