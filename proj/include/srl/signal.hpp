// Small signal toolbox: Butterworth low-pass with zero-phase application
// (forward-backward), high-order difference stencils and trapezoid
// quadrature. Everything operates on uniformly sampled sequences.
#pragma once

#include "srl/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace srl::signal {

/// Second-order Butterworth low-pass section, bilinear transform.
struct Biquad {
    double b0, b1, b2, a1, a2;

    static Biquad butterworth_lowpass(double cutoff_hz, double sample_hz) {
        if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_hz))
            throw ConfigError("Biquad: cutoff must lie in (0, sample_rate/2)");
        const double k = std::tan(M_PI * cutoff_hz / sample_hz);
        const double q = 1.0 / std::sqrt(2.0);
        const double norm = 1.0 / (1.0 + k / q + k * k);
        Biquad f;
        f.b0 = k * k * norm;
        f.b1 = 2.0 * f.b0;
        f.b2 = f.b0;
        f.a1 = 2.0 * (k * k - 1.0) * norm;
        f.a2 = (1.0 - k / q + k * k) * norm;
        return f;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(x.size());
        double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
        if (!x.empty()) { // start from steady state at x[0] to avoid a step transient
            x1 = x2 = x[0];
            y1 = y2 = x[0];
        }
        for (std::size_t n = 0; n < x.size(); ++n) {
            const double yn = b0 * x[n] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = x[n];
            y2 = y1;
            y1 = yn;
            y[n] = yn;
        }
        return y;
    }
};

/// Zero-phase low-pass: filter forward, reverse, filter again, reverse.
/// Ends are extended by odd reflection so the filter state is warmed up
/// before the real samples begin.
inline std::vector<double> filtfilt_lowpass(const std::vector<double>& x,
                                            double cutoff_hz, double sample_hz) {
    if (x.size() < 2) return x;
    const Biquad f = Biquad::butterworth_lowpass(cutoff_hz, sample_hz);
    const std::size_t pad =
        std::min(x.size() - 1, static_cast<std::size_t>(2.0 * sample_hz / cutoff_hz) + 6);

    std::vector<double> ext;
    ext.reserve(x.size() + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i)
        ext.push_back(2.0 * x.back() - x[x.size() - 1 - i]);

    std::vector<double> y = f.apply(ext);
    std::reverse(y.begin(), y.end());
    y = f.apply(y);
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<std::ptrdiff_t>(pad),
            y.begin() + static_cast<std::ptrdiff_t>(pad + x.size())};
}

/// Zero-phase low-pass for periodic sequences: the signal is extended by
/// wrapping so the result stays periodic and smooth across the seam.
inline std::vector<double> filtfilt_lowpass_periodic(const std::vector<double>& x,
                                                     double cutoff_hz,
                                                     double sample_hz) {
    if (x.size() < 3) return x;
    const Biquad f = Biquad::butterworth_lowpass(cutoff_hz, sample_hz);
    const std::size_t n = x.size();
    const std::size_t pad =
        std::min(n, static_cast<std::size_t>(4.0 * sample_hz / cutoff_hz) + 8);

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(x[(n - pad + i) % n]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(x[i % n]);

    std::vector<double> y = f.apply(ext);
    std::reverse(y.begin(), y.end());
    y = f.apply(y);
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<std::ptrdiff_t>(pad),
            y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

/// Second derivative of a uniformly sampled sequence. Interior points use
/// the 4th-order stencil [-1/12, 4/3, -5/2, 4/3, -1/12]; the endpoints use
/// 2nd-order stencils (one-sided at the very ends), all exact for cubics.
inline std::vector<double> second_derivative(const std::vector<double>& x, double dt) {
    if (x.size() < 5)
        throw InvalidStateError("second_derivative: need at least 5 samples");
    const double inv = 1.0 / (dt * dt);
    const std::size_t n = x.size();
    std::vector<double> d(n);
    auto three_point = [&](std::size_t i) {
        return (x[i - 1] - 2.0 * x[i] + x[i + 1]) * inv;
    };
    d[0] = (2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) * inv;
    d[1] = three_point(1);
    d[n - 2] = three_point(n - 2);
    d[n - 1] = (2.0 * x[n - 1] - 5.0 * x[n - 2] + 4.0 * x[n - 3] - x[n - 4]) * inv;
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (-x[i - 2] + 16.0 * x[i - 1] - 30.0 * x[i] + 16.0 * x[i + 1] -
                x[i + 2]) * inv / 12.0;
    return d;
}

inline double trapezoid(const std::vector<double>& y, double dt) {
    if (y.size() < 2) return 0.0;
    double acc = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) acc += y[i];
    return acc * dt;
}

} // namespace srl::signal
