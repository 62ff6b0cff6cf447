// Gait reference pipeline: least-squares calibration of the linear map
// from human-leg joint states to robot-leg references, periodic cubic
// spline interpolation of recorded cycles, and CSV ingestion.
//
// Joint state vectors stack angles over velocities: x = [hip, knee, dhip,
// dknee]. The mapping x_s = C x_h is fit by ordinary least squares.
#pragma once

#include "srl/core.hpp"
#include "srl/signal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace srl::gait {

struct CalibrationResult {
    Mat4 C;
    double rms_residual = 0.0; ///< per-sample RMS of x_s - C x_h
};

/// Fit C minimizing sum ||x_s - C x_h||^2 via normal equations. Near-
/// singular data gets a small ridge; genuinely rank-deficient data is
/// rejected with the index of the unexcited state dimension.
inline CalibrationResult calibrate_clme(const std::vector<Vec4>& human,
                                        const std::vector<Vec4>& srl) {
    if (human.size() != srl.size())
        throw InvalidStateError("calibrate_clme: sample counts differ");
    if (human.size() < 4)
        throw InvalidStateError("calibrate_clme: need at least 4 paired samples");
    for (const auto& v : human)
        if (!all_finite(v)) throw InvalidStateError("calibrate_clme: non-finite human sample");
    for (const auto& v : srl)
        if (!all_finite(v)) throw InvalidStateError("calibrate_clme: non-finite srl sample");

    Mat4 HHt = Mat4::Zero(); // sum x_h x_h^T
    Mat4 SHt = Mat4::Zero(); // sum x_s x_h^T
    for (std::size_t i = 0; i < human.size(); ++i) {
        HHt += human[i] * human[i].transpose();
        SHt += srl[i] * human[i].transpose();
    }

    const Eigen::SelfAdjointEigenSolver<Mat4> es(HHt);
    const Vec4 ev = es.eigenvalues();
    const double max_ev = ev.maxCoeff();
    if (!(max_ev > 0.0) || ev.minCoeff() <= 1e-12 * max_ev) {
        int idx;
        es.eigenvectors().col(0).cwiseAbs().maxCoeff(&idx);
        throw CalibrationSingularError(
            "calibrate_clme: human data does not excite state dimension " +
                std::to_string(idx),
            idx);
    }

    Mat4 A = HHt;
    if (ev.minCoeff() < 1e-8 * max_ev)
        A += 1e-8 * max_ev * Mat4::Identity(); // ridge fallback
    const Mat4 C = SHt * A.inverse();

    double ss = 0.0;
    for (std::size_t i = 0; i < human.size(); ++i)
        ss += (srl[i] - C * human[i]).squaredNorm();
    return {C, std::sqrt(ss / static_cast<double>(human.size()))};
}

inline Vec4 map_reference(const Mat4& C, const Vec4& x_h) { return C * x_h; }

namespace detail {

/// Solve the cyclic tridiagonal system with constant bands (1, 4, 1) and
/// unit corner entries, the moment system of a uniform periodic spline.
/// Sherman-Morrison on top of the Thomas algorithm.
inline std::vector<double> solve_periodic_moment_system(const std::vector<double>& r) {
    const std::size_t n = r.size();
    const double diag = 4.0, off = 1.0;
    std::vector<double> b(n, diag);
    const double gamma = -diag;
    b[0] = diag - gamma;
    b[n - 1] = diag - off * off / gamma;

    auto thomas = [&](const std::vector<double>& rhs) {
        std::vector<double> c(n, 0.0), x(n, 0.0);
        double beta = b[0];
        x[0] = rhs[0] / beta;
        for (std::size_t i = 1; i < n; ++i) {
            c[i] = off / beta;
            beta = b[i] - off * c[i];
            x[i] = (rhs[i] - off * x[i - 1]) / beta;
        }
        for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i + 1] * x[i + 1];
        return x;
    };

    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = off;
    const std::vector<double> x = thomas(r);
    const std::vector<double> z = thomas(u);
    const double fact = (x[0] + off * x[n - 1] / gamma) /
                        (1.0 + z[0] + off * z[n - 1] / gamma);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - fact * z[i];
    return out;
}

} // namespace detail

/// Uniformly sampled periodic cubic spline (C2 across the wrap).
class PeriodicSpline {
  public:
    PeriodicSpline() = default;

    PeriodicSpline(std::vector<double> values, double dt) : y_(std::move(values)), h_(dt) {
        if (y_.size() < 3)
            throw InvalidStateError("PeriodicSpline: need at least 3 knots");
        if (!(dt > 0.0))
            throw InvalidStateError("PeriodicSpline: dt must be positive");
        const std::size_t n = y_.size();
        period_ = h_ * static_cast<double>(n);
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double ym = y_[(i + n - 1) % n], yp = y_[(i + 1) % n];
            rhs[i] = 6.0 * (ym - 2.0 * y_[i] + yp) / (h_ * h_);
        }
        m_ = detail::solve_periodic_moment_system(rhs);
    }

    double period() const { return period_; }
    const std::vector<double>& knot_curvatures() const { return m_; }

    void eval(double t, double* v, double* dv = nullptr, double* ddv = nullptr) const {
        const std::size_t n = y_.size();
        double tau = std::fmod(t, period_);
        if (tau < 0.0) tau += period_;
        std::size_t i = static_cast<std::size_t>(tau / h_);
        if (i >= n) i = n - 1;
        const double a = tau - h_ * static_cast<double>(i); // in [0, h]
        const double b = h_ - a;
        const std::size_t j = (i + 1) % n;
        const double yi = y_[i], yj = y_[j], mi = m_[i], mj = m_[j];
        if (v)
            *v = mi * b * b * b / (6.0 * h_) + mj * a * a * a / (6.0 * h_) +
                 (yi - mi * h_ * h_ / 6.0) * b / h_ + (yj - mj * h_ * h_ / 6.0) * a / h_;
        if (dv)
            *dv = -mi * b * b / (2.0 * h_) + mj * a * a / (2.0 * h_) +
                  (yj - yi) / h_ - (mj - mi) * h_ / 6.0;
        if (ddv) *ddv = (mi * b + mj * a) / h_;
    }

  private:
    std::vector<double> y_;
    std::vector<double> m_; // second derivatives at knots
    double h_ = 0.0;
    double period_ = 0.0;
};

/// One recorded gait cycle, uniformly sampled. Channels per sample:
/// [hip, knee, dhip, dknee].
struct GaitTrajectory {
    std::vector<double> timestamps;
    std::vector<Vec4> samples;
    double dt = 0.0;
    double cycle_period = 0.0; ///< timestamps span one full cycle; wraps after last sample
};

inline void save_gait_csv(const GaitTrajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("save_gait_csv: cannot open " + path);
    out << "t,hip_h,knee_h,dhip_h,dknee_h\n";
    char buf[512];
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const Vec4& s = traj.samples[i];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      traj.timestamps[i], s(0), s(1), s(2), s(3));
        out << buf;
    }
}

/// Parse the gait CSV schema `t,hip_h,knee_h,dhip_h,dknee_h`. Non-uniform
/// timestamps are linearly resampled at resample_hz; uniform input is kept
/// sample-exact.
inline GaitTrajectory load_gait_csv(const std::string& path, double resample_hz = 100.0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvFormatError("load_gait_csv: cannot open " + path, 0);

    std::string line;
    if (!std::getline(in, line)) throw CsvFormatError("load_gait_csv: empty file", 0);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,hip_h,knee_h,dhip_h,dknee_h")
        throw CsvFormatError("load_gait_csv: bad header '" + line + "'", 1);

    GaitTrajectory traj;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 5> f{};
        std::size_t pos = 0;
        for (int col = 0; col < 5; ++col) {
            const std::size_t next = line.find(',', pos);
            const std::string cell = line.substr(
                pos, next == std::string::npos ? std::string::npos : next - pos);
            try {
                std::size_t used = 0;
                f[static_cast<std::size_t>(col)] = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument("trailing junk");
            } catch (const std::exception&) {
                throw CsvFormatError("load_gait_csv: bad value '" + cell + "'", line_no);
            }
            if (col < 4) {
                if (next == std::string::npos)
                    throw CsvFormatError("load_gait_csv: expected 5 columns", line_no);
                pos = next + 1;
            } else if (next != std::string::npos) {
                throw CsvFormatError("load_gait_csv: too many columns", line_no);
            }
        }
        for (double v : f)
            if (!std::isfinite(v))
                throw CsvFormatError("load_gait_csv: non-finite field", line_no);
        if (!traj.timestamps.empty() && f[0] <= traj.timestamps.back())
            throw CsvFormatError("load_gait_csv: non-monotone timestamp", line_no);
        traj.timestamps.push_back(f[0]);
        traj.samples.push_back(Vec4(f[1], f[2], f[3], f[4]));
    }
    if (traj.samples.size() < 2)
        throw CsvFormatError("load_gait_csv: need at least 2 rows", line_no);

    const std::size_t n = traj.timestamps.size();
    const double first_step = traj.timestamps[1] - traj.timestamps[0];
    bool uniform = true;
    for (std::size_t i = 1; i + 1 < n && uniform; ++i)
        uniform = std::abs((traj.timestamps[i + 1] - traj.timestamps[i]) - first_step) <= 1e-9;

    if (!uniform) {
        if (!(resample_hz > 0.0))
            throw ConfigError("load_gait_csv: non-uniform data needs resample_hz > 0");
        const double t0 = traj.timestamps.front(), t1 = traj.timestamps.back();
        const double dt = 1.0 / resample_hz;
        GaitTrajectory r;
        std::size_t src = 0;
        for (double t = t0; t <= t1 + 1e-12; t += dt) {
            while (src + 2 < n && traj.timestamps[src + 1] < t) ++src;
            const double ta = traj.timestamps[src], tb = traj.timestamps[src + 1];
            const double w = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
            r.timestamps.push_back(t);
            r.samples.push_back((1.0 - w) * traj.samples[src] + w * traj.samples[src + 1]);
        }
        r.dt = dt;
        r.cycle_period = r.dt * static_cast<double>(r.samples.size());
        return r;
    }

    traj.dt = first_step;
    traj.cycle_period = traj.dt * static_cast<double>(n);
    return traj;
}

struct ReferenceTriple {
    Vec2 q = Vec2::Zero();
    Vec2 dq = Vec2::Zero();
    Vec2 ddq = Vec2::Zero();
};

/// Generates the robot-leg reference triple (q_d, dq_d, ddq_d) from a human
/// gait cycle: the human state is evaluated with a configurable phase delay
/// (default half a cycle, the contralateral leg), pushed through the mapping
/// C, and differentiated analytically. The acceleration channel is low-pass
/// filtered at accel_cutoff_hz to keep the feedforward term quiet.
class GaitReference {
  public:
    GaitReference() = default;

    GaitReference(const GaitTrajectory& traj, const Mat4& C = Mat4::Identity(),
                  double phase_offset_cycles = 0.5, double accel_cutoff_hz = 10.0) {
        if (traj.samples.size() < 4)
            throw InvalidStateError("GaitReference: need at least 4 samples");
        period_ = traj.cycle_period;
        offset_ = phase_offset_cycles * period_;
        C_pos_ = C.topLeftCorner<2, 2>();
        C_posvel_ = C.topRightCorner<2, 2>();
        C_velpos_ = C.bottomLeftCorner<2, 2>();
        C_vel_ = C.bottomRightCorner<2, 2>();

        const std::size_t n = traj.samples.size();
        for (int ch = 0; ch < 2; ++ch) {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = traj.samples[i](ch);
            spline_[static_cast<std::size_t>(ch)] = PeriodicSpline(v, traj.dt);

            const double fs = 1.0 / traj.dt;
            std::vector<double> curv =
                spline_[static_cast<std::size_t>(ch)].knot_curvatures();
            if (accel_cutoff_hz > 0.0 && accel_cutoff_hz < 0.5 * fs)
                curv = signal::filtfilt_lowpass_periodic(curv, accel_cutoff_hz, fs);
            accel_[static_cast<std::size_t>(ch)] = PeriodicSpline(curv, traj.dt);
        }
    }

    double cycle_period() const { return period_; }

    ReferenceTriple at(double t) const {
        const double th = t - offset_;
        Vec2 pos, vel, acc;
        for (int ch = 0; ch < 2; ++ch) {
            double v, dv;
            spline_[static_cast<std::size_t>(ch)].eval(th, &v, &dv, nullptr);
            double a;
            accel_[static_cast<std::size_t>(ch)].eval(th, &a);
            pos(ch) = v;
            vel(ch) = dv;
            acc(ch) = a;
        }
        ReferenceTriple r;
        r.q = C_pos_ * pos + C_posvel_ * vel;
        r.dq = C_velpos_ * pos + C_vel_ * vel;
        // d/dt of the mapped state, using d(pos)/dt = vel, d(vel)/dt = acc.
        r.ddq = C_velpos_ * vel + C_vel_ * acc;
        return r;
    }

  private:
    std::array<PeriodicSpline, 2> spline_;
    std::array<PeriodicSpline, 2> accel_;
    Mat2 C_pos_ = Mat2::Identity(), C_posvel_ = Mat2::Zero();
    Mat2 C_velpos_ = Mat2::Zero(), C_vel_ = Mat2::Identity();
    double period_ = 0.0;
    double offset_ = 0.0;
};

} // namespace srl::gait
