// Shared fixed-size linear algebra aliases and error types used across the
// SRL simulator library.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace srl {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat25 = Eigen::Matrix<double, 2, 5>;

/// Non-finite values fed into a dynamics or control evaluation.
class InvalidStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Physically inconsistent model parameters (e.g. singular inertia).
class ModelConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Impedance/PID parameters violating their invariants.
class ControllerConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CLME calibration data does not span the state space.
class CalibrationSingularError : public std::runtime_error {
public:
    CalibrationSingularError(const std::string& msg, int dimension)
        : std::runtime_error(msg), deficient_dimension(dimension) {}
    int deficient_dimension;
};

/// Malformed input file; `line` is 1-based.
class CsvFormatError : public std::runtime_error {
public:
    CsvFormatError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg), line_no(line) {}
    std::size_t line_no;
};

/// Bad or missing configuration (maps to CLI exit code 3).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Simulation produced a non-finite state; carries the last valid time.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& msg, double t)
        : std::runtime_error(msg), last_valid_time(t) {}
    double last_valid_time;
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

inline bool all_finite(double x) { return std::isfinite(x); }

} // namespace srl
