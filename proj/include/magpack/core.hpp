#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace magpack {

using cplx = std::complex<double>;

constexpr int kMaxDim = 3;
using Point = std::array<double, kMaxDim>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

inline const char* version_string() { return "magpack 0.3.1"; }

// Error hierarchy. ConfigError maps to exit code 2 in the CLI, everything
// else surfaced from a pipeline maps to 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct CapabilityError : Error {
    using Error::Error;
};
struct QuadratureError : Error {
    Point where{};
    QuadratureError(const std::string& msg, const Point& p) : Error(msg), where(p) {}
};
struct BlowUpError : Error {
    using Error::Error;
};
struct DivergenceError : Error {
    using Error::Error;
};
struct SolverError : Error {
    double residual = 0.0;
    SolverError(const std::string& msg, double r) : Error(msg), residual(r) {}
};

inline Point make_point(double a, double b, double c = 0.0) { return Point{a, b, c}; }

inline double dot(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Point& a, int dim) { return std::sqrt(dot(a, a, dim)); }

inline Point sub(const Point& a, const Point& b) {
    return Point{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Point add(const Point& a, const Point& b) {
    return Point{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Point scale(const Point& a, double s) { return Point{a[0] * s, a[1] * s, a[2] * s}; }

// <x> = sqrt(1 + |x|^2)
inline double japanese(const Point& a, int dim) { return std::sqrt(1.0 + dot(a, a, dim)); }

}  // namespace magpack
