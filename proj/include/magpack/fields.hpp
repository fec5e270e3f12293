#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "magpack/core.hpp"

namespace magpack {

// Skew-symmetric field B_jk(t;y) = s(t) * U_jk + E_jk(t;y).
// The uniform part U is handled in closed form; the remainder E is a
// closure and goes through quadrature.
struct MagneticField {
    using CompFn = std::function<double(int j, int k, double t, const double* y)>;
    using GradFn = std::function<void(int j, int k, double t, const double* y, double* grad)>;

    int dim = 2;
    std::string name = "zero";
    std::array<double, kMaxDim * kMaxDim> uniform{};
    std::function<double(double)> modulation;      // s(t), empty means 1
    std::function<double(double)> modulation_dot;  // s'(t), empty means 0
    CompFn extra;                                  // optional E_jk(t;y)
    GradFn extra_grad;                             // optional, central differences otherwise
    CompFn extra_dot;                              // optional dE/dt, empty means static
    // Optional closed forms of the transversal potential of E (and dE/dt) based at x,
    // -int_0^1 s E(x + s(y-x)) (y-x) ds. Quadrature is used when empty.
    using PotFn = std::function<Point(double t, const Point& y, const Point& x)>;
    PotFn extra_potential, extra_potential_dot;
    double bound_CB = 0.0;
    double decay_eps = 1.0;

    double scale(double t) const { return modulation ? modulation(t) : 1.0; }
    double scale_dot(double t) const { return modulation_dot ? modulation_dot(t) : 0.0; }
    bool is_uniform() const { return !extra; }
    bool is_static() const { return !modulation_dot && !extra_dot; }
    double uniform_at(int j, int k, double t) const { return scale(t) * uniform[j * dim + k]; }

    double component(int j, int k, double t, const double* y) const;
    void component_grad(int j, int k, double t, const double* y, double* grad) const;
    double time_derivative(int j, int k, double t, const double* y) const;
};

using FieldPtr = std::shared_ptr<const MagneticField>;

// Shipped field library.
FieldPtr zero_field(int dim = 2);
FieldPtr constant_field(double b, int dim = 2);
// Constant b plus a Gaussian bump amp*exp(-|y-c|^2/(2w^2)) in B_12.
FieldPtr bump_field(double b, double amp, double width, const Point& center);
// B_12(t) = b(1 + rate t).
FieldPtr timemod_field(double b, double rate);
// B_12(t;y) = b(1 + rate t) + amp(1 + bump_rate t) exp(-|y-c|^2/(2w^2)).
FieldPtr timemod_bump_field(double b, double rate, double amp, double width, const Point& center,
                            double bump_rate);
// Constant field routed entirely through the closure path (quadrature oracle tests).
FieldPtr constant_field_as_closure(double b);

// Gauge shift A' = A + grad v.
struct GaugeShift {
    std::function<double(const double*)> v;
    std::function<void(const double*, double*)> grad;
};

struct GaugeData {
    FieldPtr field;
    int quad_order = 16;
    int quad_order_2d = 16;
    std::optional<GaugeShift> shift;

    int dim() const { return field->dim; }
    void validate() const;
    // Uniform field with no shift: wavepacket phases are linear in y.
    bool separable() const { return field->is_uniform() && !shift; }
};

GaugeData make_gauge(FieldPtr field, int quad_order = 16, int quad_order_2d = 16);
GaugeData with_shift(GaugeData g, GaugeShift s);

// A(t;y,x), the x-based transversal gauge.
Point potential_at(const GaugeData& g, double t, const Point& y, const Point& x);
// Vector potential of the gauge: A(t;y,0) plus grad v when shifted.
Point vector_potential(const GaugeData& g, double t, const Point& y);
// div_y A(t;y,x)
double potential_divergence(const GaugeData& g, double t, const Point& y, const Point& x);
// phi^A(t;y,x), including the shift contribution v(y) - v(x) as a line integral.
double phase_phi(const GaugeData& g, double t, const Point& y, const Point& x);
// Gamma^B(t;y,x,z) = <C(y,x,z)(y-x),(y-z)>
double flux_gamma(const GaugeData& g, double t, const Point& y, const Point& x, const Point& z);
// d/dt A(t;y,0)
Point potential_time_derivative(const GaugeData& g, double t, const Point& y);
// d/dt phi^{A(t)}(y,x)
double phase_phi_dot(const GaugeData& g, double t, const Point& y, const Point& x);

// Remainders of the first order Taylor expansion at x in the variable y:
// r_x(A_j(y,x)) = A_j(y,x) + 1/2 sum_l B_jl(x)(y_l-x_l)
// r_x(A_j(x,y)) = A_j(x,y) - 1/2 sum_l B_jl(x)(y_l-x_l)
Point remainder_A_yx(const GaugeData& g, double t, const Point& y, const Point& x);
Point remainder_A_xy(const GaugeData& g, double t, const Point& y, const Point& x);

}  // namespace magpack
