#include "magpack/fields.hpp"

#include <algorithm>
#include <cmath>

#include "magpack/quadrature.hpp"

namespace magpack {

namespace {

constexpr double kFdStep = 1e-5;

// E_jk at p for all pairs, skew filled. Throws on non-finite values.
void extra_matrix(const MagneticField& f, const MagneticField::CompFn& fn, double t, const Point& p,
                  double* e) {
    const int d = f.dim;
    for (int j = 0; j < d; ++j) {
        e[j * d + j] = 0.0;
        for (int k = j + 1; k < d; ++k) {
            const double v = fn(j, k, t, p.data());
            if (!std::isfinite(v)) throw QuadratureError("non-finite field sample", p);
            e[j * d + k] = v;
            e[k * d + j] = -v;
        }
    }
}

// -sum_k int_0^1 s (y_k - x_k) E_jk(x + s(y-x)) ds, for E given by fn.
Point extra_transversal(const MagneticField& f, const MagneticField::CompFn& fn, int order, double t,
                        const Point& y, const Point& x) {
    const int d = f.dim;
    const auto& q = gauss_legendre01(order);
    const Point z = sub(y, x);
    Point a{};
    double e[kMaxDim * kMaxDim];
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double s = q.nodes[i];
        extra_matrix(f, fn, t, add(x, scale(z, s)), e);
        const double w = q.weights[i] * s;
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) acc += e[j * d + k] * z[k];
            a[j] -= w * acc;
        }
    }
    return a;
}

Point extra_potential(const MagneticField& f, bool time_dot, int order, double t, const Point& y,
                      const Point& x) {
    const auto& closed = time_dot ? f.extra_potential_dot : f.extra_potential;
    if (closed) return closed(t, y, x);
    return extra_transversal(f, time_dot ? f.extra_dot : f.extra, order, t, y, x);
}

// (y-x) . int_0^1 A_E((1-s)x + s y, 0) ds with nested rules.
double extra_phase(const MagneticField& f, bool time_dot, int order, double t, const Point& y,
                   const Point& x) {
    const auto& q = gauss_legendre01(order);
    const Point z = sub(y, x);
    const Point origin{};
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const Point p = add(x, scale(z, q.nodes[i]));
        const Point a = extra_potential(f, time_dot, order, t, p, origin);
        acc += q.weights[i] * dot(z, a, f.dim);
    }
    return acc;
}

// int_0^1 s exp(-|s z - c|^2 / (2 w^2)) ds
double gauss_ray_moment(const Point& z, const Point& c, double w) {
    const double P = z[0] * z[0] + z[1] * z[1];
    const double Q = z[0] * c[0] + z[1] * c[1];
    const double C = c[0] * c[0] + c[1] * c[1];
    const double k = std::sqrt(P / (2.0 * w * w));
    if (k < 1e-3) {
        const auto& q = gauss_legendre01(16);
        double acc = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const double s = q.nodes[i];
            acc += q.weights[i] * s * std::exp(-(s * s * P - 2.0 * s * Q + C) / (2.0 * w * w));
        }
        return acc;
    }
    const double s0 = Q / P;
    const double base = std::exp(-std::max(0.0, C - Q * Q / P) / (2.0 * w * w));
    // erf(k(1 - s0)) + erf(k s0) without cancellation
    double d;
    if (s0 > 1.0) d = std::erfc(k * (s0 - 1.0)) - std::erfc(k * s0);
    else if (s0 < 0.0) d = std::erfc(-k * s0) - std::erfc(k * (1.0 - s0));
    else d = std::erf(k * (1.0 - s0)) + std::erf(k * s0);
    const double e0 = std::exp(-(C) / (2.0 * w * w));
    const double e1 = std::exp(-(P - 2.0 * Q + C) / (2.0 * w * w));
    return (e0 - e1) / (2.0 * k * k) + base * s0 * std::sqrt(kPi) / (2.0 * k) * d;
}

// Transversal potential of amp * bump in B_12, based at x.
MagneticField::PotFn bump_potential(double amp, double w, const Point& c, std::function<double(double)> s) {
    return [amp, w, c, s](double t, const Point& y, const Point& x) {
        const Point z = sub(y, x);
        const double m = amp * s(t) * gauss_ray_moment(z, sub(c, x), w);
        return Point{-m * z[1], m * z[0], 0.0};
    };
}

double bump_value(double amp, double w, const Point& c, const double* y) {
    const double dx = y[0] - c[0], dy = y[1] - c[1];
    return amp * std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
}

// sup |q| |grad beta(q)| for a Gaussian bump, upper bound.
double bump_moment_bound(double amp, double w, const Point& c) {
    const double cn = std::hypot(c[0], c[1]);
    return std::abs(amp) * (cn / (w * std::sqrt(std::exp(1.0))) + 2.0 / std::exp(1.0));
}

}  // namespace

double MagneticField::component(int j, int k, double t, const double* y) const {
    double v = uniform_at(j, k, t);
    if (extra) v += extra(j, k, t, y);
    return v;
}

void MagneticField::component_grad(int j, int k, double t, const double* y, double* grad) const {
    for (int i = 0; i < dim; ++i) grad[i] = 0.0;
    if (!extra) return;
    if (extra_grad) {
        extra_grad(j, k, t, y, grad);
        return;
    }
    Point p{};
    for (int i = 0; i < dim; ++i) p[i] = y[i];
    for (int i = 0; i < dim; ++i) {
        Point a = p, b = p;
        a[i] += kFdStep;
        b[i] -= kFdStep;
        grad[i] = (extra(j, k, t, a.data()) - extra(j, k, t, b.data())) / (2.0 * kFdStep);
    }
}

double MagneticField::time_derivative(int j, int k, double t, const double* y) const {
    double v = scale_dot(t) * uniform[j * dim + k];
    if (extra_dot) v += extra_dot(j, k, t, y);
    return v;
}

FieldPtr zero_field(int dim) {
    auto f = std::make_shared<MagneticField>();
    f->dim = dim;
    f->name = "zero";
    return f;
}

FieldPtr constant_field(double b, int dim) {
    auto f = std::make_shared<MagneticField>();
    f->dim = dim;
    f->name = "constant-b";
    f->uniform[0 * dim + 1] = b;
    f->uniform[1 * dim + 0] = -b;
    f->bound_CB = std::abs(b);
    return f;
}

FieldPtr constant_field_as_closure(double b) {
    auto f = std::make_shared<MagneticField>();
    f->dim = 2;
    f->name = "constant-closure";
    f->extra = [b](int j, int k, double, const double*) {
        if (j == 0 && k == 1) return b;
        if (j == 1 && k == 0) return -b;
        return 0.0;
    };
    f->extra_grad = [](int, int, double, const double*, double* g) { g[0] = g[1] = 0.0; };
    f->bound_CB = std::abs(b);
    return f;
}

FieldPtr bump_field(double b, double amp, double width, const Point& center) {
    auto f = std::make_shared<MagneticField>();
    f->dim = 2;
    f->name = "bump";
    f->uniform[1] = b;
    f->uniform[2] = -b;
    f->extra = [amp, width, center](int j, int k, double, const double* y) {
        if (j == k) return 0.0;
        const double v = bump_value(amp, width, center, y);
        return (j == 0 && k == 1) ? v : -v;
    };
    f->extra_grad = [amp, width, center](int j, int k, double, const double* y, double* g) {
        const double v = bump_value(amp, width, center, y);
        const double sgn = (j == k) ? 0.0 : ((j == 0 && k == 1) ? 1.0 : -1.0);
        g[0] = -sgn * v * (y[0] - center[0]) / (width * width);
        g[1] = -sgn * v * (y[1] - center[1]) / (width * width);
    };
    f->extra_potential = bump_potential(amp, width, center, [](double) { return 1.0; });
    f->bound_CB = std::abs(b) + std::abs(amp);
    f->decay_eps = 1.0;
    return f;
}

FieldPtr timemod_field(double b, double rate) {
    auto f = std::make_shared<MagneticField>();
    f->dim = 2;
    f->name = "timedep";
    f->uniform[1] = b;
    f->uniform[2] = -b;
    f->modulation = [rate](double t) { return 1.0 + rate * t; };
    f->modulation_dot = [rate](double) { return rate; };
    // sup over t in [0,1] of |B|, |dB/dt|
    f->bound_CB = std::max(std::abs(b) * std::max(1.0, std::abs(1.0 + rate)), std::abs(b * rate));
    return f;
}

FieldPtr timemod_bump_field(double b, double rate, double amp, double width, const Point& center,
                            double bump_rate) {
    auto f = std::make_shared<MagneticField>();
    f->dim = 2;
    f->name = "timedep-bump";
    f->uniform[1] = b;
    f->uniform[2] = -b;
    f->modulation = [rate](double t) { return 1.0 + rate * t; };
    f->modulation_dot = [rate](double) { return rate; };
    f->extra = [amp, width, center, bump_rate](int j, int k, double t, const double* y) {
        if (j == k) return 0.0;
        const double v = (1.0 + bump_rate * t) * bump_value(amp, width, center, y);
        return (j == 0 && k == 1) ? v : -v;
    };
    f->extra_grad = [amp, width, center, bump_rate](int j, int k, double t, const double* y,
                                                    double* g) {
        const double v = (1.0 + bump_rate * t) * bump_value(amp, width, center, y);
        const double sgn = (j == k) ? 0.0 : ((j == 0 && k == 1) ? 1.0 : -1.0);
        g[0] = -sgn * v * (y[0] - center[0]) / (width * width);
        g[1] = -sgn * v * (y[1] - center[1]) / (width * width);
    };
    f->extra_dot = [amp, width, center, bump_rate](int j, int k, double, const double* y) {
        if (j == k) return 0.0;
        const double v = bump_rate * bump_value(amp, width, center, y);
        return (j == 0 && k == 1) ? v : -v;
    };
    f->extra_potential = bump_potential(amp, width, center, [bump_rate](double t) { return 1.0 + bump_rate * t; });
    f->extra_potential_dot = bump_potential(amp, width, center, [bump_rate](double) { return bump_rate; });
    const double bsup = std::abs(b) * std::max(1.0, std::abs(1.0 + rate)) +
                        std::abs(amp) * std::max(1.0, std::abs(1.0 + bump_rate));
    const double bdot = std::abs(b * rate) + std::abs(amp * bump_rate);
    // Entry bound for grad of dA/dt, doubled for the 2x2 operator norm.
    const double grad_adot = 2.0 * (0.5 * bdot + 0.5 * bump_moment_bound(amp * bump_rate, width, center));
    f->bound_CB = std::max({bsup, bdot, grad_adot});
    return f;
}

GaugeData make_gauge(FieldPtr field, int quad_order, int quad_order_2d) {
    GaugeData g;
    g.field = std::move(field);
    g.quad_order = quad_order;
    g.quad_order_2d = quad_order_2d;
    g.validate();
    return g;
}

GaugeData with_shift(GaugeData g, GaugeShift s) {
    g.shift = std::move(s);
    return g;
}

void GaugeData::validate() const {
    if (!field) throw ConfigError("gauge: missing field");
    if (field->dim < 2 || field->dim > kMaxDim) throw ConfigError("gauge: dim must be 2 or 3");
    if (quad_order < 8) throw ConfigError("gauge: quad_order must be >= 8");
    if (quad_order_2d < 8) throw ConfigError("gauge: quad_order_2d must be >= 8");
}

Point potential_at(const GaugeData& g, double t, const Point& y, const Point& x) {
    const auto& f = *g.field;
    const int d = f.dim;
    const Point z = sub(y, x);
    Point a{};
    const double s = f.scale(t);
    for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += f.uniform[j * d + k] * z[k];
        a[j] = -0.5 * s * acc;
    }
    if (f.extra) a = add(a, extra_potential(f, false, g.quad_order, t, y, x));
    return a;
}

Point vector_potential(const GaugeData& g, double t, const Point& y) {
    Point a = potential_at(g, t, y, Point{});
    if (g.shift) {
        double gr[kMaxDim] = {0, 0, 0};
        g.shift->grad(y.data(), gr);
        for (int j = 0; j < g.dim(); ++j) a[j] += gr[j];
    }
    return a;
}

double potential_divergence(const GaugeData& g, double t, const Point& y, const Point& x) {
    const auto& f = *g.field;
    if (!f.extra) return 0.0;
    const int d = f.dim;
    const auto& q = gauss_legendre01(g.quad_order);
    const Point z = sub(y, x);
    double acc = 0.0;
    double grad[kMaxDim];
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double s = q.nodes[i];
        const Point p = add(x, scale(z, s));
        double inner = 0.0;
        for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
                if (j == k) continue;
                // only the closure part varies in space
                if (f.extra_grad) {
                    f.extra_grad(j, k, t, p.data(), grad);
                } else {
                    f.component_grad(j, k, t, p.data(), grad);
                }
                inner += z[k] * grad[j];
            }
        }
        acc += q.weights[i] * s * s * inner;
    }
    return -acc;
}

double phase_phi(const GaugeData& g, double t, const Point& y, const Point& x) {
    const auto& f = *g.field;
    const int d = f.dim;
    const Point z = sub(y, x);
    double phi = 0.0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) phi += z[j] * f.uniform[j * d + k] * x[k];
    phi *= -0.5 * f.scale(t);
    if (f.extra) phi += extra_phase(f, false, g.quad_order, t, y, x);
    if (g.shift) {
        const auto& q = gauss_legendre01(g.quad_order);
        double gr[kMaxDim];
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const Point p = add(x, scale(z, q.nodes[i]));
            gr[0] = gr[1] = gr[2] = 0.0;
            g.shift->grad(p.data(), gr);
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += z[j] * gr[j];
            phi += q.weights[i] * s;
        }
    }
    return phi;
}

double phase_phi_dot(const GaugeData& g, double t, const Point& y, const Point& x) {
    const auto& f = *g.field;
    const int d = f.dim;
    const Point z = sub(y, x);
    double phi = 0.0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) phi += z[j] * f.uniform[j * d + k] * x[k];
    phi *= -0.5 * f.scale_dot(t);
    if (f.extra_dot) phi += extra_phase(f, true, g.quad_order, t, y, x);
    return phi;
}

double flux_gamma(const GaugeData& g, double t, const Point& y, const Point& x, const Point& z) {
    const auto& f = *g.field;
    const int d = f.dim;
    double c[kMaxDim * kMaxDim];
    const double s0 = 0.5 * f.scale(t);
    for (int i = 0; i < d * d; ++i) c[i] = s0 * f.uniform[i];
    if (f.extra) {
        const auto& q = gauss_legendre01(g.quad_order_2d);
        double e[kMaxDim * kMaxDim];
        for (std::size_t a = 0; a < q.nodes.size(); ++a) {
            const double s = q.nodes[a];
            for (std::size_t b = 0; b < q.nodes.size(); ++b) {
                const double tt = s * q.nodes[b];
                Point p{};
                for (int i = 0; i < d; ++i) p[i] = tt * y[i] + (s - tt) * x[i] + (1.0 - s) * z[i];
                extra_matrix(f, f.extra, t, p, e);
                const double w = q.weights[a] * q.weights[b] * s;
                for (int i = 0; i < d * d; ++i) c[i] += w * e[i];
            }
        }
    }
    const Point u = sub(y, x), v = sub(y, z);
    double gam = 0.0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) gam += c[j * d + k] * u[k] * v[j];
    return gam;
}

Point potential_time_derivative(const GaugeData& g, double t, const Point& y) {
    const auto& f = *g.field;
    const int d = f.dim;
    Point a{};
    const double sd = f.scale_dot(t);
    for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += f.uniform[j * d + k] * y[k];
        a[j] = -0.5 * sd * acc;
    }
    if (f.extra_dot) a = add(a, extra_potential(f, true, g.quad_order, t, y, Point{}));
    return a;
}

Point remainder_A_yx(const GaugeData& g, double t, const Point& y, const Point& x) {
    const auto& f = *g.field;
    Point r{};
    if (!f.extra) return r;
    const int d = f.dim;
    const Point z = sub(y, x);
    r = extra_potential(f, false, g.quad_order, t, y, x);
    double e[kMaxDim * kMaxDim];
    extra_matrix(f, f.extra, t, x, e);
    for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) r[j] += 0.5 * e[j * d + l] * z[l];
    return r;
}

Point remainder_A_xy(const GaugeData& g, double t, const Point& y, const Point& x) {
    const auto& f = *g.field;
    Point r{};
    if (!f.extra) return r;
    const int d = f.dim;
    const Point z = sub(y, x);
    r = extra_potential(f, false, g.quad_order, t, x, y);
    double e[kMaxDim * kMaxDim];
    extra_matrix(f, f.extra, t, x, e);
    for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) r[j] -= 0.5 * e[j * d + l] * z[l];
    return r;
}

}  // namespace magpack
