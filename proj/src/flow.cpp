#include "magpack/flow.hpp"

#include <cmath>

#include "magpack/parallel.hpp"

namespace magpack {

namespace {

bool finite_point(const Point& p, int d) {
    for (int i = 0; i < d; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

struct Deriv {
    Point dx{}, dxi{};
    double dpsi = 0.0;
};

Deriv full_rhs(const FlowIntegrator& in, double t, const Point& x, const Point& xi) {
    const FlowRhs r = flow_rhs(in.gauge, in.symbol, t, x, xi, in.time_dependent, in.signs);
    return Deriv{r.dx, r.dxi, -multiplier_m(in.gauge, in.symbol, t, x, xi)};
}

FlowState rk4_step(const FlowIntegrator& in, const FlowState& s, double h) {
    const int d = in.gauge.dim();
    auto shift = [&](const FlowState& b, const Deriv& k, double c) {
        FlowState o = b;
        for (int i = 0; i < d; ++i) {
            o.x[i] += c * k.dx[i];
            o.xi[i] += c * k.dxi[i];
        }
        o.psi += c * k.dpsi;
        o.t += c;
        return o;
    };
    const Deriv k1 = full_rhs(in, s.t, s.x, s.xi);
    const FlowState s2 = shift(s, k1, 0.5 * h);
    const Deriv k2 = full_rhs(in, s.t + 0.5 * h, s2.x, s2.xi);
    const FlowState s3 = shift(s, k2, 0.5 * h);
    const Deriv k3 = full_rhs(in, s.t + 0.5 * h, s3.x, s3.xi);
    const FlowState s4 = shift(s, k3, h);
    const Deriv k4 = full_rhs(in, s.t + h, s4.x, s4.xi);
    FlowState o = s;
    for (int i = 0; i < d; ++i) {
        o.x[i] += h / 6.0 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
        o.xi[i] += h / 6.0 * (k1.dxi[i] + 2.0 * k2.dxi[i] + 2.0 * k3.dxi[i] + k4.dxi[i]);
    }
    o.psi += h / 6.0 * (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi);
    o.t = s.t + h;
    return o;
}

}  // namespace

FlowRhs flow_rhs(const GaugeData& gauge, const SymbolH& h, double t, const Point& x, const Point& xi,
                 bool time_dependent, FlowSigns signs) {
    const int d = gauge.dim();
    if (h.dim != d) throw ConfigError("flow: symbol and gauge dimension differ");
    const Point he = h.grad_eta(t, x, xi);
    const Point hy = h.grad_y(t, x, xi);
    const bool paper = signs == FlowSigns::paper;
    FlowRhs r;
    for (int j = 0; j < d; ++j) {
        r.dx[j] = he[j];
        double s = -hy[j];
        for (int k = 0; k < d; ++k)
            s += (paper ? gauge.field->component(k, j, t, x.data()) : gauge.field->component(j, k, t, x.data())) *
                 he[k];
        r.dxi[j] = s;
    }
    if (time_dependent) {
        const Point ad = potential_time_derivative(gauge, t, x);
        for (int j = 0; j < d; ++j) r.dxi[j] += paper ? ad[j] : -ad[j];
    }
    if (!finite_point(r.dx, d) || !finite_point(r.dxi, d)) throw Error("flow: non-finite derivative");
    return r;
}

double multiplier_m(const GaugeData& gauge, const SymbolH& h, double t, const Point& x, const Point& xi) {
    const int d = gauge.dim();
    const Point he = h.grad_eta(t, x, xi);
    const Point a = vector_potential(gauge, t, x);
    double s = h.eval(t, x, xi);
    for (int j = 0; j < d; ++j) s -= he[j] * (xi[j] + a[j]);
    return s;
}

FlowState advance(const FlowIntegrator& integ, const FlowState& state, double t_target, bool backward) {
    if (!(integ.dt > 0.0)) throw ConfigError("flow: dt must be positive");
    const double span = t_target - state.t;
    if (!backward && span < 0.0) throw DomainError("advance: t_target precedes the state time");
    if (backward && span > 0.0) throw DomainError("advance: backward flow needs t_target <= state time");
    const double len = std::abs(span);
    if (len == 0.0) return state;
    const int steps = static_cast<int>(std::ceil(len / integ.dt - 1e-12));
    const double sign = backward ? -1.0 : 1.0;
    const int d = integ.gauge.dim();
    FlowState s = state;
    for (int k = 0; k < steps; ++k) {
        // last step clipped to land on t_target
        const double h = (k + 1 < steps) ? sign * integ.dt : t_target - s.t;
        FlowState n = rk4_step(integ, s, h);
        if (!finite_point(n.x, d) || !finite_point(n.xi, d) || !std::isfinite(n.psi))
            throw FlowBlowUp("flow: non-finite state", s);
        s = n;
    }
    s.t = t_target;
    return s;
}

std::vector<FlowState> advance_path(const FlowIntegrator& integ, const FlowState& state,
                                    const std::vector<double>& times) {
    std::vector<FlowState> out;
    out.reserve(times.size());
    FlowState s = state;
    for (double t : times) {
        s = advance(integ, s, t);
        out.push_back(s);
    }
    return out;
}

double jacobian_determinant(const FlowIntegrator& integ, const Point& x, const Point& xi, double s,
                            double t, double step) {
    if (t == s) return 1.0;
    const int d = integ.gauge.dim();
    const bool back = t < s;
    Eigen::MatrixXd J(2 * d, 2 * d);
    for (int c = 0; c < 2 * d; ++c) {
        FlowState p{x, xi, 0.0, s}, m{x, xi, 0.0, s};
        if (c < d) {
            p.x[c] += step;
            m.x[c] -= step;
        } else {
            p.xi[c - d] += step;
            m.xi[c - d] -= step;
        }
        const FlowState fp = advance(integ, p, t, back);
        const FlowState fm = advance(integ, m, t, back);
        for (int r = 0; r < d; ++r) {
            J(r, c) = (fp.x[r] - fm.x[r]) / (2.0 * step);
            J(d + r, c) = (fp.xi[r] - fm.xi[r]) / (2.0 * step);
        }
    }
    return J.determinant();
}

TimeAverageStats time_average_check(const FlowIntegrator& integ, const std::vector<PhasePoint>& samples,
                                    double t0, double t1, double eps, int workers) {
    if (!(eps > 0.0)) throw DomainError("time_average_check: eps must be positive");
    if (!(t1 >= t0) || t1 - t0 > 20.0) throw DomainError("time_average_check: need 0 <= |I| <= 20");
    const int d = integ.gauge.dim();
    TimeAverageStats st;
    st.ratios.assign(samples.size(), 0.0);
    const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / integ.dt - 1e-12)));
    const double h = (t1 - t0) / steps;
    FlowIntegrator in = integ;
    in.dt = h;
    auto f = [&](const FlowState& s) {
        return std::pow(japanese(s.x, d), -1.0 - eps) * norm(s.xi, d);
    };
    parallel_chunks(kChunks, workers, [&](int chunk) {
        const auto [b, e] = chunk_range(samples.size(), kChunks, chunk);
        for (std::size_t i = b; i < e; ++i) {
            FlowState s{samples[i].x, samples[i].xi, 0.0, t0};
            double acc = 0.5 * f(s);
            for (int k = 0; k < steps; ++k) {
                s = advance(in, s, t0 + (k + 1) * h);
                acc += (k + 1 < steps ? 1.0 : 0.5) * f(s);
            }
            st.ratios[i] = acc * h / (1.0 + (t1 - t0));
        }
    });
    double sum = 0.0;
    for (double r : st.ratios) {
        st.max_ratio = std::max(st.max_ratio, r);
        sum += r;
    }
    st.mean_ratio = samples.empty() ? 0.0 : sum / samples.size();
    return st;
}

double gronwall_constant(const GaugeData& gauge, const SymbolH& h) {
    // |d_eta h| <= C_h (1+|x|+|xi|), |d_y h| likewise, Lorentz term adds C_B |d_eta h|,
    // and dA/dt contributes ~ C_B (1 + |x|).
    const double ch = h.C_h > 0.0 ? h.C_h : 1.0;
    const double cb = gauge.field->bound_CB;
    return ch * (2.0 + cb) + cb;
}

}  // namespace magpack
