#include "magpack/propagate.hpp"

#include <algorithm>
#include <cmath>

#include "magpack/parallel.hpp"
#include "magpack/quadrature.hpp"
#include "magpack/quantize.hpp"

namespace magpack {

namespace {

// g and the terms of R g (R = R1 + R2 + R3) for one node.
struct NodeStamps {
    Stamp g;
    std::vector<Stamp> r;
};

bool axis_separable(const Potential& V) {
    return V.kind == PotentialKind::zero || V.kind == PotentialKind::harmonic ||
           V.kind == PotentialKind::anharmonic;
}

double taylor_remainder_V(const Potential& V, double t, const Point& y, const Point& x, int d) {
    const Point g = V.grad(t, x);
    double r = V.V(t, y) - V.V(t, x);
    for (int j = 0; j < d; ++j) r -= g[j] * (y[j] - x[j]);
    return r;
}

void require_kinetic(const SymbolH& h, const char* where) {
    if (!h.is_kinetic())
        throw CapabilityError(std::string(where) + ": kinetic_potential family only");
}

// Multiplier R(y) at one point, full evaluation.
cplx remainder_multiplier(const GaugeData& gauge, const SymbolH& h, double t, double lambda,
                          const Point& y, const Point& x, const Point& he, bool r3) {
    const int d = gauge.dim();
    const Point z = sub(y, x);
    const Point a = potential_at(gauge, t, y, x);
    const double l2 = lambda * lambda;
    double re = d * l2 - l2 * l2 * dot(z, z, d) + dot(a, a, d);
    const double im = potential_divergence(gauge, t, y, x);
    re *= h.kappa;
    cplx m(re, h.kappa * im);
    m += taylor_remainder_V(h.potential, t, y, x, d);
    if (!gauge.field->is_uniform()) {
        const Point ryx = remainder_A_yx(gauge, t, y, x);
        const Point rxy = remainder_A_xy(gauge, t, y, x);
        double r1 = 0.0;
        for (int j = 0; j < d; ++j) r1 += he[j] * (rxy[j] - ryx[j]);
        m += r1;
    }
    if (r3) m += residual_R3_at(gauge, t, y, x);
    return m;
}

NodeStamps node_stamps(const WavepacketFrame& fr, const SymbolH& h, double t, const Point& x,
                       const Point& xi, bool need_r) {
    NodeStamps ns;
    ns.g = make_stamp(fr, t, x, xi);
    if (!need_r) return ns;
    const auto& g = fr.grid;
    const auto& f = *fr.gauge.field;
    const double dl = g.spacing(), lam = fr.lambda, l2 = lam * lam;
    const int d = 2;
    const bool r3 = !f.is_static() && !f.is_uniform();
    if (fr.gauge.separable() && axis_separable(h.potential)) {
        // R1 = R3 = 0 and R2 = a0(y0) + a1(y1)
        const double s = f.scale(t);
        const double b2 = f.uniform[1] * f.uniform[1];
        for (int ax = 0; ax < d; ++ax) {
            Stamp st = ns.g;
            auto& v = ax == 0 ? st.f0 : st.f1;
            for (int i = 0; i < st.patch.len[ax]; ++i) {
                const double yv = -g.L + (st.patch.lo[ax] + i) * dl;
                const double z = yv - x[ax];
                Point ya{}, xa{};
                ya[ax] = yv;
                xa[ax] = x[ax];
                const double a = h.kappa * (l2 - l2 * l2 * z * z + 0.25 * s * s * b2 * z * z) +
                                 taylor_remainder_V(h.potential, t, ya, xa, d);
                v[i] *= a;
            }
            ns.r.push_back(std::move(st));
        }
        return ns;
    }
    Stamp st;
    st.patch = ns.g.patch;
    st.separable = false;
    st.p = stamp_values(ns.g);
    const Point he = h.grad_eta(t, x, xi);
    const int n0 = st.patch.len[0], n1 = st.patch.len[1];
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const Point y{-g.L + (st.patch.lo[0] + i) * dl, -g.L + (st.patch.lo[1] + j) * dl, 0.0};
            st.p[static_cast<std::size_t>(i) * n1 + j] *=
                remainder_multiplier(fr.gauge, h, t, lam, y, x, he, r3);
        }
    }
    ns.r.push_back(std::move(st));
    return ns;
}

// Sum over retained nodes of coef(n) * stamp(n, time index ti), per-chunk buffers merged in order.
template <class Coef>
GridFunction superpose(const ParametrixPlan& plan, std::size_t ti, bool remainder, Coef&& coef,
                       int workers) {
    const auto& fr = plan.frame;
    const SpatialGrid& grid = fr.grid;
    const int n = grid.n;
    const double t = plan.times[ti];
    std::vector<std::vector<cplx>> bufs(kChunks);
    parallel_chunks(kChunks, workers, [&](int chunk) {
        const auto [b, e] = chunk_range(plan.retained(), kChunks, chunk);
        auto& buf = bufs[chunk];
        for (std::size_t k = b; k < e; ++k) {
            const cplx c = coef(k);
            if (c == cplx{}) continue;
            if (buf.empty()) buf.assign(grid.size(), cplx{});
            const FlowState& st = plan.paths[k][ti];
            const NodeStamps ns = node_stamps(fr, plan.integrator.symbol, t, st.x, st.xi, remainder);
            if (remainder) {
                for (const auto& r : ns.r) stamp_acc(r, c, buf, n);
            } else {
                stamp_acc(ns.g, c, buf, n);
            }
        }
    });
    GridFunction out(grid);
    for (const auto& buf : bufs) {
        if (buf.empty()) continue;
        for (std::size_t i = 0; i < buf.size(); ++i) out.values[i] += buf[i];
    }
    return out;
}

// <g_n(t_i), w> for every retained node.
std::vector<cplx> project(const ParametrixPlan& plan, std::size_t ti, const GridFunction& w, int workers) {
    const auto& fr = plan.frame;
    if (w.grid != fr.grid) throw ConfigError("propagate: grid does not match the plan");
    std::vector<cplx> a(plan.retained());
    const double cell = fr.grid.cell_volume();
    const double t = plan.times[ti];
    parallel_chunks(kChunks, workers, [&](int chunk) {
        const auto [b, e] = chunk_range(plan.retained(), kChunks, chunk);
        for (std::size_t k = b; k < e; ++k) {
            const FlowState& st = plan.paths[k][ti];
            const Stamp s = make_stamp(fr, t, st.x, st.xi);
            a[k] = cell * stamp_dot(s, w.values, fr.grid.n);
        }
    });
    return a;
}

// Re <g, R g> / <g, g>: the local phase rate of a node.
double remainder_rate(const NodeStamps& ns) {
    auto inner1 = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        cplx s{};
        for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
        return s;
    };
    cplx num{};
    double den;
    if (ns.g.separable) {
        den = std::real(inner1(ns.g.f0, ns.g.f0) * inner1(ns.g.f1, ns.g.f1));
        for (const auto& r : ns.r) {
            if (r.separable) {
                num += inner1(ns.g.f0, r.f0) * inner1(ns.g.f1, r.f1);
            } else {
                num += inner1(stamp_values(ns.g), r.p);
            }
        }
    } else {
        den = std::real(inner1(ns.g.p, ns.g.p));
        for (const auto& r : ns.r) num += inner1(ns.g.p, stamp_values(r));
    }
    return den > 0.0 ? num.real() / den : 0.0;
}

// int_0^1 (1 - s) e^{-i theta s} ds. With f = e^{-i rho s} a(s) and a linear on a step of
// length dt, the step integral is dt (c f_0 + conj(c) f_1), theta = rho dt; theta = 0 is the
// trapezoid rule.
cplx filon_weight(double theta) {
    if (std::abs(theta) < 1e-3) return cplx(0.5 - theta * theta / 24.0, -theta / 6.0);
    const cplx it(0.0, theta);
    return 1.0 / it + (1.0 - std::exp(-it)) / (theta * theta);
}

}  // namespace

std::size_t ParametrixPlan::time_index(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(times[i] - t) <= 1e-9) return i;
    throw DomainError("propagate: t = " + std::to_string(t) + " is not an output time of the plan");
}

PhaseSpaceCoefficients ParametrixPlan::coefficients() const {
    PhaseSpaceCoefficients c;
    c.frame = &frame;
    c.values = all_coefficients;
    return c;
}

ParametrixPlan build_plan(const WavepacketFrame& frame, const FlowIntegrator& integrator,
                          const GridFunction& u0, double T, int n_out, double drop_tol, int workers) {
    if (!(T >= 0.0)) throw ConfigError("build_plan: T must be >= 0");
    if (T > 0.0 && n_out < 1) throw ConfigError("build_plan: n_out must be >= 1");
    if (!(drop_tol >= 0.0)) throw ConfigError("build_plan: drop_tol must be >= 0");
    ParametrixPlan plan;
    plan.frame = frame;
    plan.integrator = integrator;
    plan.workers = std::max(1, workers);
    plan.u0_norm = u0.norm();
    if (T == 0.0) n_out = 0;
    for (int k = 0; k <= n_out; ++k) plan.times.push_back(n_out == 0 ? 0.0 : T * k / n_out);

    plan.all_coefficients = analyze(plan.frame, 0.0, u0, plan.workers).values;
    double mx = 0.0, tot = 0.0, dropped = 0.0;
    for (const auto& c : plan.all_coefficients) {
        mx = std::max(mx, std::abs(c));
        tot += std::norm(c);
    }
    const double thr = drop_tol * mx;
    for (std::size_t i = 0; i < plan.all_coefficients.size(); ++i) {
        const cplx c = plan.all_coefficients[i];
        if (c != cplx{} && std::abs(c) >= thr) {
            plan.nodes.push_back(i);
            plan.coef.push_back(c);
        } else {
            dropped += std::norm(c);
        }
    }
    plan.dropped_fraction = tot > 0.0 ? std::sqrt(dropped / tot) : 0.0;

    const auto& fr = plan.frame;
    const double nyq = kPi / fr.grid.spacing();
    plan.paths.resize(plan.retained());
    std::vector<std::string> errs(kChunks);
    std::vector<std::size_t> err_node(kChunks, 0);
    std::vector<double> err_t(kChunks, 0.0);
    parallel_chunks(kChunks, plan.workers, [&](int chunk) {
        const auto [b, e] = chunk_range(plan.retained(), kChunks, chunk);
        for (std::size_t k = b; k < e; ++k) {
            const std::size_t idx = plan.nodes[k];
            const std::size_t xi_n = fr.xi_count();
            const FlowState s0{fr.x_node(idx / xi_n), fr.xi_node(idx % xi_n), 0.0, 0.0};
            plan.paths[k] = advance_path(plan.integrator, s0, plan.times);
            for (const auto& st : plan.paths[k]) {
                bool bad = std::abs(st.xi[0]) > nyq || std::abs(st.xi[1]) > nyq;
                if (!bad) {
                    try {
                        patch_for(fr.grid, st.x, fr.stamp_radius);
                    } catch (const DomainError&) {
                        bad = true;
                    }
                }
                if (bad) {
                    errs[chunk] = "node " + std::to_string(idx) + " leaves the synthesis box at t = " +
                                  std::to_string(st.t) + " (x = (" + std::to_string(st.x[0]) + ", " +
                                  std::to_string(st.x[1]) + "), xi = (" + std::to_string(st.xi[0]) +
                                  ", " + std::to_string(st.xi[1]) + ")); enlarge the box or shorten T";
                    err_node[chunk] = idx;
                    err_t[chunk] = st.t;
                    return;
                }
            }
        }
    });
    for (int c = 0; c < kChunks; ++c)
        if (!errs[c].empty()) throw BoxExitError(errs[c], err_node[c], err_t[c]);
    return plan;
}

Propagated apply_parametrix(const ParametrixPlan& plan, double t) {
    const std::size_t ti = plan.time_index(t);
    const cplx W = plan.weight();
    Propagated p;
    p.u = superpose(plan, ti, false, [&](std::size_t k) {
        return W * std::polar(1.0, plan.paths[k][ti].psi) * plan.coef[k];
    }, plan.workers);
    p.mass_ratio = plan.u0_norm > 0.0 ? p.u.norm() / plan.u0_norm : 0.0;
    return p;
}

GridFunction apply_parametrix(const ParametrixPlan& plan, double t, double s, const GridFunction& w) {
    const std::size_t ti = plan.time_index(t), si = plan.time_index(s);
    const auto a = project(plan, si, w, plan.workers);
    const cplx W = plan.weight();
    return superpose(plan, ti, false, [&](std::size_t k) {
        return W * std::polar(1.0, plan.paths[k][ti].psi - plan.paths[k][si].psi) * a[k];
    }, plan.workers);
}

double residual_R3_at(const GaugeData& gauge, double t, const Point& y, const Point& x) {
    const auto& f = *gauge.field;
    if (f.is_static()) return 0.0;
    const int d = f.dim;
    const Point z = sub(y, x);
    const Point a0 = potential_time_derivative(gauge, t, x);
    const auto& q = gauss_legendre01(gauge.quad_order);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const Point a = potential_time_derivative(gauge, t, add(x, scale(z, q.nodes[i])));
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += z[j] * (a[j] - a0[j]);
        acc += q.weights[i] * s;
    }
    if (!std::isfinite(acc)) throw QuadratureError("residual_R3: non-finite value", y);
    return acc;
}

GridFunction residual_R1(const GaugeData& gauge, const SymbolH& h, double t, const FlowState& node,
                         const SpatialGrid& grid, double stamp_radius) {
    GridFunction out(grid);
    if (gauge.field->is_uniform()) return out;
    const Patch p = patch_for(grid, node.x, stamp_radius);
    const Point he = h.grad_eta(t, node.x, node.xi);
    const int d = grid.dim;
    for (int i = 0; i < p.len[0]; ++i) {
        for (int j = 0; j < p.len[1]; ++j) {
            const int gi = p.lo[0] + i, gj = p.lo[1] + j;
            const Point y{grid.coord(gi), grid.coord(gj), 0.0};
            const Point ryx = remainder_A_yx(gauge, t, y, node.x);
            const Point rxy = remainder_A_xy(gauge, t, y, node.x);
            double r = 0.0;
            for (int k = 0; k < d; ++k) r += he[k] * (rxy[k] - ryx[k]);
            out.at(gi, gj) = r;
        }
    }
    return out;
}

GridFunction residual_R2(const GaugeData& gauge, const SymbolH& h, double t, const FlowState& node,
                         const GridFunction& wavepacket) {
    const auto& g = wavepacket.grid;
    const int d = g.dim;
    if (h.is_kinetic()) {
        const auto A = potential_samples(gauge, t, g);
        GridFunction out(g);
        for (int j = 0; j < d; ++j) {
            GridFunction w = covariant_derivative(A, j, wavepacket);
            w -= node.xi[j] * wavepacket;
            GridFunction w2 = covariant_derivative(A, j, w);
            w2 -= node.xi[j] * w;
            out += h.kappa * w2;
        }
        for (std::size_t k = 0; k < out.values.size(); ++k)
            out.values[k] += taylor_remainder_V(h.potential, t, wavepacket.point(k), node.x, d) * wavepacket.values[k];
        return out;
    }
    // r^(1)_{x,xi}(h) = h - h(x,xi) - grad h(x,xi).(y - x, eta - xi), plus h_r
    std::vector<SymbolTerm> terms = h.as_terms();
    const Point gy = h.grad_y(t, node.x, node.xi);
    const Point ge = h.grad_eta(t, node.x, node.xi);
    double c0 = -h.eval(t, node.x, node.xi);
    for (int l = 0; l < d; ++l) {
        MultiIndex e{0, 0, 0};
        e[l] = 1;
        terms.push_back(SymbolTerm{cplx(-gy[l]), monomial_factor(e), one_factor()});
        terms.push_back(SymbolTerm{cplx(-ge[l]), one_factor(), monomial_factor(e)});
        c0 += gy[l] * node.x[l] + ge[l] * node.xi[l];
    }
    terms.push_back(SymbolTerm{cplx(c0), one_factor(), one_factor()});
    for (auto& tm : kn_correction(h).terms) terms.push_back(tm);
    const SymbolH r = generic_symbol(std::move(terms), d, "r1");
    return apply_op_direct(gauge, r, t, wavepacket, 0, Quantization::kohn_nirenberg);
}

GridFunction residual_R3(const GaugeData& gauge, double t, const FlowState& node, const SpatialGrid& grid,
                         double stamp_radius, bool* active) {
    GridFunction out(grid);
    const bool on = !gauge.field->is_static();
    if (active) *active = on;
    if (!on) return out;
    const Patch p = patch_for(grid, node.x, stamp_radius);
    for (int i = 0; i < p.len[0]; ++i) {
        for (int j = 0; j < p.len[1]; ++j) {
            const int gi = p.lo[0] + i, gj = p.lo[1] + j;
            out.at(gi, gj) = residual_R3_at(gauge, t, Point{grid.coord(gi), grid.coord(gj), 0.0}, node.x);
        }
    }
    return out;
}

GridFunction remainder_wavepacket(const WavepacketFrame& frame, const SymbolH& h, double t,
                                  const Point& x, const Point& xi) {
    require_kinetic(h, "remainder_wavepacket");
    const NodeStamps ns = node_stamps(frame, h, t, x, xi, true);
    GridFunction out(frame.grid);
    for (const auto& r : ns.r) stamp_acc(r, 1.0, out.values, frame.grid.n);
    return out;
}

GridFunction apply_K(const ParametrixPlan& plan, double t, double s, const GridFunction& w) {
    require_kinetic(plan.integrator.symbol, "apply_K");
    const std::size_t ti = plan.time_index(t), si = plan.time_index(s);
    const auto a = project(plan, si, w, plan.workers);
    const cplx W = plan.weight();
    return superpose(plan, ti, true, [&](std::size_t k) {
        return W * std::polar(1.0, plan.paths[k][ti].psi - plan.paths[k][si].psi) * a[k];
    }, plan.workers);
}

VolterraSolution solve_volterra(const ParametrixPlan& plan, const VolterraOptions& opt) {
    require_kinetic(plan.integrator.symbol, "solve_volterra");
    if (opt.n_t < 8) throw ConfigError("solve_volterra: n_t must be >= 8");
    if (!(opt.tol > 0.0)) throw ConfigError("solve_volterra: tol must be positive");
    if (opt.max_iter < 1) throw ConfigError("solve_volterra: max_iter must be >= 1");
    const int n_out = static_cast<int>(plan.times.size()) - 1;
    if (n_out < opt.n_t || n_out % opt.n_t != 0)
        throw ConfigError("solve_volterra: n_t must divide the plan's n_out");
    const int stride = n_out / opt.n_t;
    VolterraSolution sol;
    for (int i = 0; i <= opt.n_t; ++i) {
        sol.plan_index.push_back(static_cast<std::size_t>(i * stride));
        sol.times.push_back(plan.times[static_cast<std::size_t>(i * stride)]);
    }
    const std::size_t m = sol.times.size(), N = plan.retained();
    const auto& fr = plan.frame;
    const SpatialGrid& grid = fr.grid;
    const int n = grid.n;
    const double cell = grid.cell_volume();
    const cplx W = plan.weight();
    const cplx I(0.0, 1.0);
    const auto& h = plan.integrator.symbol;
    sol.v.assign(m, GridFunction(grid));
    sol.rate.assign(m, std::vector<double>(N, 0.0));
    auto psi = [&](std::size_t k, std::size_t i) { return plan.paths[k][sol.plan_index[i]].psi; };
    parallel_chunks(kChunks, plan.workers, [&](int chunk) {
        const auto [b, e] = chunk_range(N, kChunks, chunk);
        for (std::size_t k = b; k < e; ++k) {
            for (std::size_t i = 0; i < m; ++i) {
                const FlowState& st = plan.paths[k][sol.plan_index[i]];
                sol.rate[i][k] = remainder_rate(node_stamps(fr, h, sol.times[i], st.x, st.xi, true));
            }
        }
    });

    double k_hat = 0.0, prev_weighted = 0.0;
    int bad_streak = 0;
    std::vector<cplx> acc(N), f_prev(N);
    for (int it = 0; it < opt.max_iter; ++it) {
        std::vector<GridFunction> vn(m, GridFunction(grid));
        std::fill(acc.begin(), acc.end(), cplx{});
        // march in time: projections of the previous iterate at t_i, then stamp R g_n(t_i)
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<std::vector<cplx>> bufs(kChunks);
            parallel_chunks(kChunks, plan.workers, [&](int chunk) {
                const auto [b, e] = chunk_range(N, kChunks, chunk);
                auto& buf = bufs[chunk];
                for (std::size_t k = b; k < e; ++k) {
                    const FlowState& st = plan.paths[k][sol.plan_index[i]];
                    const NodeStamps ns = node_stamps(fr, h, sol.times[i], st.x, st.xi, true);
                    const cplx a = it == 0 ? cplx{} : cell * stamp_dot(ns.g, sol.v[i].values, n);
                    const cplx f = std::polar(1.0, -psi(k, i)) * a;
                    if (i > 0) {
                        const double dt = sol.times[i] - sol.times[i - 1];
                        const cplx c0 = filon_weight(0.5 * dt * (sol.rate[i - 1][k] + sol.rate[i][k]));
                        acc[k] += dt * (c0 * f_prev[k] + std::conj(c0) * f);
                    }
                    f_prev[k] = f;
                    const cplx beta = W * std::polar(1.0, psi(k, i)) * (-plan.coef[k] - I * acc[k]);
                    if (beta == cplx{}) continue;
                    if (buf.empty()) buf.assign(grid.size(), cplx{});
                    for (const auto& r : ns.r) stamp_acc(r, beta, buf, n);
                }
            });
            for (const auto& buf : bufs) {
                if (buf.empty()) continue;
                for (std::size_t q = 0; q < buf.size(); ++q) vn[i].values[q] += buf[q];
            }
        }
        if (it == 0) {
            for (std::size_t i = 0; i < m; ++i) k_hat = std::max(k_hat, vn[i].norm());
            k_hat = plan.u0_norm > 0.0 ? k_hat / plan.u0_norm : 0.0;
        }
        const double beta = 2.0 * k_hat;
        double num = 0.0, den = 0.0, wnum = 0.0, wden = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = (vn[i] - sol.v[i]).norm(), a = vn[i].norm();
            const double e = std::exp(-beta * sol.times[i]);
            num = std::max(num, d);
            den = std::max(den, a);
            wnum = std::max(wnum, e * d);
            wden = std::max(wden, e * a);
        }
        const double res = den > 0.0 ? num / den : 0.0;
        const double wres = wden > 0.0 ? wnum / wden : 0.0;
        sol.v = std::move(vn);
        sol.iterations = it + 1;
        if (!sol.residual_history.empty())
            sol.update_ratios.push_back(sol.residual_history.back() > 0.0 ? res / sol.residual_history.back()
                                                                          : 0.0);
        sol.residual_history.push_back(res);
        sol.weighted_history.push_back(wres);
        if (res <= opt.tol) {
            sol.converged = true;
            break;
        }
        // guard on the exponentially weighted update, where Picard contracts for Volterra kernels
        // (below 1e-12 the weighted update sits at round-off and says nothing)
        if (it > 0 && wres > 1e-12 && prev_weighted > 0.0 && wres / prev_weighted >= 1.0) {
            if (++bad_streak >= 3)
                throw DivergenceError("solve_volterra: Picard updates stopped contracting; increase lambda or "
                                      "shorten T");
        } else {
            bad_streak = 0;
        }
        prev_weighted = wres;
    }
    sol.alpha.assign(m, {});
    for (std::size_t i = 0; i < m; ++i) sol.alpha[i] = project(plan, sol.plan_index[i], sol.v[i], plan.workers);
    return sol;
}

Propagated apply_propagator(const ParametrixPlan& plan, const VolterraSolution& sol, double t) {
    std::size_t i = sol.times.size();
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        if (std::abs(sol.times[k] - t) <= 1e-9) i = k;
    if (i == sol.times.size()) throw DomainError("apply_propagator: t is not on the Volterra time grid");
    const cplx W = plan.weight();
    const cplx I(0.0, 1.0);
    Propagated p;
    p.u = superpose(plan, sol.plan_index[i], false, [&](std::size_t k) {
        cplx acc{};
        cplx fp = sol.alpha[0][k];
        for (std::size_t j = 1; j <= i; ++j) {
            const cplx f = std::polar(1.0, -plan.paths[k][sol.plan_index[j]].psi) * sol.alpha[j][k];
            const double dt = sol.times[j] - sol.times[j - 1];
            const cplx c0 = filon_weight(0.5 * dt * (sol.rate[j - 1][k] + sol.rate[j][k]));
            acc += dt * (c0 * fp + std::conj(c0) * f);
            fp = f;
        }
        return W * std::polar(1.0, plan.paths[k][sol.plan_index[i]].psi) * (plan.coef[k] + I * acc);
    }, plan.workers);
    p.mass_ratio = plan.u0_norm > 0.0 ? p.u.norm() / plan.u0_norm : 0.0;
    return p;
}

FlatReport verify_flat_approximation(const GaugeData& gauge, const SymbolH& h, double t, const Point& x,
                                     const Point& xi, double lambda, const SpatialGrid& grid,
                                     FlowSigns signs, double step) {
    require_kinetic(h, "verify_flat_approximation");
    if (grid.dim != 2 || grid.n > 96) throw CapabilityError("verify_flat_approximation: d = 2, n <= 96");
    WavepacketFrame fr;
    fr.gauge = gauge;
    fr.grid = grid;
    fr.lambda = lambda;
    fr.stamp_radius = 8.0 / lambda;
    auto packet = [&](const Point& a, const Point& b) { return wavepacket_eval(fr, t, a, b, grid); };
    const GridFunction g = packet(x, xi);
    const GridFunction lhs = apply_op(gauge, h, t, g);
    const FlowRhs f = flow_rhs(gauge, h, t, x, xi, false, signs);
    GridFunction hg(grid);
    for (int j = 0; j < 2; ++j) {
        Point xp = x, xm = x, kp = xi, km = xi;
        xp[j] += step;
        xm[j] -= step;
        kp[j] += step;
        km[j] -= step;
        hg += (f.dx[j] / (2.0 * step)) * (packet(xp, xi) - packet(xm, xi));
        hg += (f.dxi[j] / (2.0 * step)) * (packet(x, kp) - packet(x, km));
    }
    FlatReport rep;
    rep.m = multiplier_m(gauge, h, t, x, xi);
    const FlowState node{x, xi, 0.0, t};
    GridFunction r1 = residual_R1(gauge, h, t, node, grid, fr.stamp_radius);
    for (std::size_t k = 0; k < r1.values.size(); ++k) r1.values[k] *= g.values[k];
    const GridFunction r2 = residual_R2(gauge, h, t, node, g);
    GridFunction rhs = cplx(0.0, 1.0) * hg;
    rhs += rep.m * g;
    rhs += r1;
    rhs += r2;
    rep.op_norm = lhs.norm();
    rep.r1_norm = r1.norm();
    rep.r2_norm = r2.norm();
    rep.residual = rep.op_norm > 0.0 ? (lhs - rhs).norm() / rep.op_norm : (lhs - rhs).norm();
    return rep;
}

}  // namespace magpack
