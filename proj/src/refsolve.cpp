#include "magpack/refsolve.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <memory>

#include "magpack/fft.hpp"

namespace magpack {

namespace {

// Forward link e^{-i int_y^{y+e_j delta} A} for every node and axis.
std::vector<std::vector<cplx>> links(const GaugeData& gauge, double t, const SpatialGrid& g) {
    const int d = g.dim;
    const double h = g.spacing();
    GridFunction probe(g);
    std::vector<std::vector<cplx>> out(d, std::vector<cplx>(g.size()));
    std::size_t stride = 1;
    std::vector<std::size_t> strides(d);
    for (int a = d - 1; a >= 0; --a) {
        strides[a] = stride;
        stride *= g.n;
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point y = probe.point(k);
        for (int j = 0; j < d; ++j) {
            Point mid = y;
            mid[j] += 0.5 * h;
            double theta = h * potential_at(gauge, t, mid, Point{})[j];
            if (gauge.shift) {
                // exact edge integral of grad v, neighbour taken with periodic wrap
                const int idx = static_cast<int>((k / strides[j]) % g.n);
                Point nb = y;
                nb[j] = g.coord((idx + 1) % g.n);
                theta += gauge.shift->v(nb.data()) - gauge.shift->v(y.data());
            }
            out[j][k] = std::polar(1.0, -theta);
        }
    }
    return out;
}

struct LatticeH {
    SpatialGrid g;
    double kappa;
    int order;
    std::vector<std::vector<cplx>> link;
    std::vector<double> V;
    std::vector<std::size_t> strides;

    std::size_t shift_index(std::size_t k, int axis, int s) const {
        const int n = g.n;
        const int i = static_cast<int>((k / strides[axis]) % n);
        const int j = ((i + s) % n + n) % n;
        return k + (static_cast<std::ptrdiff_t>(j) - i) * static_cast<std::ptrdiff_t>(strides[axis]);
    }

    void apply(const std::vector<cplx>& u, std::vector<cplx>& out) const {
        const double h2 = g.spacing() * g.spacing();
        const std::size_t N = u.size();
        for (std::size_t k = 0; k < N; ++k) {
            cplx acc = V[k] * u[k];
            for (int a = 0; a < g.dim; ++a) {
                const auto& L = link[a];
                const std::size_t p1 = shift_index(k, a, 1), m1 = shift_index(k, a, -1);
                const cplx up1 = L[k] * u[p1];
                const cplx um1 = std::conj(L[m1]) * u[m1];
                if (order == 2) {
                    acc += kappa / h2 * (2.0 * u[k] - up1 - um1);
                } else {
                    const std::size_t p2 = shift_index(k, a, 2), m2 = shift_index(k, a, -2);
                    const cplx up2 = L[k] * L[p1] * u[p2];
                    const cplx um2 = std::conj(L[m1]) * std::conj(L[m2]) * u[m2];
                    acc += kappa / (12.0 * h2) * (30.0 * u[k] - 16.0 * (up1 + um1) + (up2 + um2));
                }
            }
            out[k] = acc;
        }
    }
};

LatticeH build_h(const GaugeData& gauge, const SymbolH& h, double t, const SpatialGrid& g, int order) {
    if (!h.is_kinetic()) throw CapabilityError("reference solver: kinetic_potential symbols only");
    if (order != 2 && order != 4) throw ConfigError("reference solver: stencil order must be 2 or 4");
    LatticeH H;
    H.g = g;
    H.kappa = h.kappa;
    H.order = order;
    H.link = links(gauge, t, g);
    H.V.assign(g.size(), 0.0);
    GridFunction probe(g);
    if (h.potential.kind != PotentialKind::zero)
        for (std::size_t k = 0; k < g.size(); ++k) H.V[k] = h.potential.V(t, probe.point(k));
    H.strides.resize(g.dim);
    std::size_t s = 1;
    for (int a = g.dim - 1; a >= 0; --a) {
        H.strides[a] = s;
        s *= g.n;
    }
    return H;
}

cplx vdot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

GridFunction cn_step(const LatticeH& H, double dt, const GridFunction& u, const CnOptions& opt) {
    const std::size_t N = u.values.size();
    const cplx tau(0.0, 0.5 * dt);
    std::vector<cplx> hu(N), tmp(N);
    // b = (I - i tau H) u ; rhs = (I - i tau H) b
    H.apply(u.values, hu);
    std::vector<cplx> b(N), rhs(N);
    for (std::size_t k = 0; k < N; ++k) b[k] = u.values[k] - tau * hu[k];
    H.apply(b, hu);
    for (std::size_t k = 0; k < N; ++k) rhs[k] = b[k] - tau * hu[k];
    // normal operator (I + tau^2 H^2)
    auto normal = [&](const std::vector<cplx>& x, std::vector<cplx>& y) {
        H.apply(x, tmp);
        H.apply(tmp, y);
        for (std::size_t k = 0; k < N; ++k) y[k] = x[k] + std::norm(tau) * y[k];
    };
    std::vector<cplx> x = b, r(N), p(N), Ap(N);
    normal(x, Ap);
    for (std::size_t k = 0; k < N; ++k) r[k] = rhs[k] - Ap[k];
    p = r;
    double rr = vdot(r, r).real();
    const double bnorm = std::sqrt(vdot(rhs, rhs).real());
    const double target = opt.tol * (bnorm > 0.0 ? bnorm : 1.0);
    int it = 0;
    while (std::sqrt(rr) > target) {
        if (++it > opt.max_iter) throw SolverError("crank_nicolson_step: CG did not converge", std::sqrt(rr) / bnorm);
        normal(p, Ap);
        const double alpha = rr / vdot(p, Ap).real();
        for (std::size_t k = 0; k < N; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * Ap[k];
        }
        const double rr_new = vdot(r, r).real();
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t k = 0; k < N; ++k) p[k] = r[k] + beta * p[k];
    }
    GridFunction out(u.grid);
    out.values = std::move(x);
    return out;
}

// I + i tau H as a sparse matrix; the same stencil as LatticeH::apply.
Eigen::SparseMatrix<cplx> cn_matrix(const LatticeH& H, cplx c) {
    const std::size_t N = H.g.size();
    const double h2 = H.g.spacing() * H.g.spacing();
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(N * (1 + 4 * H.g.dim));
    for (std::size_t k = 0; k < N; ++k) {
        cplx diag = 1.0 + c * H.V[k];
        for (int a = 0; a < H.g.dim; ++a) {
            const auto& L = H.link[a];
            const std::size_t p1 = H.shift_index(k, a, 1), m1 = H.shift_index(k, a, -1);
            const auto col = [&](std::size_t j, cplx v) {
                trip.emplace_back(static_cast<int>(k), static_cast<int>(j), c * v);
            };
            if (H.order == 2) {
                diag += c * (2.0 * H.kappa / h2);
                col(p1, -H.kappa / h2 * L[k]);
                col(m1, -H.kappa / h2 * std::conj(L[m1]));
            } else {
                const std::size_t p2 = H.shift_index(k, a, 2), m2 = H.shift_index(k, a, -2);
                const double w = H.kappa / (12.0 * h2);
                diag += c * (30.0 * w);
                col(p1, -16.0 * w * L[k]);
                col(m1, -16.0 * w * std::conj(L[m1]));
                col(p2, w * L[k] * L[p1]);
                col(m2, w * std::conj(L[m1]) * std::conj(L[m2]));
            }
        }
        trip.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
    }
    Eigen::SparseMatrix<cplx> M(static_cast<int>(N), static_cast<int>(N));
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();
    return M;
}

double mask_1d(double s, double L, double frac) {
    const double s_in = (1.0 - frac) * L;
    const double a = std::abs(s);
    if (a <= s_in) return 1.0;
    const double r = std::min(1.0, (a - s_in) / (L - s_in));
    return std::pow(std::cos(0.5 * kPi * r), 0.125);
}

}  // namespace

GridFunction apply_lattice_hamiltonian(const GaugeData& gauge, const SymbolH& h, double t,
                                       const GridFunction& u, int stencil_order) {
    const LatticeH H = build_h(gauge, h, t, u.grid, stencil_order);
    GridFunction out(u.grid);
    H.apply(u.values, out.values);
    return out;
}

GridFunction crank_nicolson_step(const GaugeData& gauge, const SymbolH& h, double t, double dt,
                                 const GridFunction& u, const CnOptions& opt) {
    const LatticeH H = build_h(gauge, h, t + 0.5 * dt, u.grid, opt.stencil_order);
    return cn_step(H, dt, u, opt);
}

std::vector<GridFunction> evolve(const GaugeData& gauge, const SymbolH& h, const GridFunction& u0,
                                 const std::vector<double>& times, double dt, const EvolveOptions& opt) {
    if (!(dt > 0.0)) throw ConfigError("evolve: dt must be positive");
    const auto& g = u0.grid;
    std::vector<double> mask(g.size(), 1.0);
    std::vector<bool> absorbing(g.size(), false);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point y = u0.point(k);
        for (int a = 0; a < g.dim; ++a) {
            mask[k] *= mask_1d(y[a], g.L, opt.absorb_fraction);
            if (std::abs(y[a]) > (1.0 - opt.absorb_fraction) * g.L) absorbing[k] = true;
        }
    }
    const bool static_h = gauge.field->is_static() && !h.potential.V_dot;
    LatticeH H = build_h(gauge, h, 0.5 * dt, g, opt.cn.stencil_order);
    // Evolve under H - E0 and restore e^{-i E0 t} at the outputs: the scheme's phase error
    // then scales with the energy spread of u0 instead of its mean energy.
    double E0 = 0.0;
    if (opt.energy_shift) {
        std::vector<cplx> hu(g.size());
        H.apply(u0.values, hu);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            num += (std::conj(u0.values[k]) * hu[k]).real();
            den += std::norm(u0.values[k]);
        }
        E0 = den > 0.0 ? num / den : 0.0;
    }
    auto shifted = [&](LatticeH L) {
        for (auto& v : L.V) v -= E0;
        return L;
    };
    H = shifted(std::move(H));
    // Static H: factor I + i dt/2 H once; the steps are then two sparse triangular solves.
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<cplx>>> lu;
    if (static_h && opt.direct_solve) {
        lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<cplx>>>();
        lu->compute(cn_matrix(H, cplx(0.0, 0.5 * dt)));
        if (lu->info() != Eigen::Success) throw SolverError("evolve: sparse factorization failed", 0.0);
    }
    auto direct_step = [&](const GridFunction& v) {
        std::vector<cplx> hv(v.values.size());
        H.apply(v.values, hv);
        Eigen::VectorXcd rhs(static_cast<Eigen::Index>(hv.size()));
        for (std::size_t k = 0; k < hv.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = v.values[k] - cplx(0.0, 0.5 * dt) * hv[k];
        const Eigen::VectorXcd x = lu->solve(rhs);
        GridFunction w(v.grid);
        for (std::size_t k = 0; k < hv.size(); ++k) w.values[k] = x[static_cast<Eigen::Index>(k)];
        return w;
    };
    std::vector<GridFunction> out;
    GridFunction u = u0;
    double t = 0.0;
    for (double target : times) {
        if (target < t - 1e-12) throw DomainError("evolve: output times must increase");
        while (t < target - 1e-12) {
            const double step = std::min(dt, target - t);
            if (!static_h) H = shifted(build_h(gauge, h, t + 0.5 * step, g, opt.cn.stencil_order));
            u = (lu && std::abs(step - dt) <= 1e-12 * dt) ? direct_step(u) : cn_step(H, step, u, opt.cn);
            double edge = 0.0, total = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                const double m = std::norm(u.values[k]);
                total += m;
                if (absorbing[k]) edge += m;
            }
            if (total > 0.0 && edge / total > opt.mass_limit)
                throw Error("evolve: " + std::to_string(edge / total) +
                            " of the mass reached the absorbing layer; enlarge the box");
            if (opt.absorb)
                for (std::size_t k = 0; k < g.size(); ++k) u.values[k] *= mask[k];
            t += step;
        }
        out.push_back(std::polar(1.0, -E0 * t) * u);
    }
    return out;
}

GridFunction gaussian_state(const SpatialGrid& grid, const GaussianState& s) {
    const int d = grid.dim;
    const double c = std::pow(kPi * s.width * s.width, -0.25 * d);
    return sample(grid, [&](const Point& y) {
        const Point z = sub(y, s.q);
        return std::polar(c * std::exp(-dot(z, z, d) / (2.0 * s.width * s.width)), dot(s.p, z, d));
    });
}

GridFunction exact_solution(ExactKind kind, const ExactParams& prm, const GaussianState& g0, double t,
                            const SpatialGrid& grid) {
    if (grid.dim != 2) throw CapabilityError("exact_solution: d = 2 only");
    if (!(g0.width > 0.0)) throw CapabilityError("exact_solution: Gaussian descriptor needs a positive width");
    using M2 = Eigen::Matrix2cd;
    using V2 = Eigen::Vector2d;
    const double kap = prm.kappa;
    const double om2 = (kind == ExactKind::free) ? 0.0 : 0.5 * prm.omega * prm.omega;  // V''
    const double b = (kind == ExactKind::landau) ? prm.b : 0.0;
    if (kind == ExactKind::harmonic && prm.b != 0.0)
        throw CapabilityError("exact_solution: harmonic kind has no field; use landau");
    // A(t,y) = M(t) y with M = -1/2 s(t) U, U = [[0,b],[-b,0]]
    auto Mat = [&](double tt) {
        const double s = 1.0 + prm.rate * tt;
        Eigen::Matrix2d M;
        M << 0.0, -0.5 * s * b, 0.5 * s * b, 0.0;
        return M;
    };
    struct St {
        V2 q, p;
        M2 Q, P;
        double S;
        cplx logdet;
    };
    auto rhs = [&](double tt, const St& s) {
        const Eigen::Matrix2d M = Mat(tt);
        const V2 w = s.p - M * s.q;
        St d;
        d.q = 2.0 * kap * w;
        d.p = 2.0 * kap * M.transpose() * w - om2 * s.q;
        const M2 Mc = M.cast<cplx>();
        d.Q = -2.0 * kap * Mc * s.Q + 2.0 * kap * s.P;
        d.P = -(2.0 * kap * (M.transpose() * M).cast<cplx>() + om2 * M2::Identity()) * s.Q +
              2.0 * kap * Mc.transpose() * s.P;
        const double H = kap * w.squaredNorm() + 0.5 * om2 * s.q.squaredNorm();
        d.S = s.p.dot(d.q) - H;
        d.logdet = (s.Q.inverse() * d.Q).trace();
        return d;
    };
    auto axpy = [](const St& a, const St& d, double h) {
        St o = a;
        o.q += h * d.q;
        o.p += h * d.p;
        o.Q += h * d.Q;
        o.P += h * d.P;
        o.S += h * d.S;
        o.logdet += h * d.logdet;
        return o;
    };
    St s;
    s.q = V2(g0.q[0], g0.q[1]);
    s.p = V2(g0.p[0], g0.p[1]);
    s.Q = g0.width * M2::Identity();
    s.P = cplx(0.0, 1.0 / g0.width) * M2::Identity();
    s.S = 0.0;
    s.logdet = 2.0 * std::log(g0.width);
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / 2e-4)));
    const double h = t / steps;
    double tt = 0.0;
    for (int k = 0; k < steps; ++k) {
        const St k1 = rhs(tt, s);
        const St k2 = rhs(tt + 0.5 * h, axpy(s, k1, 0.5 * h));
        const St k3 = rhs(tt + 0.5 * h, axpy(s, k2, 0.5 * h));
        const St k4 = rhs(tt + h, axpy(s, k3, h));
        St n = s;
        n = axpy(n, k1, h / 6.0);
        n = axpy(n, k2, h / 3.0);
        n = axpy(n, k3, h / 3.0);
        n = axpy(n, k4, h / 6.0);
        s = n;
        tt += h;
    }
    const M2 G = s.P * s.Q.inverse();
    const cplx amp = std::pow(kPi, -0.5) * std::exp(-0.5 * s.logdet);
    return sample(grid, [&](const Point& y) {
        const Eigen::Vector2cd z(y[0] - s.q[0], y[1] - s.q[1]);
        const cplx quad = 0.5 * (z.transpose() * G * z).value();
        const cplx lin = s.p[0] * z[0] + s.p[1] * z[1];
        return amp * std::exp(cplx(0.0, 1.0) * (quad + lin + s.S));
    });
}

GridFunction free_evolve_fft(const GridFunction& u0, double t, double kappa) {
    const auto& g = u0.grid;
    std::vector<cplx> f = u0.values;
    fft_forward(g, f);
    std::vector<std::size_t> strides(g.dim);
    std::size_t s = 1;
    for (int a = g.dim - 1; a >= 0; --a) {
        strides[a] = s;
        s *= g.n;
    }
    for (std::size_t k = 0; k < f.size(); ++k) {
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            const double w = fft_wavenumber(g, static_cast<int>((k / strides[a]) % g.n));
            k2 += w * w;
        }
        f[k] *= std::polar(1.0, -t * kappa * k2);
    }
    fft_backward(g, f);
    GridFunction out(g);
    out.values = std::move(f);
    return out;
}

}  // namespace magpack
