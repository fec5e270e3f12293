#include "magpack/quantize.hpp"

#include <Eigen/Dense>

#include "magpack/fft.hpp"
#include "magpack/parallel.hpp"
#include "magpack/quadrature.hpp"

namespace magpack {

namespace {

using MatC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// (2 pi)^{-2} int_box e^{i w.eta} b(eta) deta at w = (m0, m1) delta, m in (-(n-1) .. n-1).
MatC eta_kernel(const Factor& b, double t, const SpatialGrid& g, int q) {
    const int n = g.n, M = 2 * n - 1;
    const double h = g.spacing(), kmax = kPi / h;
    MatC K = MatC::Zero(M, M);
    if (b.constant) {
        K(n - 1, n - 1) = b.f(t, Point{}) / (h * h);
        return K;
    }
    const GaussRule rule = gauss_legendre(q, -kmax, kmax);
    MatC E(M, q);
    for (int m = 0; m < M; ++m)
        for (int k = 0; k < q; ++k)
            E(m, k) = std::polar(rule.weights[k] / (2.0 * kPi), (m - (n - 1)) * h * rule.nodes[k]);
    MatC B(q, q);
    for (int k0 = 0; k0 < q; ++k0)
        for (int k1 = 0; k1 < q; ++k1)
            B(k0, k1) = b.f(t, Point{rule.nodes[k0], rule.nodes[k1], 0.0});
    K = E * B * E.transpose();
    return K;
}

Factor derived_factor(const Factor& f, const MultiIndex& a) {
    if (!f.deriv && !f.constant) throw CapabilityError("kn_correction: missing derivative callback");
    Factor o;
    if (f.constant) {
        o.f = [](double, const Point&) { return 0.0; };
        o.constant = true;
        return o;
    }
    auto d = f.deriv;
    o.f = [d, a](double t, const Point& v) { return d(t, v, a); };
    return o;
}

}  // namespace

std::vector<Point> potential_samples(const GaugeData& gauge, double t, const SpatialGrid& grid) {
    GridFunction probe(grid);
    std::vector<Point> A(grid.size());
    for (std::size_t k = 0; k < A.size(); ++k) A[k] = vector_potential(gauge, t, probe.point(k));
    return A;
}

GridFunction covariant_derivative(const std::vector<Point>& A, int j, const GridFunction& u) {
    GridFunction d = spectral_derivative(u, j);
    for (std::size_t k = 0; k < d.values.size(); ++k)
        d.values[k] = cplx(0.0, -1.0) * d.values[k] - A[k][j] * u.values[k];
    return d;
}

GridFunction covariant_derivative(const GaugeData& gauge, double t, int j, const GridFunction& u) {
    if (j < 0 || j >= u.grid.dim) throw DomainError("covariant_derivative: axis out of range");
    return covariant_derivative(potential_samples(gauge, t, u.grid), j, u);
}

GridFunction apply_op(const GaugeData& gauge, const SymbolH& h, double t, const GridFunction& u) {
    if (!h.is_kinetic())
        throw CapabilityError("apply_op: only the kinetic_potential family; use apply_op_direct");
    const auto A = potential_samples(gauge, t, u.grid);
    GridFunction out(u.grid);
    for (int j = 0; j < u.grid.dim; ++j) {
        const GridFunction p = covariant_derivative(A, j, covariant_derivative(A, j, u));
        for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += h.kappa * p.values[k];
    }
    if (h.potential.kind != PotentialKind::zero) {
        for (std::size_t k = 0; k < out.values.size(); ++k)
            out.values[k] += h.potential.V(t, u.point(k)) * u.values[k];
    }
    return out;
}

GridFunction apply_op_direct(const GaugeData& gauge, const SymbolH& h, double t, const GridFunction& u,
                             int eta_nodes, Quantization q, int workers) {
    const auto& g = u.grid;
    if (g.dim != 2) throw CapabilityError("apply_op_direct: d = 2 only");
    if (g.n > 64) throw CapabilityError("apply_op_direct: oracle limited to n <= 64");
    const int n = g.n, M = 2 * n - 1;
    const double dlt = g.spacing();
    if (eta_nodes <= 0) eta_nodes = 2 * n + 16;
    const auto terms = h.as_terms();
    std::vector<MatC> K;
    std::vector<std::vector<double>> ay;  // Weyl: on the half grid (M x M); KN: on the grid
    for (const auto& tm : terms) {
        K.push_back(eta_kernel(tm.eta, t, g, eta_nodes));
        std::vector<double> a;
        if (q == Quantization::weyl) {
            a.resize(static_cast<std::size_t>(M) * M);
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j)
                    a[static_cast<std::size_t>(i) * M + j] =
                        tm.y.f(t, Point{-g.L + 0.5 * i * dlt, -g.L + 0.5 * j * dlt, 0.0});
        } else {
            a.resize(g.size());
            for (std::size_t k = 0; k < g.size(); ++k) a[k] = tm.y.f(t, u.point(k));
        }
        ay.push_back(std::move(a));
    }
    const bool sep = gauge.separable();
    const auto& fld = *gauge.field;
    const double s = fld.scale(t);
    GridFunction out(g);
    const double w = dlt * dlt;
    parallel_chunks(kChunks, workers, [&](int chunk) {
        const auto [b, e] = chunk_range(g.size(), kChunks, chunk);
        for (std::size_t ky = b; ky < e; ++ky) {
            const int i0 = static_cast<int>(ky / n), i1 = static_cast<int>(ky % n);
            const Point y = u.point(ky);
            // -1/2 s U y, so that phi(y', y) = (y' - y).c
            double c0 = 0.0, c1 = 0.0;
            if (sep) {
                c0 = -0.5 * s * (fld.uniform[0] * y[0] + fld.uniform[1] * y[1]);
                c1 = -0.5 * s * (fld.uniform[2] * y[0] + fld.uniform[3] * y[1]);
            }
            cplx acc{};
            for (int j0 = 0; j0 < n; ++j0) {
                for (int j1 = 0; j1 < n; ++j1) {
                    const cplx uv = u.values[static_cast<std::size_t>(j0) * n + j1];
                    if (uv == cplx{}) continue;
                    const int m0 = i0 - j0 + n - 1, m1 = i1 - j1 + n - 1;
                    cplx sym{};
                    for (std::size_t r = 0; r < terms.size(); ++r) {
                        const double a = q == Quantization::weyl
                                             ? ay[r][static_cast<std::size_t>(i0 + j0) * M + (i1 + j1)]
                                             : ay[r][ky];
                        sym += terms[r].coef * a * K[r](m0, m1);
                    }
                    if (sym == cplx{}) continue;
                    double ph;
                    const Point yp{g.coord(j0), g.coord(j1), 0.0};
                    if (sep) {
                        ph = (yp[0] - y[0]) * c0 + (yp[1] - y[1]) * c1;
                    } else {
                        ph = phase_phi(gauge, t, yp, y);
                    }
                    acc += sym * std::polar(1.0, -ph) * uv;
                }
            }
            out.values[ky] = w * acc;
        }
    });
    return out;
}

SymbolH kn_correction(const SymbolH& h) {
    if (h.is_kinetic()) return generic_symbol({}, h.dim, "zero");
    std::vector<SymbolTerm> out;
    const int d = h.dim;
    for (const auto& tm : h.terms) {
        if (tm.y.constant || tm.eta.constant) continue;
        // |alpha| = 1: (1/2) D_y^alpha d_eta^alpha, D = -i d
        for (int j = 0; j < d; ++j) {
            MultiIndex a{0, 0, 0};
            a[j] = 1;
            out.push_back(SymbolTerm{tm.coef * cplx(0.0, -0.5), derived_factor(tm.y, a), derived_factor(tm.eta, a)});
        }
        // |alpha| = 2: (1/2!) (1/4) (-i)^2 = -1/8
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                MultiIndex a{0, 0, 0};
                a[i] += 1;
                a[j] += 1;
                out.push_back(SymbolTerm{tm.coef * (-0.125), derived_factor(tm.y, a), derived_factor(tm.eta, a)});
            }
        }
    }
    return generic_symbol(std::move(out), d, "kn-correction");
}

}  // namespace magpack
