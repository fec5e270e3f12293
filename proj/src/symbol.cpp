#include "magpack/symbol.hpp"

#include <random>

namespace magpack {

namespace {

int order(const MultiIndex& a) { return a[0] + a[1] + a[2]; }

MultiIndex unit(int j) {
    MultiIndex a{0, 0, 0};
    a[j] = 1;
    return a;
}

MultiIndex pair_index(int i, int j) {
    MultiIndex a{0, 0, 0};
    a[i] += 1;
    a[j] += 1;
    return a;
}

double factor_deriv(const Factor& f, double t, const Point& v, const MultiIndex& a) {
    if (order(a) == 0) return f.f(t, v);
    if (f.constant) return 0.0;
    if (!f.deriv) throw CapabilityError("symbol: factor has no derivative callback");
    return f.deriv(t, v, a);
}

}  // namespace

Potential zero_potential(int dim) {
    Potential p;
    p.kind = PotentialKind::zero;
    p.name = "zero";
    p.V = [](double, const Point&) { return 0.0; };
    p.grad = [](double, const Point&) { return Point{}; };
    p.hess = [dim](double, const Point&) { return Eigen::MatrixXd::Zero(dim, dim).eval(); };
    p.quadratic = true;
    return p;
}

Potential harmonic_potential(double omega, int dim) {
    Potential p;
    p.kind = PotentialKind::harmonic;
    p.name = "harmonic";
    p.omega = omega;
    const double c = 0.25 * omega * omega;
    p.V = [c, dim](double, const Point& y) { return c * dot(y, y, dim); };
    p.grad = [c](double, const Point& y) { return scale(y, 2.0 * c); };
    p.hess = [c, dim](double, const Point&) {
        return (2.0 * c * Eigen::MatrixXd::Identity(dim, dim)).eval();
    };
    p.hess_bound = 2.0 * c;
    p.quadratic = true;
    return p;
}

Potential anharmonic_potential(double omega, double alpha, int dim) {
    Potential p;
    p.kind = PotentialKind::anharmonic;
    p.name = "anharmonic";
    p.omega = omega;
    p.alpha = alpha;
    const double c = 0.25 * omega * omega;
    p.V = [c, alpha, dim](double, const Point& y) {
        double s = c * dot(y, y, dim);
        for (int j = 0; j < dim; ++j) s += alpha * (std::sqrt(1.0 + y[j] * y[j]) - 1.0);
        return s;
    };
    p.grad = [c, alpha, dim](double, const Point& y) {
        Point g{};
        for (int j = 0; j < dim; ++j) g[j] = 2.0 * c * y[j] + alpha * y[j] / std::sqrt(1.0 + y[j] * y[j]);
        return g;
    };
    p.hess = [c, alpha, dim](double, const Point& y) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for (int j = 0; j < dim; ++j) h(j, j) = 2.0 * c + alpha * std::pow(1.0 + y[j] * y[j], -1.5);
        return h;
    };
    p.hess_bound = 2.0 * c + std::abs(alpha);
    return p;
}

Factor one_factor() {
    Factor f;
    f.f = [](double, const Point&) { return 1.0; };
    f.deriv = [](double, const Point&, const MultiIndex&) { return 0.0; };
    f.constant = true;
    return f;
}

Factor monomial_factor(const MultiIndex& power) {
    Factor f;
    f.f = [power](double, const Point& v) {
        double s = 1.0;
        for (int j = 0; j < kMaxDim; ++j)
            for (int k = 0; k < power[j]; ++k) s *= v[j];
        return s;
    };
    f.deriv = [power](double, const Point& v, const MultiIndex& a) {
        double s = 1.0;
        for (int j = 0; j < kMaxDim; ++j) {
            if (a[j] > power[j]) return 0.0;
            for (int k = 0; k < a[j]; ++k) s *= power[j] - k;
            for (int k = 0; k < power[j] - a[j]; ++k) s *= v[j];
        }
        return s;
    };
    f.constant = order(power) == 0;
    return f;
}

Factor potential_factor(const Potential& V) {
    Factor f;
    f.f = V.V;
    f.deriv = [V](double t, const Point& y, const MultiIndex& a) {
        const int o = order(a);
        if (o == 0) return V.V(t, y);
        if (o == 1) {
            const Point g = V.grad(t, y);
            for (int j = 0; j < kMaxDim; ++j)
                if (a[j]) return g[j];
        }
        if (o == 2) {
            const Eigen::MatrixXd h = V.hess(t, y);
            int i = -1, k = -1;
            for (int j = 0; j < kMaxDim; ++j) {
                for (int r = 0; r < a[j]; ++r) (i < 0 ? i : k) = j;
            }
            return h(i, k);
        }
        throw CapabilityError("potential: derivatives above order 2 are not provided");
    };
    f.constant = V.kind == PotentialKind::zero;
    return f;
}

SymbolH kinetic_symbol(Potential V, double kappa, int dim) {
    SymbolH h;
    h.dim = dim;
    h.family = SymbolH::Family::kinetic_potential;
    h.kappa = kappa;
    h.name = (kappa == 1.0 ? std::string("kinetic+") : std::string("half-kinetic+")) + V.name;
    h.C_h = std::max(2.0 * kappa, V.hess_bound);
    h.potential = std::move(V);
    return h;
}

SymbolH generic_symbol(std::vector<SymbolTerm> terms, int dim, std::string name) {
    SymbolH h;
    h.dim = dim;
    h.family = SymbolH::Family::generic;
    h.terms = std::move(terms);
    h.name = std::move(name);
    return h;
}

double SymbolH::eval(double t, const Point& y, const Point& eta) const {
    if (is_kinetic()) return kappa * dot(eta, eta, dim) + potential.V(t, y);
    cplx s{};
    for (const auto& tm : terms) s += tm.coef * tm.y.f(t, y) * tm.eta.f(t, eta);
    return s.real();
}

Point SymbolH::grad_y(double t, const Point& y, const Point& eta) const {
    if (is_kinetic()) return potential.grad(t, y);
    Point g{};
    for (int j = 0; j < dim; ++j) {
        cplx s{};
        for (const auto& tm : terms)
            s += tm.coef * factor_deriv(tm.y, t, y, unit(j)) * tm.eta.f(t, eta);
        g[j] = s.real();
    }
    return g;
}

Point SymbolH::grad_eta(double t, const Point& y, const Point& eta) const {
    if (is_kinetic()) return scale(eta, 2.0 * kappa);
    Point g{};
    for (int j = 0; j < dim; ++j) {
        cplx s{};
        for (const auto& tm : terms)
            s += tm.coef * tm.y.f(t, y) * factor_deriv(tm.eta, t, eta, unit(j));
        g[j] = s.real();
    }
    return g;
}

Eigen::MatrixXd SymbolH::hess(double t, const Point& y, const Point& eta) const {
    const int d = dim;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    if (is_kinetic()) {
        H.topLeftCorner(d, d) = potential.hess(t, y);
        H.bottomRightCorner(d, d) = 2.0 * kappa * Eigen::MatrixXd::Identity(d, d);
        return H;
    }
    for (const auto& tm : terms) {
        const double a = tm.y.f(t, y), b = tm.eta.f(t, eta);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const cplx c = tm.coef;
                H(i, j) += (c * factor_deriv(tm.y, t, y, pair_index(i, j)) * b).real();
                H(d + i, d + j) += (c * a * factor_deriv(tm.eta, t, eta, pair_index(i, j))).real();
                H(i, d + j) +=
                    (c * factor_deriv(tm.y, t, y, unit(i)) * factor_deriv(tm.eta, t, eta, unit(j))).real();
            }
        }
    }
    H.bottomLeftCorner(d, d) = H.topRightCorner(d, d).transpose();
    return H;
}

double SymbolH::time_derivative(double t, const Point& y, const Point&) const {
    if (is_kinetic() && potential.V_dot) return potential.V_dot(t, y);
    return 0.0;
}

std::vector<SymbolTerm> SymbolH::as_terms() const {
    if (!is_kinetic()) return terms;
    std::vector<SymbolTerm> out;
    for (int j = 0; j < dim; ++j) {
        MultiIndex p{0, 0, 0};
        p[j] = 2;
        out.push_back(SymbolTerm{cplx(kappa, 0.0), one_factor(), monomial_factor(p)});
    }
    if (potential.kind != PotentialKind::zero)
        out.push_back(SymbolTerm{cplx(1.0, 0.0), potential_factor(potential), one_factor()});
    return out;
}

double estimate_C_h(const SymbolH& h, double box, int samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-box, box);
    double c = 0.0;
    for (int s = 0; s < samples; ++s) {
        Point y{}, eta{};
        for (int j = 0; j < h.dim; ++j) {
            y[j] = u(rng);
            eta[j] = u(rng);
        }
        c = std::max(c, h.hess(0.0, y, eta).cwiseAbs().maxCoeff());
    }
    return c;
}

}  // namespace magpack
