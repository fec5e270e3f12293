#include <doctest.h>

#include <random>

#include "magpack/quantize.hpp"
#include "magpack/refsolve.hpp"

using namespace magpack;

namespace {

GridFunction plane_wave(const SpatialGrid& g, int m0, int m1) {
    const double k0 = kPi * m0 / g.L, k1 = kPi * m1 / g.L;
    return sample(g, [&](const Point& y) { return std::polar(1.0, k0 * y[0] + k1 * y[1]); });
}

cplx symbol_value(const SymbolH& h, const Point& y, const Point& eta) {
    cplx s{};
    for (const auto& t : h.as_terms()) s += t.coef * t.y.f(0.0, y) * t.eta.f(0.0, eta);
    return s;
}

}  // namespace

TEST_CASE("free momentum and Laplacian on plane waves") {
    const SpatialGrid g(2, 4.0, 64);
    const GaugeData zero = make_gauge(zero_field());
    const GridFunction u = plane_wave(g, 3, -2);
    const GridFunction p0 = covariant_derivative(zero, 0.0, 0, u);
    CHECK(max_abs_diff(p0, cplx(kPi * 3 / g.L) * u) < 1e-10);
    const double k2 = std::pow(kPi / g.L, 2) * (9 + 4);
    CHECK(max_abs_diff(apply_op(zero, kinetic_symbol(zero_potential()), 0.0, u), cplx(k2) * u) < 1e-9);
}

TEST_CASE("covariant momentum is symmetric") {
    const SpatialGrid g(2, 6.0, 96);
    const GaugeData gb = make_gauge(bump_field(1.0, 0.5, 1.0, Point{1.0, 0.0, 0.0}));
    const GridFunction u = gaussian_state(g, GaussianState{Point{0.3, 0.1, 0.0}, Point{0.5, -1.0, 0.0}, 0.8});
    for (int j = 0; j < 2; ++j) CHECK(std::abs(inner(u, covariant_derivative(gb, 0.0, j, u)).imag()) < 1e-8);
}

TEST_CASE("lowest Landau level") {
    const double b = 1.0;
    const SpatialGrid g(2, 8.0, 128);
    const GaugeData gc = make_gauge(constant_field(b));
    const GridFunction u = sample(g, [&](const Point& y) { return cplx(std::exp(-b * dot(y, y, 2) / 4.0)); });
    const GridFunction hu = apply_op(gc, kinetic_symbol(zero_potential()), 0.0, u);
    CHECK(relative_l2(hu, cplx(b) * u) < 1e-4);
}

TEST_CASE("gauge covariance and symmetry of Op") {
    const SpatialGrid g(2, 6.0, 96);
    const GaugeData gb = make_gauge(bump_field(1.0, 0.5, 1.0, Point{1.0, 0.0, 0.0}));
    const GaugeShift sh{[](const double* y) { return 0.5 * y[0] + 0.2 * y[0] * y[1]; },
                        [](const double* y, double* d) { d[0] = 0.5 + 0.2 * y[1], d[1] = 0.2 * y[0]; }};
    const SymbolH h = kinetic_symbol(harmonic_potential(1.0));
    const GridFunction u = gaussian_state(g, GaussianState{Point{0.3, 0.1, 0.0}, Point{0.5, -1.0, 0.0}, 0.7});
    GridFunction eu = u;
    for (std::size_t k = 0; k < u.values.size(); ++k) eu[k] *= std::polar(1.0, sh.v(u.point(k).data()));
    GridFunction lhs = apply_op(with_shift(gb, sh), h, 0.0, eu);
    GridFunction rhs = apply_op(gb, h, 0.0, u);
    for (std::size_t k = 0; k < u.values.size(); ++k) rhs[k] *= std::polar(1.0, sh.v(u.point(k).data()));
    CHECK(max_abs_diff(lhs, rhs) / rhs.norm() < 1e-8);

    const GridFunction w = gaussian_state(g, GaussianState{Point{-0.4, 0.5, 0.0}, Point{1.0, 0.0, 0.0}, 0.9});
    const cplx a = inner(u, apply_op(gb, h, 0.0, w)), c = inner(apply_op(gb, h, 0.0, u), w);
    CHECK(std::abs(a - c) < 1e-6 * std::abs(a));
}

TEST_CASE("direct oscillatory integral") {
    const SpatialGrid g(2, 4.0, 32);
    const GaugeData gc = make_gauge(constant_field(1.0));
    const GridFunction u = gaussian_state(g, GaussianState{Point{0.2, -0.1, 0.0}, Point{0.5, 0.3, 0.0}, 0.8});
    const SymbolH one = generic_symbol({SymbolTerm{cplx(1.0), one_factor(), one_factor()}});
    CHECK(relative_l2(apply_op_direct(gc, one, 0.0, u), u) < 1e-6);
    for (int j = 0; j < 2; ++j) {
        MultiIndex e{};
        e[j] = 1;
        const SymbolH eta = generic_symbol({SymbolTerm{cplx(1.0), one_factor(), monomial_factor(e)}});
        CHECK(relative_l2(apply_op_direct(gc, eta, 0.0, u, 0, Quantization::kohn_nirenberg),
                          covariant_derivative(gc, 0.0, j, u)) < 1e-4);
    }
    CHECK_THROWS_AS(apply_op_direct(gc, one, 0.0, GridFunction(SpatialGrid(2, 4.0, 128))), CapabilityError);
}

TEST_CASE("Kohn-Nirenberg correction") {
    const Point y{0.3, -0.4, 0.0}, eta{1.2, 0.7, 0.0};
    const SymbolH h = kinetic_symbol(harmonic_potential(1.0));
    CHECK(std::abs(symbol_value(kn_correction(h), y, eta)) < 1e-14);

    MultiIndex e1{1, 0, 0};
    const SymbolH ye = generic_symbol({SymbolTerm{cplx(1.0), monomial_factor(e1), monomial_factor(e1)}});
    const cplx r = symbol_value(kn_correction(ye), y, eta);
    CHECK(std::abs(r - cplx(0.0, -0.5)) < 1e-12);

    MultiIndex e2{0, 2, 0};
    const SymbolH only_eta = generic_symbol({SymbolTerm{cplx(1.0), one_factor(), monomial_factor(e2)}});
    CHECK(std::abs(symbol_value(kn_correction(only_eta), y, eta)) < 1e-14);
}
