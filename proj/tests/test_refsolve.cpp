#include <doctest.h>

#include "magpack/refsolve.hpp"

using namespace magpack;

namespace {

EvolveOptions plain() {
    EvolveOptions o;
    o.absorb = false;
    return o;
}

}  // namespace

TEST_CASE("closed-form Gaussians") {
    const SpatialGrid g(2, 8.0, 128);
    const GaussianState s{Point{0.5, -0.5, 0.0}, Point{1.0, 0.0, 0.0}, 0.8};
    const GridFunction u0 = gaussian_state(g, s);
    CHECK(u0.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(max_abs_diff(exact_solution(ExactKind::free, {}, s, 0.0, g), u0) < 1e-14);

    // ground coherent state of omega = 2: modulus invariant
    ExactParams hp;
    hp.omega = 2.0;
    const GaussianState gs{Point{}, Point{}, 1.0};
    const GridFunction a = exact_solution(ExactKind::harmonic, hp, gs, 0.0, g), b = exact_solution(ExactKind::harmonic, hp, gs, 0.7, g);
    double dm = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) dm = std::max(dm, std::abs(std::abs(a[k]) - std::abs(b[k])));
    CHECK(dm < 1e-12);

    // free spreading: width sqrt(1 + 4 t^2) for w = 1
    const GaussianState w1{Point{}, Point{}, 1.0};
    const double t = 0.6;
    const GridFunction ut = exact_solution(ExactKind::free, {}, w1, t, g);
    double m2 = 0.0;
    for (std::size_t k = 0; k < ut.values.size(); ++k) m2 += std::norm(ut[k]) * std::pow(ut.point(k)[0], 2) * g.cell_volume();
    CHECK(std::sqrt(2.0 * m2) == doctest::Approx(std::sqrt(1.0 + 4.0 * t * t)).epsilon(1e-8));
    CHECK(relative_l2(free_evolve_fft(u0, 0.3), exact_solution(ExactKind::free, {}, s, 0.3, g)) < 1e-8);
}

TEST_CASE("Crank-Nicolson against the free evolution and unitarity") {
    const SpatialGrid g(2, 6.0, 256);
    const GaussianState s{Point{0.0, 0.0, 0.0}, Point{1.0, 0.0, 0.0}, 1.0};
    const GridFunction u0 = gaussian_state(g, s);
    const GaugeData zero = make_gauge(zero_field());
    const SymbolH h = kinetic_symbol(zero_potential());
    const auto out = evolve(zero, h, u0, {0.0, 0.1}, 1e-3, plain());
    CHECK(max_abs_diff(out[0], u0) == 0.0);
    const double e = relative_l2(out[1], free_evolve_fft(u0, 0.1));
    MESSAGE("free CN error at t=0.1: " << e);
    CHECK(e < 1e-5 * 0.1);

    const GaugeData gb = make_gauge(bump_field(1.0, 0.5, 1.0, Point{1.0, 0.0, 0.0}));
    const GridFunction u1 = crank_nicolson_step(gb, kinetic_symbol(harmonic_potential(1.0)), 0.0, 1e-3, u0);
    CHECK(std::abs(u1.norm() - u0.norm()) < 1e-10);
}

TEST_CASE("discrete gauge covariance of the lattice Hamiltonian") {
    const SpatialGrid g(2, 6.0, 96);
    const GaugeData gb = make_gauge(bump_field(1.0, 0.5, 1.0, Point{1.0, 0.0, 0.0}));
    const GaugeShift sh{[](const double* y) { return 0.5 * y[0] + 0.2 * y[0] * y[1]; },
                        [](const double* y, double* d) { d[0] = 0.5 + 0.2 * y[1], d[1] = 0.2 * y[0]; }};
    const SymbolH h = kinetic_symbol(harmonic_potential(1.0));
    const GridFunction u = gaussian_state(g, GaussianState{Point{0.3, 0.1, 0.0}, Point{0.5, -1.0, 0.0}, 0.7});
    GridFunction eu = u;
    for (std::size_t k = 0; k < u.values.size(); ++k) eu[k] *= std::polar(1.0, sh.v(u.point(k).data()));
    GridFunction lhs = apply_lattice_hamiltonian(with_shift(gb, sh), h, 0.0, eu);
    GridFunction rhs = apply_lattice_hamiltonian(gb, h, 0.0, u);
    for (std::size_t k = 0; k < u.values.size(); ++k) rhs[k] *= std::polar(1.0, sh.v(u.point(k).data()));
    CHECK(max_abs_diff(lhs, rhs) / rhs.norm() < 1e-8);
}

TEST_CASE("harmonic coherent state and the Landau ground state") {
    const SpatialGrid g(2, 8.0, 128);
    ExactParams hp;
    hp.omega = 2.0;
    const GaussianState s{Point{0.5, 0.0, 0.0}, Point{0.0, 0.5, 0.0}, 1.0};
    const auto out = evolve(make_gauge(zero_field()), kinetic_symbol(harmonic_potential(2.0)), gaussian_state(g, s), {0.5}, 1e-3);
    const double e = relative_l2(out[0], exact_solution(ExactKind::harmonic, hp, s, 0.5, g));
    MESSAGE("harmonic CN error at t=0.5: " << e);
    CHECK(e < 1e-4);

    // h = |eta|^2/2 with b = 1: exp(-|y|^2/4) is stationary
    const GridFunction llv = sample(g, [](const Point& y) { return cplx(std::exp(-dot(y, y, 2) / 4.0)); });
    const auto ll = evolve(make_gauge(constant_field(1.0)), kinetic_symbol(zero_potential(), 0.5), llv, {0.5}, 1e-3);
    double dm = 0.0;
    for (std::size_t k = 0; k < llv.values.size(); ++k) dm = std::max(dm, std::abs(std::abs(ll[0][k]) - std::abs(llv[k])));
    CHECK(dm < 1e-5);
}
