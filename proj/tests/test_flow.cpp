#include <doctest.h>

#include <random>

#include "magpack/flow.hpp"

using namespace magpack;

namespace {

FlowIntegrator integrator(FieldPtr f, Potential V, double dt = 1e-3) {
    FlowIntegrator in;
    in.gauge = make_gauge(std::move(f));
    in.symbol = kinetic_symbol(std::move(V));
    in.dt = dt;
    return in;
}

}  // namespace

TEST_CASE("free streaming") {
    const FlowIntegrator in = integrator(zero_field(), zero_potential());
    const Point xi{0.3, -1.2, 0.0};
    const FlowRhs r = flow_rhs(in.gauge, in.symbol, 0.0, Point{1.0, 1.0, 0.0}, xi);
    CHECK(r.dx[0] == doctest::Approx(2 * xi[0]));
    CHECK(r.dx[1] == doctest::Approx(2 * xi[1]));
    CHECK(r.dxi[0] == 0.0);
    CHECK(r.dxi[1] == 0.0);
}

TEST_CASE("Lorentz term for a constant field") {
    const double b = 0.7;
    const FlowIntegrator in = integrator(constant_field(b), zero_potential());
    const Point x{0.2, 0.1, 0.0}, xi{0.4, -0.9, 0.0};
    // the printed momentum equation: xi' = (-2 b xi_2, 2 b xi_1)
    const FlowRhs p = flow_rhs(in.gauge, in.symbol, 0.0, x, xi, false, FlowSigns::paper);
    CHECK(p.dxi[0] == doctest::Approx(-2 * b * xi[1]));
    CHECK(p.dxi[1] == doctest::Approx(2 * b * xi[0]));
    // the sign consistent with the transversal gauge rotates the other way
    const FlowRhs c = flow_rhs(in.gauge, in.symbol, 0.0, x, xi);
    CHECK(c.dxi[0] == doctest::Approx(2 * b * xi[1]));
    CHECK(c.dxi[1] == doctest::Approx(-2 * b * xi[0]));
}

TEST_CASE("the flow vector field is divergence free") {
    const FlowIntegrator in = integrator(bump_field(1.0, 0.5, 1.0, Point{1.0, 0.0, 0.0}), harmonic_potential(1.5));
    std::mt19937 r(11);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Point x{U(r), U(r), 0.0}, xi{U(r), U(r), 0.0};
        double div = 0.0;
        for (int j = 0; j < 2; ++j) {
            Point xp = x, xm = x, kp = xi, km = xi;
            xp[j] += h, xm[j] -= h, kp[j] += h, km[j] -= h;
            div += (flow_rhs(in.gauge, in.symbol, 0.0, xp, xi).dx[j] - flow_rhs(in.gauge, in.symbol, 0.0, xm, xi).dx[j]) / (2 * h);
            div += (flow_rhs(in.gauge, in.symbol, 0.0, x, kp).dxi[j] - flow_rhs(in.gauge, in.symbol, 0.0, x, km).dxi[j]) / (2 * h);
        }
        worst = std::max(worst, std::abs(div));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("harmonic energy is conserved") {
    const FlowIntegrator in = integrator(zero_field(), harmonic_potential(2.0));
    FlowState s;
    s.x = Point{1.0, -0.5, 0.0};
    s.xi = Point{0.3, 0.8, 0.0};
    const double e0 = in.symbol.eval(0.0, s.x, s.xi);
    std::vector<double> times;
    for (int k = 0; k <= 100; ++k) times.push_back(0.1 * k);
    double worst = 0.0;
    for (const auto& st : advance_path(in, s, times)) worst = std::max(worst, std::abs(in.symbol.eval(st.t, st.x, st.xi) - e0));
    CHECK(worst < 1e-6);
}

TEST_CASE("multiplier closed form") {
    const double b = 1.1;
    const GaugeData g = make_gauge(constant_field(b));
    const SymbolH h = kinetic_symbol(harmonic_potential(1.0));
    const Point x{0.4, -0.7, 0.0}, xi{1.5, 0.2, 0.0};
    const Point A = vector_potential(g, 0.0, x);
    const double V = h.potential.V(0.0, x);
    const double expect = -dot(xi, xi, 2) + V - 2.0 * dot(xi, A, 2);
    CHECK(multiplier_m(g, h, 0.0, x, xi) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("volume preservation") {
    const FlowIntegrator in = integrator(constant_field(1.0), zero_potential());
    const Point x{0.2, 0.3, 0.0}, xi{1.0, -0.4, 0.0};
    CHECK(jacobian_determinant(in, x, xi, 0.5, 0.5) == 1.0);
    CHECK(std::abs(jacobian_determinant(in, x, xi, 0.0, 1.0) - 1.0) < 1e-5);
}

TEST_CASE("time average of a resting particle vanishes") {
    const FlowIntegrator in = integrator(zero_field(), zero_potential());
    const auto st = time_average_check(in, {PhasePoint{Point{1.0, 2.0, 0.0}, Point{}}}, 0.0, 5.0, 0.5);
    CHECK(st.max_ratio == 0.0);
    CHECK_THROWS(time_average_check(in, {PhasePoint{}}, 0.0, 5.0, 0.0));
}

TEST_CASE("Gronwall sandwich") {
    const FlowIntegrator in = integrator(bump_field(1.0, 0.5, 1.0, Point{1.0, 0.0, 0.0}), harmonic_potential(1.0));
    const double C = gronwall_constant(in.gauge, in.symbol);
    REQUIRE(C > 0.0);
    std::mt19937 r(12);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    const double T = 1.0, bound = 2.0 * std::exp(2.0 * T * C);
    for (int k = 0; k < 20; ++k) {
        FlowState s;
        s.x = Point{U(r), U(r), 0.0};
        s.xi = Point{U(r), U(r), 0.0};
        const FlowState e = advance(in, s, T);
        const double a = 1.0 + norm(s.x, 2) + norm(s.xi, 2), b = 1.0 + norm(e.x, 2) + norm(e.xi, 2);
        CHECK(b <= bound * a);
        CHECK(a <= bound * b);
    }
}
