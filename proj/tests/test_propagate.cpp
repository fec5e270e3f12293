#include <doctest.h>

#include <random>

#include "magpack/propagate.hpp"
#include "magpack/refsolve.hpp"

using namespace magpack;

namespace {

// Matched harmonic scenario at small scale: omega = 2 lambda^2.
struct Small {
    double lambda = 2.0, omega = 8.0;
    SpatialGrid grid{2, 12.0, 144};
    GaussianState s0{Point{0.5, 0.0, 0.0}, Point{0.0, 2.0, 0.0}, 0.5};
    FlowIntegrator in;
    WavepacketFrame frame;
    GridFunction u0;

    explicit Small(FieldPtr f = zero_field(), Potential V = {}) {
        in.gauge = make_gauge(std::move(f));
        in.symbol = kinetic_symbol(V.V ? V : harmonic_potential(omega));
        in.dt = 1e-3;
        FrameOptions fo;
        fo.x_center = s0.q;
        fo.x_extent = 5.0 * s0.width + 6.0 / lambda;
        fo.xi_extent = 2.0 + 6.0 * lambda;
        frame = make_frame(in.gauge, lambda, grid, fo);
        calibrate(frame, 0.0);
        u0 = gaussian_state(grid, s0);
    }
    GridFunction exact(double t) const {
        ExactParams p;
        p.omega = omega;
        return exact_solution(ExactKind::harmonic, p, s0, t, grid);
    }
};

}  // namespace

TEST_CASE("plan basics") {
    Small sm;
    const ParametrixPlan plan = build_plan(sm.frame, sm.in, sm.u0, 0.1, 4, 1e-4);
    CHECK(plan.retained() > 0);
    CHECK(plan.retained() <= sm.frame.size());
    CHECK(relative_l2(apply_parametrix(plan, 0.0).u, sm.u0) < 1e-3);
    CHECK(apply_K(plan, 0.1, 0.0, GridFunction(sm.grid)).norm() == 0.0);
    CHECK_THROWS_AS(apply_parametrix(plan, 0.033), DomainError);
}

TEST_CASE("free trajectories are straight lines") {
    Small sm(zero_field(), zero_potential());
    const ParametrixPlan plan = build_plan(sm.frame, sm.in, sm.u0, 0.1, 2, 1e-4);
    double worst = 0.0;
    for (const auto& path : plan.paths) {
        const FlowState& a = path.front();
        for (const auto& st : path)
            for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(st.x[j] - a.x[j] - 2.0 * st.t * a.xi[j]));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("remainder multipliers") {
    const SpatialGrid grid(2, 5.0, 64);
    const SymbolH h = kinetic_symbol(harmonic_potential(1.0));
    FlowState node;
    node.x = Point{0.5, -0.3, 0.0};
    node.xi = Point{1.0, 2.0, 0.0};
    const GaugeData con = make_gauge(constant_field(1.3));
    const GridFunction r1 = residual_R1(con, h, 0.0, node, grid, 2.0);
    double m = 0.0;
    for (const auto& v : r1.values) m = std::max(m, std::abs(v));
    CHECK(m < 1e-12);
    CHECK(residual_R1(make_gauge(zero_field()), h, 0.0, node, grid, 2.0).norm() == 0.0);

    bool active = true;
    CHECK(residual_R3(make_gauge(bump_field(1.0, 0.5, 1.0, Point{})), 0.0, node, grid, 2.0, &active).norm() == 0.0);
    CHECK_FALSE(active);

    // uniform modulated field: dA/dt is linear and skew, the quadratic form vanishes
    const GaugeData tm = make_gauge(timemod_field(1.0, 1.0));
    std::mt19937 r(13);
    std::uniform_real_distribution<double> U(-4.0, 4.0);
    for (int k = 0; k < 100; ++k) CHECK(std::abs(residual_R3_at(tm, 0.3, Point{U(r), U(r), 0.0}, Point{U(r), U(r), 0.0})) < 1e-10);

    const FieldPtr tb = timemod_bump_field(1.0, 1.0, 0.5, 1.0, Point{1.0, 0.0, 0.0}, 2.0);
    const GaugeData gtb = make_gauge(tb);
    double worst = 0.0, seen = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Point y{U(r), U(r), 0.0}, x{U(r), U(r), 0.0};
        const double v = std::abs(residual_R3_at(gtb, 0.5, y, x));
        const double z = japanese(sub(y, x), 2);
        worst = std::max(worst, v / (z * z));
        seen = std::max(seen, v);
    }
    CHECK(seen > 0.0);
    CHECK(worst <= tb->bound_CB);
}

TEST_CASE("R2 is not growing with the frequency") {
    const SpatialGrid grid(2, 6.0, 128);
    const GaugeData g = make_gauge(constant_field(1.0));
    const SymbolH h = kinetic_symbol(harmonic_potential(1.0));
    FrameOptions fo;
    fo.x_extent = 0.5;
    fo.xi_extent = 2.0;
    const WavepacketFrame f = make_frame(g, 2.0, grid, fo);
    double lo = INFINITY, hi = 0.0;
    for (double k : {0.0, 5.0, 10.0, 20.0}) {
        FlowState node;
        node.x = Point{0.3, 0.0, 0.0};
        node.xi = Point{k * 0.6, k * 0.8, 0.0};
        const GridFunction gp = wavepacket_eval(f, 0.0, node.x, node.xi, grid);
        const double r = residual_R2(g, h, 0.0, node, gp).norm() / gp.norm();
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi / lo < 1.1);
}

TEST_CASE("free-case R2 is the spreading of the frozen Gaussian") {
    const SpatialGrid grid(2, 6.0, 128);
    const GaugeData g = make_gauge(zero_field());
    const double lam = 2.0;
    FrameOptions fo;
    fo.x_extent = 0.5;
    fo.xi_extent = 2.0;
    const WavepacketFrame f = make_frame(g, lam, grid, fo);
    FlowState node;
    node.x = Point{0.3, -0.2, 0.0};
    node.xi = Point{1.0, 2.0, 0.0};
    const GridFunction gp = wavepacket_eval(f, 0.0, node.x, node.xi, grid);
    const GridFunction r2 = residual_R2(g, kinetic_symbol(zero_potential()), 0.0, node, gp);
    // (P - xi)^2 g = lambda^2 (d - lambda^2 |y - x|^2) g
    GridFunction expect = gp;
    for (std::size_t k = 0; k < expect.values.size(); ++k) {
        const Point z = sub(expect.point(k), node.x);
        expect[k] *= lam * lam * (2.0 - lam * lam * dot(z, z, 2));
    }
    CHECK(relative_l2(r2, expect) < 1e-8);
    CHECK(r2.norm() > 1.0 * gp.norm());
}

TEST_CASE("flat approximation") {
    const SpatialGrid grid(2, 6.0, 96);
    const FlatReport fr = verify_flat_approximation(make_gauge(zero_field()), kinetic_symbol(zero_potential()), 0.0,
                                                    Point{0.5, 0.0, 0.0}, Point{1.0, -1.0, 0.0}, 2.0, grid);
    CHECK(fr.residual <= 1e-3);
    const FlatReport fc = verify_flat_approximation(make_gauge(constant_field(1.0)), kinetic_symbol(harmonic_potential(1.0)),
                                                    0.0, Point{1.0, 0.0, 0.0}, Point{0.0, 2.0, 0.0}, 2.0, grid);
    CHECK(fc.residual <= 5e-3);
}

TEST_CASE("parametrix, group property and Volterra correction") {
    Small sm;
    const double T = 0.2;
    const ParametrixPlan plan = build_plan(sm.frame, sm.in, sm.u0, T, 8, 1e-4);
    const double ep = relative_l2(apply_parametrix(plan, T).u, sm.exact(T));
    MESSAGE("parametrix error " << ep);
    for (double t : {0.1, T}) {
        const double m = apply_parametrix(plan, t).mass_ratio;
        CHECK(m <= 2.0);
        CHECK(m >= 0.5);
    }
    const GridFunction mid = apply_parametrix(plan, 0.1).u;
    const double group = relative_l2(apply_parametrix(plan, T, 0.1, mid), apply_parametrix(plan, T).u);
    CHECK(group <= 5.0 * ep);

    VolterraOptions vo;
    vo.n_t = 8;
    vo.tol = 1e-8;
    vo.max_iter = 100;
    const VolterraSolution sol = solve_volterra(plan, vo);
    CHECK(sol.converged);
    CHECK(relative_l2(apply_propagator(plan, sol, 0.0).u, sm.u0) < 1e-3);
    const double ec = relative_l2(apply_propagator(plan, sol, T).u, sm.exact(T));
    MESSAGE("corrected error " << ec);
    CHECK(ec < ep);
    CHECK(ec < 0.02);

    vo.n_t = 3;
    CHECK_THROWS_AS(solve_volterra(plan, vo), ConfigError);
}
