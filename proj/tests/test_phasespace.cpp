#include <doctest.h>

#include "magpack/phasespace.hpp"
#include "magpack/refsolve.hpp"

using namespace magpack;

namespace {

WavepacketFrame frame_for(const GaugeData& g, const SpatialGrid& grid, double lambda, double xe, double ke,
                          Point kc = {}) {
    FrameOptions fo;
    fo.x_extent = xe;
    fo.xi_extent = ke;
    fo.xi_center = kc;
    WavepacketFrame f = make_frame(g, lambda, grid, fo);
    calibrate(f, 0.0);
    return f;
}

const GaussianState kState{Point{0.3, -0.2, 0.0}, Point{1.0, 0.5, 0.0}, 0.7};

}  // namespace

TEST_CASE("window normalization and moduli") {
    const SpatialGrid grid(2, 10.0, 128);
    FrameOptions fo;
    fo.x_extent = 1.0;
    fo.xi_extent = 2.0;
    const GaugeData zero = make_gauge(zero_field()), con = make_gauge(constant_field(1.0));
    const WavepacketFrame f1 = make_frame(zero, 1.0, grid, fo);
    const GridFunction g = wavepacket_eval(f1, 0.0, Point{}, Point{}, grid);
    CHECK(std::abs(g.norm() * g.norm() - 1.0 / (4.0 * kPi * kPi)) < 1e-8);

    const WavepacketFrame fc = make_frame(con, 1.0, grid, fo);
    const GridFunction h = wavepacket_eval(fc, 0.0, Point{}, Point{1.0, -2.0, 0.0}, grid);
    double dm = 0.0;
    for (std::size_t k = 0; k < g.values.size(); ++k) dm = std::max(dm, std::abs(std::abs(g[k]) - std::abs(h[k])));
    CHECK(dm < 1e-14);

    for (double lam : {2.0, 4.0}) {
        const WavepacketFrame fl = make_frame(con, lam, grid, fo);
        const GridFunction gl = wavepacket_eval(fl, 0.0, Point{0.5, 0.0, 0.0}, Point{0.0, 3.0, 0.0}, grid);
        CHECK(gl.norm() == doctest::Approx(g.norm()).epsilon(1e-8));
    }
}

TEST_CASE("ambiguity function of the window") {
    const SpatialGrid grid(2, 12.0, 128);
    const GaugeData zero = make_gauge(zero_field());
    FrameOptions fo;
    fo.x_extent = 3.0;
    fo.xi_extent = 3.0;
    const WavepacketFrame f = make_frame(zero, 1.0, grid, fo);
    const GridFunction g = wavepacket_eval(f, 0.0, Point{}, Point{}, grid);
    const auto c = analyze(f, 0.0, g);
    double worst = 0.0;
    for (std::size_t a = 0; a < f.x_count(); a += 5)
        for (std::size_t b = 0; b < f.xi_count(); b += 7) {
            const Point x = f.x_node(a), xi = f.xi_node(b);
            const double r2 = x[0] * x[0] + x[1] * x[1] + xi[0] * xi[0] + xi[1] * xi[1];
            worst = std::max(worst, std::abs(std::abs(c.at(a, b)) - std::exp(-r2 / 4.0) / (4.0 * kPi * kPi)));
        }
    CHECK(worst < 1e-6);
    const auto z = analyze(f, 0.0, GridFunction(grid));
    CHECK(z.max_abs() == 0.0);
}

TEST_CASE("isometry, inversion and modulation norms under a constant field") {
    // per-lambda boxes: x reach 5w + 6/lambda plus the stamp, xi reach 5/w + 6 lambda below Nyquist
    const SpatialGrid grid(2, 12.0, 192);
    const GaugeData g = make_gauge(constant_field(1.0));
    const GridFunction u = gaussian_state(grid, kState);
    const WavepacketFrame f = frame_for(g, grid, 2.0, 3.5 + 3.0, 7.2 + 12.0, kState.p);
    const auto c = analyze(f, 0.0, u);
    CHECK(std::abs(modulation_norm(c, 0.0, 2.0) - u.norm()) / u.norm() < 1e-4);
    CHECK(relative_l2(synthesize(f, 0.0, c, grid), u) < 1e-3);
    CHECK(synthesize(f, 0.0, analyze(f, 0.0, GridFunction(grid)), grid).norm() == 0.0);
    CHECK(modulation_norm(f, 0.0, GridFunction(grid), 2.0, 1.0) == 0.0);
    CHECK_THROWS_AS(modulation_norm(c, 0.0, 0.5), DomainError);

    const SpatialGrid grid1(2, 19.0, 192);
    const GridFunction u1 = gaussian_state(grid1, kState);
    const WavepacketFrame f1 = frame_for(g, grid1, 1.0, 3.5 + 6.0, 7.2 + 6.0, kState.p);
    const auto c1 = analyze(f1, 0.0, u1);
    for (double p : {1.0, 2.0, double(INFINITY)}) {
        const double r = modulation_norm(c1, 0.0, p) / modulation_norm(c, 0.0, p);
        MESSAGE("lambda 1/2 norm ratio p=" << p << ": " << r);
        CHECK(r <= 10.0);
        CHECK(r >= 0.1);
    }
}

TEST_CASE("matrix elements of the identity decay off the diagonal") {
    const SpatialGrid grid(2, 8.0, 128);
    const GaugeData g = make_gauge(constant_field(1.0));
    FrameOptions fo;
    fo.x_extent = 1.0;
    fo.xi_extent = 2.0;
    const WavepacketFrame f = make_frame(g, 2.0, grid, fo);
    const GridOperator id = [](const GridFunction& u) { return u; };
    const Point x{}, xi{1.0, 0.0, 0.0};
    const double d = std::abs(matrix_element(f, 0.0, id, x, xi, x, xi, grid));
    CHECK(d > 0.0);
    // least-squares exponent of log |G| against log <lambda (z - x)>, steps 2..6
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (double s = 2.0; s <= 6.0; s += 0.5) {
        const double v = std::abs(matrix_element(f, 0.0, id, Point{s / f.lambda, 0.0, 0.0}, xi, x, xi, grid));
        const double a = std::log(std::sqrt(1.0 + s * s)), b = std::log(v / d);
        sx += a, sy += b, sxx += a * a, sxy += a * b, n += 1;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    MESSAGE("fitted exponent " << slope);
    CHECK(slope < -4.0);
}

TEST_CASE("frame guards") {
    const SpatialGrid grid(2, 4.0, 64);
    const GaugeData g = make_gauge(constant_field(1.0));
    FrameOptions fo;
    fo.x_extent = 1.0;
    fo.xi_extent = 4.0;
    CHECK_THROWS_AS(make_frame(g, 0.5, grid, fo), ConfigError);
    fo.xi_extent = 60.0;
    CHECK_THROWS_AS(make_frame(g, 2.0, grid, fo), ConfigError);
    fo.xi_extent = 4.0;
    fo.x_extent = 3.5;
    CHECK_THROWS_AS(make_frame(g, 2.0, grid, fo), ConfigError);
}
