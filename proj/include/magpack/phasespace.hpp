#pragma once

#include <functional>
#include <string>
#include <vector>

#include "magpack/fields.hpp"
#include "magpack/grid.hpp"

namespace magpack {

struct FrameOptions {
    // Lattice spacings dx = a/lambda, dxi = a*lambda.
    double a = 1.0;
    Point x_center{};
    double x_extent = 4.0;  // half width of the x lattice
    Point xi_center{};
    double xi_extent = 8.0;  // half width of the xi lattice
    double stamp_factor = 8.0;  // stamp radius = stamp_factor / lambda
    double drop_tol = 1e-12;
};

// Discretized T^A_lambda on a uniform (x, xi) lattice, d = 2.
struct WavepacketFrame {
    GaugeData gauge;
    SpatialGrid grid;
    double lambda = 1.0;
    double dx = 1.0, dxi = 1.0;
    int nx = 1, nxi = 1;  // nodes per axis
    Point x0{}, xi0{};    // first node per axis
    double stamp_radius = 8.0;
    double drop_tol = 1e-12;
    double calibration = 1.0;

    int dim() const { return grid.dim; }
    std::size_t x_count() const { return static_cast<std::size_t>(nx) * nx; }
    std::size_t xi_count() const { return static_cast<std::size_t>(nxi) * nxi; }
    std::size_t size() const { return x_count() * xi_count(); }
    Point x_node(std::size_t a) const;
    Point xi_node(std::size_t b) const;
    double cell() const { return std::pow(dx * dxi, dim()); }
};

WavepacketFrame make_frame(const GaugeData& gauge, double lambda, const SpatialGrid& grid,
                           const FrameOptions& opt);

struct PhaseSpaceCoefficients {
    const WavepacketFrame* frame = nullptr;
    std::vector<cplx> values;  // index a * xi_count + b

    cplx& at(std::size_t a, std::size_t b) { return values[a * frame->xi_count() + b]; }
    const cplx& at(std::size_t a, std::size_t b) const { return values[a * frame->xi_count() + b]; }
    double max_abs() const;
};

// Index window of a stamp on the grid, per axis.
struct Patch {
    int lo[2] = {0, 0};
    int len[2] = {0, 0};
};

// Square patch of half width r around x; throws DomainError if it would
// touch the box boundary (no periodic wrap).
Patch patch_for(const SpatialGrid& grid, const Point& x, double r);

// Samples of g^{A,lambda}_{x,xi} on a patch. Rank one (f0 x f1) when the gauge
// is separable, otherwise a full row-major patch p.
struct Stamp {
    Patch patch;
    bool separable = true;
    std::vector<cplx> f0, f1;
    std::vector<cplx> p;
};

Stamp make_stamp(const WavepacketFrame& frame, double t, const Point& x, const Point& xi);
// out += c * stamp
void stamp_acc(const Stamp& s, cplx c, std::vector<cplx>& out, int n);
// sum conj(stamp) * u over the patch (no quadrature weight)
cplx stamp_dot(const Stamp& s, const std::vector<cplx>& u, int n);
// Expanded full patch values (row-major len0 x len1).
std::vector<cplx> stamp_values(const Stamp& s);

GridFunction wavepacket_eval(const WavepacketFrame& frame, double t, const Point& x, const Point& xi,
                             const SpatialGrid& grid);

PhaseSpaceCoefficients analyze(const WavepacketFrame& frame, double t, const GridFunction& u,
                               int workers = 1);
GridFunction synthesize(const WavepacketFrame& frame, double t, const PhaseSpaceCoefficients& c,
                        const SpatialGrid& grid, int workers = 1);

// Least-squares scalar making synthesize(analyze(g_ref)) ~ g_ref; stored in frame.
double calibrate(WavepacketFrame& frame, double t, int workers = 1);

struct Weight {
    double lambda = 1.0;
    double m = 0.0;
    double operator()(const Point& x, const Point& xi, int dim) const;
};

// Weighted l^p norm with measure dx^d dxi^d; p = infinity gives the max.
// p < 1 throws DomainError.
double modulation_norm(const PhaseSpaceCoefficients& c, double m, double p);
double modulation_norm(const WavepacketFrame& frame, double t, const GridFunction& u, double m,
                       double p, int workers = 1);

using GridOperator = std::function<GridFunction(const GridFunction&)>;
cplx matrix_element(const WavepacketFrame& frame, double t, const GridOperator& apply_L,
                    const Point& z, const Point& zeta, const Point& x, const Point& xi,
                    const SpatialGrid& grid);

void write_coefficients(const std::string& path, const PhaseSpaceCoefficients& c, double t);

}  // namespace magpack
