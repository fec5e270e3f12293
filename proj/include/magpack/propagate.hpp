#pragma once

#include <string>
#include <vector>

#include "magpack/flow.hpp"
#include "magpack/phasespace.hpp"
#include "magpack/symbol.hpp"

namespace magpack {

// A flowed stamp left the synthesis box.
struct BoxExitError : DomainError {
    std::size_t node;
    double t;
    BoxExitError(const std::string& msg, std::size_t node_, double t_)
        : DomainError(msg), node(node_), t(t_) {}
};

struct ParametrixPlan {
    WavepacketFrame frame;
    FlowIntegrator integrator;
    std::vector<double> times;             // n_out + 1 uniform output times on [0, T]
    std::vector<std::size_t> nodes;        // retained lattice indices a * xi_count + b
    std::vector<cplx> coef;                // T^A u0 at the retained nodes
    std::vector<std::vector<FlowState>> paths;  // [retained node][time index]
    std::vector<cplx> all_coefficients;    // full T^A u0 before thresholding
    double u0_norm = 0.0;
    double dropped_fraction = 0.0;  // l2 mass of discarded coefficients, relative
    int workers = 1;

    std::size_t retained() const { return nodes.size(); }
    double weight() const { return frame.cell() * frame.calibration; }
    // index of t in times (tolerance 1e-9), throws DomainError otherwise
    std::size_t time_index(double t) const;
    PhaseSpaceCoefficients coefficients() const;
};

// Analyze u0, keep nodes with |c| >= drop_tol * max |c|, flow each retained node.
ParametrixPlan build_plan(const WavepacketFrame& frame, const FlowIntegrator& integrator,
                          const GridFunction& u0, double T, int n_out, double drop_tol = 1e-10,
                          int workers = 1);

struct Propagated {
    GridFunction u;
    double mass_ratio = 0.0;  // |u|_2 / |u0|_2
};

// S~(t, 0) u0.
Propagated apply_parametrix(const ParametrixPlan& plan, double t);
// S~(t, s) w along the plan's trajectories.
GridFunction apply_parametrix(const ParametrixPlan& plan, double t, double s, const GridFunction& w);

// Multiplier d_eta h(x,xi) . (-r_x(A(y,x)) + r_x(A(x,y))) on the stamp support of x.
GridFunction residual_R1(const GaugeData& gauge, const SymbolH& h, double t, const FlowState& node,
                         const SpatialGrid& grid, double stamp_radius);
// R2 g for a wavepacket g centred at the node. Kinetic family by operator composition;
// generic family by the direct oscillatory integral (oracle scale).
GridFunction residual_R2(const GaugeData& gauge, const SymbolH& h, double t, const FlowState& node,
                         const GridFunction& wavepacket);
// z . int_0^1 (dA/dt(x + s z) - dA/dt(x)) ds with z = y - x. active = false for static fields.
GridFunction residual_R3(const GaugeData& gauge, double t, const FlowState& node, const SpatialGrid& grid,
                         double stamp_radius, bool* active = nullptr);
double residual_R3_at(const GaugeData& gauge, double t, const Point& y, const Point& x);

// (R1 + R2 + R3) g^{A,lambda}_{x,xi} on the frame's grid, via the stamp multiplier path
// (closed form for uniform fields). Kinetic family only.
GridFunction remainder_wavepacket(const WavepacketFrame& frame, const SymbolH& h, double t,
                                  const Point& x, const Point& xi);

// K(t, s) w.
GridFunction apply_K(const ParametrixPlan& plan, double t, double s, const GridFunction& w);

struct VolterraOptions {
    int n_t = 32;
    double tol = 1e-6;
    int max_iter = 50;
};

struct VolterraSolution {
    std::vector<double> times;
    std::vector<std::size_t> plan_index;  // times[i] == plan.times[plan_index[i]]
    std::vector<GridFunction> v;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // sup_t |v_new - v_old| / sup_t |v_new|
    std::vector<double> update_ratios;     // residual_history[k+1] / residual_history[k]
    std::vector<double> weighted_history;  // same with the weight e^{-beta t} (divergence guard)
    std::vector<std::vector<cplx>> alpha;  // [time][node] <g_n(t), v(t)>
    std::vector<std::vector<double>> rate;  // [time][node] Re <g_n, R g_n> / |g_n|^2
};

// v(t) = -K(t,0) u0 - i int_0^t K(t,s) v(s) ds by Picard iteration on the plan's time grid
// (n_t must divide the plan's n_out). The time integral is a trapezoid rule fitted per node to
// the phase rate Re <g, R g> / |g|^2 (plain trapezoid when that rate vanishes).
VolterraSolution solve_volterra(const ParametrixPlan& plan, const VolterraOptions& opt);

// S(t) u0 = S~(t,0) u0 + i int_0^t S~(t,s) v(s) ds.
Propagated apply_propagator(const ParametrixPlan& plan, const VolterraSolution& sol, double t);

struct FlatReport {
    double residual = 0.0;  // |Op g - (i H g + m g + R1 g + R2 g)| / |Op g|
    double op_norm = 0.0;
    double m = 0.0;
    double r1_norm = 0.0;
    double r2_norm = 0.0;
};

// Checks Op^A(h) g = (i H~^B + m^A(h) + R1 + R2) g with lattice derivatives by central differences.
FlatReport verify_flat_approximation(const GaugeData& gauge, const SymbolH& h, double t, const Point& x,
                                     const Point& xi, double lambda, const SpatialGrid& grid,
                                     FlowSigns signs = FlowSigns::consistent, double step = 1e-4);

}  // namespace magpack
