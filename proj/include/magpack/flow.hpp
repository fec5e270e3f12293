#pragma once

#include <vector>

#include "magpack/fields.hpp"
#include "magpack/symbol.hpp"

namespace magpack {

struct FlowState {
    Point x{};
    Point xi{};
    double psi = 0.0;
    double t = 0.0;
};

struct FlowBlowUp : BlowUpError {
    FlowState last;
    FlowBlowUp(const std::string& msg, const FlowState& s) : BlowUpError(msg), last(s) {}
};

// Sign of the field terms in the momentum equation. `consistent` matches Op^A built on
// the transversal gauge (Lorentz term B_jk, electric term -dA/dt); `paper` is the literal
// printed form (B_kj, +dA/dt). See README.
enum class FlowSigns { consistent, paper };

struct FlowIntegrator {
    double dt = 1e-3;
    GaugeData gauge;
    SymbolH symbol;
    bool time_dependent = false;  // adds the dA/dt term to the momentum equation, uses A(t) in m^A
    FlowSigns signs = FlowSigns::consistent;
};

struct FlowRhs {
    Point dx{};
    Point dxi{};
};

// x' = d_eta h,  xi'_j = -d_{x_j} h + sum_k B_jk(x) d_{eta_k} h  (- dA_j/dt)
// paper signs: xi'_j = -d_{x_j} h + sum_k B_kj(x) d_{eta_k} h  (+ dA_j/dt)
FlowRhs flow_rhs(const GaugeData& gauge, const SymbolH& h, double t, const Point& x, const Point& xi,
                 bool time_dependent = false, FlowSigns signs = FlowSigns::consistent);

// m^A(h) = h - d_eta h . (xi + A(x))
double multiplier_m(const GaugeData& gauge, const SymbolH& h, double t, const Point& x, const Point& xi);

// RK4 to t_target with psi' = -m^A(h). backward integrates to t_target <= state.t.
FlowState advance(const FlowIntegrator& integ, const FlowState& state, double t_target,
                  bool backward = false);

// States at each of the given increasing times (the first may equal state.t).
std::vector<FlowState> advance_path(const FlowIntegrator& integ, const FlowState& state,
                                    const std::vector<double>& times);

double jacobian_determinant(const FlowIntegrator& integ, const Point& x, const Point& xi, double s,
                            double t, double step = 1e-5);

struct TimeAverageStats {
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    std::vector<double> ratios;
};

struct PhasePoint {
    Point x{};
    Point xi{};
};

// int_I <x^tau>^{-1-eps} |xi^tau| dtau / (1 + |I|) per start, trapezoid on the RK4 grid.
TimeAverageStats time_average_check(const FlowIntegrator& integ, const std::vector<PhasePoint>& samples,
                                    double t0, double t1, double eps, int workers = 1);

// Growth constant C with |Phi_h(t,x,xi)| <= C (1 + |x| + |xi|), from metadata.
double gronwall_constant(const GaugeData& gauge, const SymbolH& h);

}  // namespace magpack
