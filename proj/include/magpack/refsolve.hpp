#pragma once

#include <vector>

#include "magpack/fields.hpp"
#include "magpack/grid.hpp"
#include "magpack/symbol.hpp"

namespace magpack {

struct CnOptions {
    double tol = 1e-10;
    int max_iter = 2000;
    int stencil_order = 4;  // 2 or 4, both with Peierls links
};

// Discrete kappa sum_j (covariant second difference) + V, links e^{-i int A} per edge.
GridFunction apply_lattice_hamiltonian(const GaugeData& gauge, const SymbolH& h, double t,
                                       const GridFunction& u, int stencil_order = 4);

// (I + i dt/2 H)^{-1} (I - i dt/2 H) u, H evaluated at t + dt/2.
GridFunction crank_nicolson_step(const GaugeData& gauge, const SymbolH& h, double t, double dt,
                                 const GridFunction& u, const CnOptions& opt = {});

struct EvolveOptions {
    double absorb_fraction = 0.1;  // cosine taper over this outer fraction of the box
    double mass_limit = 1e-6;
    bool absorb = true;
    bool energy_shift = true;  // step with H - <u0,H u0>/|u0|^2, phase restored at outputs
    bool direct_solve = true;  // static H: sparse LU of I + i dt/2 H instead of CG per step
    CnOptions cn;
};

// Solutions at each requested time (increasing, >= 0).
std::vector<GridFunction> evolve(const GaugeData& gauge, const SymbolH& h, const GridFunction& u0,
                                 const std::vector<double>& times, double dt,
                                 const EvolveOptions& opt = {});

// u0(y) = (pi w^2)^{-d/4} exp(-|y-q|^2/(2 w^2) + i p.(y-q))
struct GaussianState {
    Point q{};
    Point p{};
    double width = 1.0;
};

GridFunction gaussian_state(const SpatialGrid& grid, const GaussianState& g);

enum class ExactKind { free, harmonic, landau };

struct ExactParams {
    double kappa = 1.0;
    double omega = 0.0;  // V = (omega^2/4)|y|^2
    double b = 0.0;      // B_12 = b (1 + rate t), symmetric gauge
    double rate = 0.0;
};

// Exact evolution of a Gaussian under the quadratic Hamiltonian
// kappa |eta - A(t,y)|^2 + (omega^2/4)|y|^2 with linear A (thawed Gaussian).
GridFunction exact_solution(ExactKind kind, const ExactParams& prm, const GaussianState& g0, double t,
                            const SpatialGrid& grid);

// Free evolution e^{-i t kappa |k|^2} by FFT.
GridFunction free_evolve_fft(const GridFunction& u0, double t, double kappa = 1.0);

}  // namespace magpack
