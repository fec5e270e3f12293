#pragma once

#include <vector>

#include "magpack/fields.hpp"
#include "magpack/grid.hpp"
#include "magpack/symbol.hpp"

namespace magpack {

enum class Quantization { weyl, kohn_nirenberg };

// A(t;y) sampled on the grid (shift included).
std::vector<Point> potential_samples(const GaugeData& gauge, double t, const SpatialGrid& grid);

// P^A_j u = (-i d_j - A_j(y)) u, spectral derivative.
GridFunction covariant_derivative(const GaugeData& gauge, double t, int j, const GridFunction& u);
GridFunction covariant_derivative(const std::vector<Point>& A, int j, const GridFunction& u);

// Op^A(h) u for the kinetic_potential family: kappa sum_j P_j P_j u + V u.
GridFunction apply_op(const GaugeData& gauge, const SymbolH& h, double t, const GridFunction& u);

// Brute-force oscillatory integral on the grid, eta truncated to the Nyquist box with
// eta_nodes Gauss-Legendre nodes per axis (0 picks 2n + 16). d = 2 and n <= 64 only.
GridFunction apply_op_direct(const GaugeData& gauge, const SymbolH& h, double t, const GridFunction& u,
                             int eta_nodes = 0, Quantization q = Quantization::weyl, int workers = 1);

// Truncated Kohn-Nirenberg correction h_r (|alpha| <= 2), returned as a generic term list.
SymbolH kn_correction(const SymbolH& h);

}  // namespace magpack
