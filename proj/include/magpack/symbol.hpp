#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magpack/core.hpp"

namespace magpack {

// Multi-index with |alpha| <= 2 used by the derivative callbacks.
using MultiIndex = std::array<int, kMaxDim>;

// A function of one block of variables (y or eta) with partial derivatives.
struct Factor {
    std::function<double(double t, const Point& v)> f;
    // partial derivative d^alpha f, |alpha| <= 2; empty means unavailable
    std::function<double(double t, const Point& v, const MultiIndex& alpha)> deriv;
    // true when f does not depend on its argument (lets the quantizer skip work)
    bool constant = false;
};

// coef * a(t,y) * b(t,eta)
struct SymbolTerm {
    cplx coef{1.0, 0.0};
    Factor y;
    Factor eta;
};

enum class PotentialKind { zero, harmonic, anharmonic, custom };

struct Potential {
    PotentialKind kind = PotentialKind::zero;
    std::string name = "zero";
    std::function<double(double t, const Point& y)> V;
    std::function<Point(double t, const Point& y)> grad;
    std::function<Eigen::MatrixXd(double t, const Point& y)> hess;
    std::function<double(double t, const Point& y)> V_dot;  // empty means static
    double omega = 0.0;
    double alpha = 0.0;
    double hess_bound = 0.0;  // sup of the Hessian operator norm
    bool quadratic = false;   // exact second order Taylor expansion
};

Potential zero_potential(int dim = 2);
// V = (omega^2/4)|y|^2: for h = |eta|^2 + V the classical frequency is omega.
Potential harmonic_potential(double omega, int dim = 2);
// harmonic plus alpha * sum_j (sqrt(1 + y_j^2) - 1), bounded Hessian
Potential anharmonic_potential(double omega, double alpha, int dim = 2);

// Real symbol h(t; y, eta).
struct SymbolH {
    enum class Family { kinetic_potential, generic };

    int dim = 2;
    Family family = Family::kinetic_potential;
    std::string name = "kinetic";
    double kappa = 1.0;  // kinetic_potential: h = kappa |eta|^2 + V
    Potential potential;
    std::vector<SymbolTerm> terms;  // generic: h = sum of terms (real overall)
    double C_h = 0.0;               // witness bound on second derivatives

    double eval(double t, const Point& y, const Point& eta) const;
    Point grad_y(double t, const Point& y, const Point& eta) const;
    Point grad_eta(double t, const Point& y, const Point& eta) const;
    // (2d x 2d) second partials ordered (y, eta)
    Eigen::MatrixXd hess(double t, const Point& y, const Point& eta) const;
    double time_derivative(double t, const Point& y, const Point& eta) const;
    bool is_kinetic() const { return family == Family::kinetic_potential; }
    // Separable term list for either family (the quantization oracle works on it).
    std::vector<SymbolTerm> as_terms() const;
};

SymbolH kinetic_symbol(Potential V, double kappa = 1.0, int dim = 2);
SymbolH generic_symbol(std::vector<SymbolTerm> terms, int dim = 2, std::string name = "generic");

// Building blocks for generic terms.
Factor one_factor();
Factor monomial_factor(const MultiIndex& power);  // prod v_j^{p_j}, powers <= 2
Factor potential_factor(const Potential& V);

// Sampled sup of |second partials| over [-box, box]^{2d}.
double estimate_C_h(const SymbolH& h, double box, int samples, unsigned seed = 7);

}  // namespace magpack
