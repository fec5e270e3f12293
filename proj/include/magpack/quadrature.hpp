#pragma once

#include <vector>

namespace magpack {

// Gauss-Legendre rule mapped to [0,1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Cached per order; safe to call concurrently.
const GaussRule& gauss_legendre01(int n);

// Rule on [a,b] (not cached).
GaussRule gauss_legendre(int n, double a, double b);

}  // namespace magpack
