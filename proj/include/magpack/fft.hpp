#pragma once

#include <vector>

#include "magpack/grid.hpp"

namespace magpack {

// Unnormalized in-place n^dim complex transforms (FFTW, estimate plans).
// Plans are cached and executed through the new-array interface, so a plan
// may be shared by concurrent callers.
void fft_forward(const SpatialGrid& g, std::vector<cplx>& data);
// Inverse including the 1/n^dim factor.
void fft_backward(const SpatialGrid& g, std::vector<cplx>& data);

// Angular wavenumber of FFT bin m along one axis.
double fft_wavenumber(const SpatialGrid& g, int m);

// Spectral partial derivative d/dy_axis.
GridFunction spectral_derivative(const GridFunction& u, int axis);

}  // namespace magpack
