#pragma once

#include <string>
#include <vector>

#include "magpack/config.hpp"

namespace magpack::detail {

GridFunction downsample(const GridFunction& fine, const SpatialGrid& coarse);
std::vector<GridFunction> cn_reference(const ExperimentConfig& cfg, const std::vector<double>& times);
std::vector<GridFunction> references(const ExperimentConfig& cfg, const std::vector<double>& times,
                                     std::string* kind);
SpatialGrid transform_grid(const GaussianState& s, double lambda, int n);
WavepacketFrame transform_frame(const GaugeData& gauge, const SpatialGrid& grid, const GaussianState& s,
                                double lambda, int workers);
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace magpack::detail
