#pragma once

#include <string>
#include <vector>

#include "magpack/core.hpp"

namespace magpack {

// Uniform periodic grid on [-L, L)^dim with n = 2^a 3^b points per axis.
struct SpatialGrid {
    int dim = 2;
    double L = 1.0;
    int n = 64;

    SpatialGrid() = default;
    SpatialGrid(int dim_, double L_, int n_);

    double spacing() const { return 2.0 * L / n; }
    double coord(int i) const { return -L + i * spacing(); }
    std::size_t size() const;
    double cell_volume() const;
    bool operator==(const SpatialGrid& o) const { return dim == o.dim && n == o.n && L == o.L; }
    bool operator!=(const SpatialGrid& o) const { return !(*this == o); }
};

struct GridFunction {
    SpatialGrid grid;
    std::vector<cplx> values;

    GridFunction() = default;
    explicit GridFunction(const SpatialGrid& g) : grid(g), values(g.size(), cplx{}) {}

    cplx& operator[](std::size_t i) { return values[i]; }
    const cplx& operator[](std::size_t i) const { return values[i]; }
    // 2-d row-major access
    cplx& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.n + j]; }
    const cplx& at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.n + j]; }
    Point point(std::size_t flat) const;

    double norm() const;
    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(cplx s);
    bool all_finite() const;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx s, GridFunction a);

// delta^dim * sum conj(a) b
cplx inner(const GridFunction& a, const GridFunction& b);
double relative_l2(const GridFunction& a, const GridFunction& ref);
double max_abs_diff(const GridFunction& a, const GridFunction& b);

template <class F>
GridFunction sample(const SpatialGrid& g, F&& f) {
    GridFunction u(g);
    for (std::size_t k = 0; k < u.values.size(); ++k) u.values[k] = f(u.point(k));
    return u;
}

struct GfdMeta {
    std::string field = "none";
    double lambda = 0.0;
    double t = 0.0;
};

// .gfd: one JSON header line, then little-endian f64 (re, im) pairs, row-major.
void write_gfd(const std::string& path, const GridFunction& u, const GfdMeta& meta = {});
GridFunction read_gfd(const std::string& path, GfdMeta* meta = nullptr);

}  // namespace magpack
