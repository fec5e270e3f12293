#include "magpack/grid.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "magpack/io_util.hpp"

namespace magpack {

SpatialGrid::SpatialGrid(int dim_, double L_, int n_) : dim(dim_), L(L_), n(n_) {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("grid: dim out of range");
    if (!(L > 0.0)) throw ConfigError("grid: half width must be positive");
    int m = n;
    while (m > 1 && m % 2 == 0) m /= 2;
    while (m > 1 && m % 3 == 0) m /= 3;
    if (n < 4 || n % 2 != 0 || m != 1) throw ConfigError("grid: n must be even and of the form 2^a 3^b");
}

std::size_t SpatialGrid::size() const {
    std::size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
    return s;
}

double SpatialGrid::cell_volume() const { return std::pow(spacing(), dim); }

Point GridFunction::point(std::size_t flat) const {
    Point p{};
    for (int a = grid.dim - 1; a >= 0; --a) {
        p[a] = grid.coord(static_cast<int>(flat % grid.n));
        flat /= grid.n;
    }
    return p;
}

double GridFunction::norm() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return std::sqrt(s * grid.cell_volume());
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    if (grid != o.grid) throw DomainError("grid mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    if (grid != o.grid) throw DomainError("grid mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}

GridFunction& GridFunction::operator*=(cplx s) {
    for (auto& v : values) v *= s;
    return *this;
}

bool GridFunction::all_finite() const {
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx s, GridFunction a) { return a *= s; }

cplx inner(const GridFunction& a, const GridFunction& b) {
    if (a.grid != b.grid) throw DomainError("grid mismatch");
    cplx s{};
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
    return s * a.grid.cell_volume();
}

double relative_l2(const GridFunction& a, const GridFunction& ref) {
    const double r = ref.norm();
    return (a - ref).norm() / (r > 0.0 ? r : 1.0);
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
    if (a.grid != b.grid) throw DomainError("grid mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

void write_gfd(const std::string& path, const GridFunction& u, const GfdMeta& meta) {
    nlohmann::json h;
    h["dim"] = u.grid.dim;
    h["n"] = u.grid.n;
    h["L"] = u.grid.L;
    h["field"] = meta.field;
    h["lambda"] = meta.lambda;
    h["t"] = meta.t;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << h.dump() << '\n';
    write_le_complex(os, u.values);
    if (!os) throw Error("write failed: " + path);
}

GridFunction read_gfd(const std::string& path, GfdMeta* meta) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path);
    std::string line;
    std::getline(is, line);
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
        throw ConfigError(path + ": bad .gfd header: " + e.what());
    }
    SpatialGrid g(h.at("dim").get<int>(), h.at("L").get<double>(), h.at("n").get<int>());
    GridFunction u(g);
    if (!read_le_complex(is, u.values)) throw ConfigError(path + ": truncated payload");
    if (meta) {
        meta->field = h.value("field", std::string("none"));
        meta->lambda = h.value("lambda", 0.0);
        meta->t = h.value("t", 0.0);
    }
    return u;
}

}  // namespace magpack
