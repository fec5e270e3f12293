#include "magpack/phasespace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "magpack/io_util.hpp"
#include "magpack/parallel.hpp"
#include "magpack/simd.hpp"

namespace magpack {

namespace {

using MatC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// lambda^{1/2} (2 pi)^{-1/2} pi^{-1/4}, the per-axis normalization of the window
double axis_norm(double lambda) {
    return std::sqrt(lambda) / std::sqrt(2.0 * kPi) / std::pow(kPi, 0.25);
}

void require_2d(const SpatialGrid& g) {
    if (g.dim != 2) throw CapabilityError("phasespace: lattice transforms are implemented for d = 2");
}

// Window times gauge phase, no xi modulation. Separable: (b0, b1); otherwise full patch.
struct Base {
    Patch patch;
    bool separable = true;
    std::vector<cplx> b0, b1, full;
};

Base make_base(const WavepacketFrame& fr, double t, const Point& x, const Point& xi) {
    const auto& g = fr.grid;
    Base b;
    b.patch = patch_for(g, x, fr.stamp_radius);
    b.separable = fr.gauge.separable();
    const double lam = fr.lambda, nrm = axis_norm(lam);
    const double h = g.spacing();
    if (b.separable) {
        const auto& f = *fr.gauge.field;
        const double s = f.scale(t);
        // phi(y,x) = -1/2 s y.(U x)
        double ux[2];
        for (int a = 0; a < 2; ++a) ux[a] = f.uniform[a * 2 + 0] * x[0] + f.uniform[a * 2 + 1] * x[1];
        for (int a = 0; a < 2; ++a) {
            auto& v = a == 0 ? b.b0 : b.b1;
            v.resize(b.patch.len[a]);
            for (int i = 0; i < b.patch.len[a]; ++i) {
                const double y = -g.L + (b.patch.lo[a] + i) * h;
                const double z = y - x[a];
                const double ph = xi[a] * z - 0.5 * s * y * ux[a];
                v[i] = std::polar(nrm * std::exp(-0.5 * lam * lam * z * z), ph);
            }
        }
        return b;
    }
    const int n0 = b.patch.len[0], n1 = b.patch.len[1];
    b.full.resize(static_cast<std::size_t>(n0) * n1);
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const Point y{-g.L + (b.patch.lo[0] + i) * h, -g.L + (b.patch.lo[1] + j) * h, 0.0};
            const double z0 = y[0] - x[0], z1 = y[1] - x[1];
            const double env = nrm * nrm * std::exp(-0.5 * lam * lam * (z0 * z0 + z1 * z1));
            const double ph = xi[0] * z0 + xi[1] * z1 + phase_phi(fr.gauge, t, y, x);
            b.full[static_cast<std::size_t>(i) * n1 + j] = std::polar(env, ph);
        }
    }
    return b;
}

// E[b, i] = exp(-i xi_b (y_i - x)) along one axis.
MatC modulation_matrix(const WavepacketFrame& fr, const Patch& p, int axis, double x) {
    const auto& g = fr.grid;
    const double h = g.spacing();
    MatC e(fr.nxi, p.len[axis]);
    for (int b = 0; b < fr.nxi; ++b) {
        const double k = fr.xi0[axis] + b * fr.dxi;
        for (int i = 0; i < p.len[axis]; ++i) {
            const double z = -g.L + (p.lo[axis] + i) * h - x;
            e(b, i) = std::polar(1.0, -k * z);
        }
    }
    return e;
}

}  // namespace

Point WavepacketFrame::x_node(std::size_t a) const {
    return Point{x0[0] + static_cast<double>(a / nx) * dx, x0[1] + static_cast<double>(a % nx) * dx, 0.0};
}

Point WavepacketFrame::xi_node(std::size_t b) const {
    return Point{xi0[0] + static_cast<double>(b / nxi) * dxi, xi0[1] + static_cast<double>(b % nxi) * dxi,
                 0.0};
}

Patch patch_for(const SpatialGrid& g, const Point& x, double r) {
    Patch p;
    const double h = g.spacing();
    for (int a = 0; a < 2; ++a) {
        if (!std::isfinite(x[a])) throw DomainError("stamp centre is not finite");
        const int lo = static_cast<int>(std::ceil((x[a] - r + g.L) / h));
        const int hi = static_cast<int>(std::floor((x[a] + r + g.L) / h));
        if (lo < 1 || hi > g.n - 2) {
            throw DomainError("stamp around (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) +
                              ") touches the box boundary");
        }
        p.lo[a] = lo;
        p.len[a] = hi - lo + 1;
    }
    return p;
}

WavepacketFrame make_frame(const GaugeData& gauge, double lambda, const SpatialGrid& grid,
                           const FrameOptions& opt) {
    gauge.validate();
    require_2d(grid);
    if (gauge.dim() != grid.dim) throw ConfigError("frame: gauge and grid dimension differ");
    if (!(lambda >= 1.0)) throw ConfigError("frame: lambda must be >= 1");
    if (!(opt.a > 0.0)) throw ConfigError("frame: lattice parameter a must be positive");
    WavepacketFrame f;
    f.gauge = gauge;
    f.grid = grid;
    f.lambda = lambda;
    f.dx = opt.a / lambda;
    f.dxi = opt.a * lambda;
    if (f.dx * f.dxi > kPi / 2 + 1e-12)
        throw ConfigError("frame: dx*dxi must not exceed pi/2 (a <= 1.2533)");
    if (opt.stamp_factor < 8.0) throw ConfigError("frame: stamp radius must be at least 8/lambda");
    f.stamp_radius = opt.stamp_factor / lambda;
    f.drop_tol = opt.drop_tol;
    const int hx = static_cast<int>(std::ceil(opt.x_extent / f.dx - 1e-9));
    const int hk = static_cast<int>(std::ceil(opt.xi_extent / f.dxi - 1e-9));
    f.nx = 2 * hx + 1;
    f.nxi = 2 * hk + 1;
    for (int a = 0; a < 2; ++a) {
        f.x0[a] = opt.x_center[a] - hx * f.dx;
        f.xi0[a] = opt.xi_center[a] - hk * f.dxi;
    }
    // every lattice stamp must fit inside the box
    const Point lo = f.x0;
    const Point hi{f.x0[0] + (f.nx - 1) * f.dx, f.x0[1] + (f.nx - 1) * f.dx, 0.0};
    try {
        patch_for(grid, lo, f.stamp_radius);
        patch_for(grid, hi, f.stamp_radius);
    } catch (const DomainError&) {
        throw ConfigError("frame: x lattice plus stamp radius exceeds the grid box; enlarge L");
    }
    const double nyq = kPi / grid.spacing();
    for (int a = 0; a < 2; ++a) {
        const double kmax = std::max(std::abs(f.xi0[a]), std::abs(f.xi0[a] + (f.nxi - 1) * f.dxi));
        if (kmax > nyq) throw ConfigError("frame: xi lattice exceeds the grid Nyquist frequency");
    }
    return f;
}

double PhaseSpaceCoefficients::max_abs() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
}

Stamp make_stamp(const WavepacketFrame& frame, double t, const Point& x, const Point& xi) {
    require_2d(frame.grid);
    Base b = make_base(frame, t, x, xi);
    Stamp s;
    s.patch = b.patch;
    s.separable = b.separable;
    s.f0 = std::move(b.b0);
    s.f1 = std::move(b.b1);
    s.p = std::move(b.full);
    return s;
}

void stamp_acc(const Stamp& s, cplx c, std::vector<cplx>& out, int n) {
    cplx* base = out.data() + static_cast<std::size_t>(s.patch.lo[0]) * n + s.patch.lo[1];
    const auto& k = simd::active();
    if (s.separable) {
        k.rank1_acc(base, n, s.f0.data(), s.patch.len[0], s.f1.data(), s.patch.len[1], c);
    } else {
        k.mod_acc(base, n, s.p.data(), s.patch.len[0], s.patch.len[1], c);
    }
}

cplx stamp_dot(const Stamp& s, const std::vector<cplx>& u, int n) {
    const cplx* base = u.data() + static_cast<std::size_t>(s.patch.lo[0]) * n + s.patch.lo[1];
    const auto& k = simd::active();
    if (s.separable) return k.rank1_dot(base, n, s.f0.data(), s.patch.len[0], s.f1.data(), s.patch.len[1]);
    return k.mod_dot(base, n, s.p.data(), s.patch.len[0], s.patch.len[1]);
}

std::vector<cplx> stamp_values(const Stamp& s) {
    if (!s.separable) return s.p;
    const int n0 = s.patch.len[0], n1 = s.patch.len[1];
    std::vector<cplx> v(static_cast<std::size_t>(n0) * n1);
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j) v[static_cast<std::size_t>(i) * n1 + j] = s.f0[i] * s.f1[j];
    return v;
}

GridFunction wavepacket_eval(const WavepacketFrame& frame, double t, const Point& x, const Point& xi,
                             const SpatialGrid& grid) {
    require_2d(grid);
    for (int a = 0; a < 2; ++a)
        if (!(std::abs(x[a]) < grid.L)) throw DomainError("wavepacket centre outside the grid box");
    WavepacketFrame fr = frame;
    fr.grid = grid;
    const Stamp s = make_stamp(fr, t, x, xi);
    const auto vals = stamp_values(s);
    GridFunction u(grid);
    const double r2 = frame.stamp_radius * frame.stamp_radius;
    for (int i = 0; i < s.patch.len[0]; ++i) {
        for (int j = 0; j < s.patch.len[1]; ++j) {
            const int gi = s.patch.lo[0] + i, gj = s.patch.lo[1] + j;
            const double z0 = grid.coord(gi) - x[0], z1 = grid.coord(gj) - x[1];
            if (z0 * z0 + z1 * z1 > r2) continue;
            u.at(gi, gj) = vals[static_cast<std::size_t>(i) * s.patch.len[1] + j];
        }
    }
    return u;
}

PhaseSpaceCoefficients analyze(const WavepacketFrame& frame, double t, const GridFunction& u,
                               int workers) {
    if (u.grid != frame.grid) throw ConfigError("analyze: grid does not match the frame");
    PhaseSpaceCoefficients c;
    c.frame = &frame;
    c.values.assign(frame.size(), cplx{});
    const int n = frame.grid.n;
    const double w = frame.grid.cell_volume();
    const std::size_t nodes = frame.x_count();
    const Point zero{};
    parallel_chunks(kChunks, workers, [&](int chunk) {
        const auto [b, e] = chunk_range(nodes, kChunks, chunk);
        for (std::size_t a = b; a < e; ++a) {
            const Point x = frame.x_node(a);
            const Base base = make_base(frame, t, x, zero);
            const int n0 = base.patch.len[0], n1 = base.patch.len[1];
            MatC W(n0, n1);
            for (int i = 0; i < n0; ++i) {
                const cplx* row = u.values.data() + static_cast<std::size_t>(base.patch.lo[0] + i) * n +
                                  base.patch.lo[1];
                for (int j = 0; j < n1; ++j) {
                    const cplx g = base.separable ? base.b0[i] * base.b1[j]
                                                  : base.full[static_cast<std::size_t>(i) * n1 + j];
                    W(i, j) = std::conj(g) * row[j];
                }
            }
            const MatC E0 = modulation_matrix(frame, base.patch, 0, x[0]);
            const MatC E1 = modulation_matrix(frame, base.patch, 1, x[1]);
            const MatC T = (E0 * W) * E1.transpose();
            cplx* out = c.values.data() + a * frame.xi_count();
            for (int b0 = 0; b0 < frame.nxi; ++b0)
                for (int b1 = 0; b1 < frame.nxi; ++b1) out[b0 * frame.nxi + b1] = w * T(b0, b1);
        }
    });
    return c;
}

GridFunction synthesize(const WavepacketFrame& frame, double t, const PhaseSpaceCoefficients& c,
                        const SpatialGrid& grid, int workers) {
    if (grid != frame.grid) throw ConfigError("synthesize: grid does not match the frame");
    if (c.values.size() != frame.size()) throw DomainError("synthesize: coefficient shape mismatch");
    const int n = grid.n;
    const double thr = frame.drop_tol * c.max_abs();
    const cplx scale = frame.calibration * frame.cell();
    const std::size_t nodes = frame.x_count();
    const Point zero{};
    std::vector<std::vector<cplx>> bufs(kChunks);
    parallel_chunks(kChunks, workers, [&](int chunk) {
        const auto [b, e] = chunk_range(nodes, kChunks, chunk);
        auto& buf = bufs[chunk];
        for (std::size_t a = b; a < e; ++a) {
            const cplx* ca = c.values.data() + a * frame.xi_count();
            MatC C(frame.nxi, frame.nxi);
            bool any = false;
            for (int b0 = 0; b0 < frame.nxi; ++b0) {
                for (int b1 = 0; b1 < frame.nxi; ++b1) {
                    const cplx v = ca[b0 * frame.nxi + b1];
                    const bool keep = std::abs(v) >= thr && v != cplx{};
                    C(b0, b1) = keep ? v : cplx{};
                    any = any || keep;
                }
            }
            if (!any) continue;
            if (buf.empty()) buf.assign(grid.size(), cplx{});
            const Point x = frame.x_node(a);
            const Base base = make_base(frame, t, x, zero);
            const MatC E0 = modulation_matrix(frame, base.patch, 0, x[0]);
            const MatC E1 = modulation_matrix(frame, base.patch, 1, x[1]);
            const MatC P = (E0.adjoint() * C) * E1.conjugate();
            const int n0 = base.patch.len[0], n1 = base.patch.len[1];
            for (int i = 0; i < n0; ++i) {
                cplx* row = buf.data() + static_cast<std::size_t>(base.patch.lo[0] + i) * n + base.patch.lo[1];
                for (int j = 0; j < n1; ++j) {
                    const cplx g = base.separable ? base.b0[i] * base.b1[j]
                                                  : base.full[static_cast<std::size_t>(i) * n1 + j];
                    row[j] += scale * g * P(i, j);
                }
            }
        }
    });
    GridFunction out(grid);
    for (const auto& buf : bufs) {
        if (buf.empty()) continue;
        for (std::size_t k = 0; k < buf.size(); ++k) out.values[k] += buf[k];
    }
    return out;
}

double calibrate(WavepacketFrame& frame, double t, int workers) {
    frame.calibration = 1.0;
    // reference packet placed off the lattice nodes
    const Point xc{frame.x0[0] + (frame.nx / 2 + 0.37) * frame.dx,
                   frame.x0[1] + (frame.nx / 2 + 0.21) * frame.dx, 0.0};
    const Point kc{frame.xi0[0] + (frame.nxi / 2 + 0.29) * frame.dxi,
                   frame.xi0[1] + (frame.nxi / 2 - 0.13) * frame.dxi, 0.0};
    const GridFunction g = wavepacket_eval(frame, t, xc, kc, frame.grid);
    const GridFunction s = synthesize(frame, t, analyze(frame, t, g, workers), frame.grid, workers);
    const double ss = inner(s, s).real();
    if (!(ss > 0.0)) throw Error("calibrate: reference synthesis vanished");
    frame.calibration = inner(s, g).real() / ss;
    return frame.calibration;
}

double Weight::operator()(const Point& x, const Point& xi, int dim) const {
    const double q = 1.0 + (dot(x, x, dim) + dot(xi, xi, dim)) / (lambda * lambda);
    return std::pow(q, 0.5 * m);
}

double modulation_norm(const PhaseSpaceCoefficients& c, double m, double p) {
    if (std::isnan(p) || p < 1.0) throw DomainError("modulation_norm: p must lie in [1, inf]");
    const auto& fr = *c.frame;
    const Weight w{fr.lambda, m};
    const bool inf = std::isinf(p);
    double acc = 0.0;
    for (std::size_t a = 0; a < fr.x_count(); ++a) {
        const Point x = fr.x_node(a);
        for (std::size_t b = 0; b < fr.xi_count(); ++b) {
            const double v = w(x, fr.xi_node(b), fr.dim()) * std::abs(c.at(a, b));
            if (inf) {
                acc = std::max(acc, v);
            } else {
                acc += std::pow(v, p);
            }
        }
    }
    if (inf) return acc;
    return std::pow(acc * fr.cell(), 1.0 / p);
}

double modulation_norm(const WavepacketFrame& frame, double t, const GridFunction& u, double m,
                       double p, int workers) {
    if (std::isnan(p) || p < 1.0) throw DomainError("modulation_norm: p must lie in [1, inf]");
    return modulation_norm(analyze(frame, t, u, workers), m, p);
}

cplx matrix_element(const WavepacketFrame& frame, double t, const GridOperator& apply_L,
                    const Point& z, const Point& zeta, const Point& x, const Point& xi,
                    const SpatialGrid& grid) {
    const GridFunction gx = wavepacket_eval(frame, t, x, xi, grid);
    const GridFunction gz = wavepacket_eval(frame, t, z, zeta, grid);
    return inner(gz, apply_L(gx));
}

void write_coefficients(const std::string& path, const PhaseSpaceCoefficients& c, double t) {
    const auto& fr = *c.frame;
    nlohmann::json h;
    h["dim"] = fr.dim();
    h["n"] = fr.grid.n;
    h["L"] = fr.grid.L;
    h["field"] = fr.gauge.field->name;
    h["lambda"] = fr.lambda;
    h["t"] = t;
    h["nx"] = fr.nx;
    h["nxi"] = fr.nxi;
    h["dx"] = fr.dx;
    h["dxi"] = fr.dxi;
    h["x0"] = {fr.x0[0], fr.x0[1]};
    h["xi0"] = {fr.xi0[0], fr.xi0[1]};
    h["calibration"] = fr.calibration;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << h.dump() << '\n';
    write_le_complex(os, c.values);
}

}  // namespace magpack
