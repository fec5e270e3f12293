#include "magpack/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace magpack {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex g_plan_mu;

const PlanPair& plans_for(const SpatialGrid& g) {
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard<std::mutex> lock(g_plan_mu);
    auto key = std::make_pair(g.dim, g.n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<int> dims(g.dim, g.n);
    std::vector<cplx> scratch(g.size());
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    PlanPair pp;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    pp.fwd = fftw_plan_dft(g.dim, dims.data(), p, p, FFTW_FORWARD, flags);
    pp.bwd = fftw_plan_dft(g.dim, dims.data(), p, p, FFTW_BACKWARD, flags);
    return cache.emplace(key, pp).first->second;
}

}  // namespace

void fft_forward(const SpatialGrid& g, std::vector<cplx>& data) {
    if (data.size() != g.size()) throw DomainError("fft: size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(g).fwd, p, p);
}

void fft_backward(const SpatialGrid& g, std::vector<cplx>& data) {
    if (data.size() != g.size()) throw DomainError("fft: size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(g).bwd, p, p);
    const double s = 1.0 / static_cast<double>(g.size());
    for (auto& v : data) v *= s;
}

double fft_wavenumber(const SpatialGrid& g, int m) {
    const int k = (m <= g.n / 2) ? m : m - g.n;
    return kPi * k / g.L;
}

GridFunction spectral_derivative(const GridFunction& u, int axis) {
    const auto& g = u.grid;
    std::vector<cplx> f = u.values;
    fft_forward(g, f);
    std::size_t inner = 1;
    for (int a = axis + 1; a < g.dim; ++a) inner *= g.n;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const int m = static_cast<int>((k / inner) % g.n);
        // Nyquist bin carries no odd derivative
        const double kk = (2 * m == g.n) ? 0.0 : fft_wavenumber(g, m);
        f[k] *= cplx(0.0, kk);
    }
    fft_backward(g, f);
    GridFunction out(g);
    out.values = std::move(f);
    return out;
}

}  // namespace magpack
