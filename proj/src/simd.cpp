#include "magpack/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace magpack::simd {

namespace {

void rank1_acc_scalar(cplx* out, std::size_t stride, const cplx* f1, int n1, const cplx* f2, int n2,
                      cplx c) {
    for (int i = 0; i < n1; ++i) {
        const double ar = c.real() * f1[i].real() - c.imag() * f1[i].imag();
        const double ai = c.real() * f1[i].imag() + c.imag() * f1[i].real();
        double* row = reinterpret_cast<double*>(out + i * stride);
        const double* f = reinterpret_cast<const double*>(f2);
        for (int j = 0; j < n2; ++j) {
            row[2 * j] += ar * f[2 * j] - ai * f[2 * j + 1];
            row[2 * j + 1] += ar * f[2 * j + 1] + ai * f[2 * j];
        }
    }
}

cplx rank1_dot_scalar(const cplx* u, std::size_t stride, const cplx* f1, int n1, const cplx* f2,
                      int n2) {
    double sr = 0.0, si = 0.0;
    const double* f = reinterpret_cast<const double*>(f2);
    for (int i = 0; i < n1; ++i) {
        const double* row = reinterpret_cast<const double*>(u + i * stride);
        double rr = 0.0, ri = 0.0;
        for (int j = 0; j < n2; ++j) {
            rr += f[2 * j] * row[2 * j] + f[2 * j + 1] * row[2 * j + 1];
            ri += f[2 * j] * row[2 * j + 1] - f[2 * j + 1] * row[2 * j];
        }
        const double gr = f1[i].real(), gi = f1[i].imag();
        sr += gr * rr + gi * ri;
        si += gr * ri - gi * rr;
    }
    return {sr, si};
}

void mod_acc_scalar(cplx* out, std::size_t stride, const cplx* p, int n1, int n2, cplx c) {
    const double cr = c.real(), ci = c.imag();
    for (int i = 0; i < n1; ++i) {
        double* row = reinterpret_cast<double*>(out + i * stride);
        const double* q = reinterpret_cast<const double*>(p + static_cast<std::size_t>(i) * n2);
        for (int j = 0; j < n2; ++j) {
            row[2 * j] += cr * q[2 * j] - ci * q[2 * j + 1];
            row[2 * j + 1] += cr * q[2 * j + 1] + ci * q[2 * j];
        }
    }
}

cplx mod_dot_scalar(const cplx* u, std::size_t stride, const cplx* p, int n1, int n2) {
    double sr = 0.0, si = 0.0;
    for (int i = 0; i < n1; ++i) {
        const double* row = reinterpret_cast<const double*>(u + i * stride);
        const double* q = reinterpret_cast<const double*>(p + static_cast<std::size_t>(i) * n2);
        for (int j = 0; j < n2; ++j) {
            sr += q[2 * j] * row[2 * j] + q[2 * j + 1] * row[2 * j + 1];
            si += q[2 * j] * row[2 * j + 1] - q[2 * j + 1] * row[2 * j];
        }
    }
    return {sr, si};
}

const Kernels kScalar{Isa::scalar, rank1_acc_scalar, rank1_dot_scalar, mod_acc_scalar,
                      mod_dot_scalar};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa pick_default() {
    if (const char* env = std::getenv("MAGPACK_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0 && isa_available(Isa::avx2)) return Isa::avx2;
        if (std::strcmp(env, "neon") == 0 && isa_available(Isa::neon)) return Isa::neon;
    }
    if (isa_available(Isa::avx2)) return Isa::avx2;
    if (isa_available(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

std::atomic<const Kernels*> g_active{nullptr};

}  // namespace

namespace detail {
const Kernels& scalar_kernels() { return kScalar; }
#if !defined(MAGPACK_HAVE_AVX2)
const Kernels* avx2_kernels() { return nullptr; }
#endif
#if !defined(__aarch64__)
const Kernels* neon_kernels() { return nullptr; }
#endif
}  // namespace detail

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
        default: return "scalar";
    }
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return detail::avx2_kernels() != nullptr && cpu_has_avx2();
        case Isa::neon: return detail::neon_kernels() != nullptr;
    }
    return false;
}

const Kernels& kernels(Isa isa) {
    if (!isa_available(isa)) throw CapabilityError(std::string("simd: ") + isa_name(isa) + " unavailable");
    switch (isa) {
        case Isa::avx2: return *detail::avx2_kernels();
        case Isa::neon: return *detail::neon_kernels();
        default: return kScalar;
    }
}

const Kernels& active() {
    const Kernels* k = g_active.load(std::memory_order_acquire);
    if (!k) {
        k = &kernels(pick_default());
        g_active.store(k, std::memory_order_release);
    }
    return *k;
}

void set_active(Isa isa) { g_active.store(&kernels(isa), std::memory_order_release); }

}  // namespace magpack::simd
