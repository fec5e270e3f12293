// Built with -mavx2 -mfma; only reached after a runtime cpu check.
#include <immintrin.h>

#include "magpack/simd.hpp"

namespace magpack::simd {

namespace {

inline __m256d swap_pairs(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

// a * f for two packed complex values, a given as broadcast (ar, ai).
inline __m256d cmul(__m256d ar, __m256d ai, __m256d f) {
    return _mm256_fmaddsub_pd(ar, f, _mm256_mul_pd(ai, swap_pairs(f)));
}

void rank1_acc_avx2(cplx* out, std::size_t stride, const cplx* f1, int n1, const cplx* f2, int n2,
                    cplx c) {
    const double* f = reinterpret_cast<const double*>(f2);
    for (int i = 0; i < n1; ++i) {
        const double a_r = c.real() * f1[i].real() - c.imag() * f1[i].imag();
        const double a_i = c.real() * f1[i].imag() + c.imag() * f1[i].real();
        const __m256d ar = _mm256_set1_pd(a_r), ai = _mm256_set1_pd(a_i);
        double* row = reinterpret_cast<double*>(out + i * stride);
        int j = 0;
        for (; j + 2 <= n2; j += 2) {
            const __m256d fv = _mm256_loadu_pd(f + 2 * j);
            const __m256d o = _mm256_loadu_pd(row + 2 * j);
            _mm256_storeu_pd(row + 2 * j, _mm256_add_pd(o, cmul(ar, ai, fv)));
        }
        for (; j < n2; ++j) {
            row[2 * j] += a_r * f[2 * j] - a_i * f[2 * j + 1];
            row[2 * j + 1] += a_r * f[2 * j + 1] + a_i * f[2 * j];
        }
    }
}

// Accumulates p = sum f*u (lanes fr*ur, fi*ui) and q = sum f*swap(u) (fr*ui, fi*ur);
// conj(f)u = (p0 + p1) + i(q0 - q1).
inline void dot_tail(const double* f, const double* u, int j, int n, double& rr, double& ri) {
    for (; j < n; ++j) {
        rr += f[2 * j] * u[2 * j] + f[2 * j + 1] * u[2 * j + 1];
        ri += f[2 * j] * u[2 * j + 1] - f[2 * j + 1] * u[2 * j];
    }
}

inline void reduce(__m256d p, __m256d q, double& rr, double& ri) {
    alignas(32) double a[4], b[4];
    _mm256_store_pd(a, p);
    _mm256_store_pd(b, q);
    rr += (a[0] + a[1]) + (a[2] + a[3]);
    ri += (b[0] - b[1]) + (b[2] - b[3]);
}

cplx rank1_dot_avx2(const cplx* u, std::size_t stride, const cplx* f1, int n1, const cplx* f2,
                    int n2) {
    const double* f = reinterpret_cast<const double*>(f2);
    double sr = 0.0, si = 0.0;
    for (int i = 0; i < n1; ++i) {
        const double* row = reinterpret_cast<const double*>(u + i * stride);
        __m256d p = _mm256_setzero_pd(), q = _mm256_setzero_pd();
        int j = 0;
        for (; j + 2 <= n2; j += 2) {
            const __m256d fv = _mm256_loadu_pd(f + 2 * j);
            const __m256d uv = _mm256_loadu_pd(row + 2 * j);
            p = _mm256_fmadd_pd(fv, uv, p);
            q = _mm256_fmadd_pd(fv, swap_pairs(uv), q);
        }
        double rr = 0.0, ri = 0.0;
        reduce(p, q, rr, ri);
        dot_tail(f, row, j, n2, rr, ri);
        const double gr = f1[i].real(), gi = f1[i].imag();
        sr += gr * rr + gi * ri;
        si += gr * ri - gi * rr;
    }
    return {sr, si};
}

void mod_acc_avx2(cplx* out, std::size_t stride, const cplx* p, int n1, int n2, cplx c) {
    const __m256d ar = _mm256_set1_pd(c.real()), ai = _mm256_set1_pd(c.imag());
    for (int i = 0; i < n1; ++i) {
        double* row = reinterpret_cast<double*>(out + i * stride);
        const double* q = reinterpret_cast<const double*>(p + static_cast<std::size_t>(i) * n2);
        int j = 0;
        for (; j + 2 <= n2; j += 2) {
            const __m256d qv = _mm256_loadu_pd(q + 2 * j);
            const __m256d o = _mm256_loadu_pd(row + 2 * j);
            _mm256_storeu_pd(row + 2 * j, _mm256_add_pd(o, cmul(ar, ai, qv)));
        }
        for (; j < n2; ++j) {
            row[2 * j] += c.real() * q[2 * j] - c.imag() * q[2 * j + 1];
            row[2 * j + 1] += c.real() * q[2 * j + 1] + c.imag() * q[2 * j];
        }
    }
}

cplx mod_dot_avx2(const cplx* u, std::size_t stride, const cplx* p, int n1, int n2) {
    __m256d pa = _mm256_setzero_pd(), qa = _mm256_setzero_pd();
    double sr = 0.0, si = 0.0;
    for (int i = 0; i < n1; ++i) {
        const double* row = reinterpret_cast<const double*>(u + i * stride);
        const double* q = reinterpret_cast<const double*>(p + static_cast<std::size_t>(i) * n2);
        int j = 0;
        for (; j + 2 <= n2; j += 2) {
            const __m256d fv = _mm256_loadu_pd(q + 2 * j);
            const __m256d uv = _mm256_loadu_pd(row + 2 * j);
            pa = _mm256_fmadd_pd(fv, uv, pa);
            qa = _mm256_fmadd_pd(fv, swap_pairs(uv), qa);
        }
        dot_tail(q, row, j, n2, sr, si);
    }
    reduce(pa, qa, sr, si);
    return {sr, si};
}

const Kernels kAvx2{Isa::avx2, rank1_acc_avx2, rank1_dot_avx2, mod_acc_avx2, mod_dot_avx2};

}  // namespace

namespace detail {
const Kernels* avx2_kernels() { return &kAvx2; }
}  // namespace detail

}  // namespace magpack::simd
