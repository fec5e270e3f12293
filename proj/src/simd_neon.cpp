#if defined(__aarch64__)
#include <arm_neon.h>

#include "magpack/simd.hpp"

namespace magpack::simd {

namespace {

// One complex per float64x2_t.
inline float64x2_t cmul(float64x2_t ar, float64x2_t ai_signed, float64x2_t f) {
    // (ar*fr - ai*fi, ar*fi + ai*fr); ai_signed = (-ai, ai)
    return vfmaq_f64(vmulq_f64(ar, f), ai_signed, vextq_f64(f, f, 1));
}

void rank1_acc_neon(cplx* out, std::size_t stride, const cplx* f1, int n1, const cplx* f2, int n2,
                    cplx c) {
    const double* f = reinterpret_cast<const double*>(f2);
    for (int i = 0; i < n1; ++i) {
        const double a_r = c.real() * f1[i].real() - c.imag() * f1[i].imag();
        const double a_i = c.real() * f1[i].imag() + c.imag() * f1[i].real();
        const float64x2_t ar = vdupq_n_f64(a_r);
        const double s[2] = {-a_i, a_i};
        const float64x2_t ai = vld1q_f64(s);
        double* row = reinterpret_cast<double*>(out + i * stride);
        for (int j = 0; j < n2; ++j) {
            const float64x2_t o = vld1q_f64(row + 2 * j);
            vst1q_f64(row + 2 * j, vaddq_f64(o, cmul(ar, ai, vld1q_f64(f + 2 * j))));
        }
    }
}

cplx rank1_dot_neon(const cplx* u, std::size_t stride, const cplx* f1, int n1, const cplx* f2,
                    int n2) {
    const double* f = reinterpret_cast<const double*>(f2);
    double sr = 0.0, si = 0.0;
    for (int i = 0; i < n1; ++i) {
        const double* row = reinterpret_cast<const double*>(u + i * stride);
        float64x2_t p = vdupq_n_f64(0.0), q = vdupq_n_f64(0.0);
        for (int j = 0; j < n2; ++j) {
            const float64x2_t fv = vld1q_f64(f + 2 * j);
            const float64x2_t uv = vld1q_f64(row + 2 * j);
            p = vfmaq_f64(p, fv, uv);
            q = vfmaq_f64(q, fv, vextq_f64(uv, uv, 1));
        }
        const double rr = vgetq_lane_f64(p, 0) + vgetq_lane_f64(p, 1);
        const double ri = vgetq_lane_f64(q, 0) - vgetq_lane_f64(q, 1);
        const double gr = f1[i].real(), gi = f1[i].imag();
        sr += gr * rr + gi * ri;
        si += gr * ri - gi * rr;
    }
    return {sr, si};
}

void mod_acc_neon(cplx* out, std::size_t stride, const cplx* p, int n1, int n2, cplx c) {
    const float64x2_t ar = vdupq_n_f64(c.real());
    const double s[2] = {-c.imag(), c.imag()};
    const float64x2_t ai = vld1q_f64(s);
    for (int i = 0; i < n1; ++i) {
        double* row = reinterpret_cast<double*>(out + i * stride);
        const double* q = reinterpret_cast<const double*>(p + static_cast<std::size_t>(i) * n2);
        for (int j = 0; j < n2; ++j) {
            const float64x2_t o = vld1q_f64(row + 2 * j);
            vst1q_f64(row + 2 * j, vaddq_f64(o, cmul(ar, ai, vld1q_f64(q + 2 * j))));
        }
    }
}

cplx mod_dot_neon(const cplx* u, std::size_t stride, const cplx* p, int n1, int n2) {
    float64x2_t pa = vdupq_n_f64(0.0), qa = vdupq_n_f64(0.0);
    for (int i = 0; i < n1; ++i) {
        const double* row = reinterpret_cast<const double*>(u + i * stride);
        const double* q = reinterpret_cast<const double*>(p + static_cast<std::size_t>(i) * n2);
        for (int j = 0; j < n2; ++j) {
            const float64x2_t fv = vld1q_f64(q + 2 * j);
            const float64x2_t uv = vld1q_f64(row + 2 * j);
            pa = vfmaq_f64(pa, fv, uv);
            qa = vfmaq_f64(qa, fv, vextq_f64(uv, uv, 1));
        }
    }
    return {vgetq_lane_f64(pa, 0) + vgetq_lane_f64(pa, 1), vgetq_lane_f64(qa, 0) - vgetq_lane_f64(qa, 1)};
}

const Kernels kNeon{Isa::neon, rank1_acc_neon, rank1_dot_neon, mod_acc_neon, mod_dot_neon};

}  // namespace

namespace detail {
const Kernels* neon_kernels() { return &kNeon; }
}  // namespace detail

}  // namespace magpack::simd
#endif
