#pragma once

#include <cstddef>

#include "magpack/core.hpp"

// Complex stamp kernels used by synthesis and flowed-frame analysis.
// Scalar reference plus AVX2 / NEON variants picked at runtime.
namespace magpack::simd {

enum class Isa { scalar, avx2, neon };

// out[i*stride + j] += c * f1[i] * f2[j]
using Rank1AccFn = void (*)(cplx* out, std::size_t stride, const cplx* f1, int n1, const cplx* f2,
                            int n2, cplx c);
// sum_ij conj(f1[i] f2[j]) u[i*stride + j]
using Rank1DotFn = cplx (*)(const cplx* u, std::size_t stride, const cplx* f1, int n1,
                            const cplx* f2, int n2);
// out[i*stride + j] += c * p[i*n2 + j]
using ModAccFn = void (*)(cplx* out, std::size_t stride, const cplx* p, int n1, int n2, cplx c);
// sum_ij conj(p[i*n2 + j]) u[i*stride + j]
using ModDotFn = cplx (*)(const cplx* u, std::size_t stride, const cplx* p, int n1, int n2);

struct Kernels {
    Isa isa;
    Rank1AccFn rank1_acc;
    Rank1DotFn rank1_dot;
    ModAccFn mod_acc;
    ModDotFn mod_dot;
};

const char* isa_name(Isa isa);
bool isa_available(Isa isa);
// Kernel table for a given ISA; throws CapabilityError if unavailable on this CPU.
const Kernels& kernels(Isa isa);
// Active table. Defaults to the best available; MAGPACK_SIMD=scalar|avx2|neon overrides.
const Kernels& active();
void set_active(Isa isa);

namespace detail {
const Kernels& scalar_kernels();
const Kernels* avx2_kernels();  // nullptr when not compiled in
const Kernels* neon_kernels();
}  // namespace detail

}  // namespace magpack::simd
