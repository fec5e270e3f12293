#include <doctest.h>

#include <random>

#include "magpack/simd.hpp"

using namespace magpack;

namespace {

std::vector<cplx> rnd(std::mt19937& r, std::size_t n) {
    std::normal_distribution<double> N;
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(N(r), N(r));
    return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("vector kernels match the scalar reference") {
    const simd::Kernels& ref = simd::kernels(simd::Isa::scalar);
    std::mt19937 r(21);
    int tested = 0;
    for (simd::Isa isa : {simd::Isa::avx2, simd::Isa::neon}) {
        if (!simd::isa_available(isa)) continue;
        ++tested;
        const simd::Kernels& k = simd::kernels(isa);
        for (auto [n1, n2] : {std::pair{1, 1}, std::pair{3, 5}, std::pair{17, 33}, std::pair{64, 63}}) {
            const std::size_t stride = static_cast<std::size_t>(n2) + 7;
            const auto f1 = rnd(r, n1), f2 = rnd(r, n2), p = rnd(r, static_cast<std::size_t>(n1) * n2);
            const auto u = rnd(r, stride * n1);
            const cplx c(0.3, -1.7);
            auto a = u, b = u;
            ref.rank1_acc(a.data(), stride, f1.data(), n1, f2.data(), n2, c);
            k.rank1_acc(b.data(), stride, f1.data(), n1, f2.data(), n2, c);
            CHECK(max_diff(a, b) < 1e-12);
            a = u, b = u;
            ref.mod_acc(a.data(), stride, p.data(), n1, n2, c);
            k.mod_acc(b.data(), stride, p.data(), n1, n2, c);
            CHECK(max_diff(a, b) < 1e-12);
            CHECK(std::abs(ref.rank1_dot(u.data(), stride, f1.data(), n1, f2.data(), n2) -
                           k.rank1_dot(u.data(), stride, f1.data(), n1, f2.data(), n2)) < 1e-10);
            CHECK(std::abs(ref.mod_dot(u.data(), stride, p.data(), n1, n2) - k.mod_dot(u.data(), stride, p.data(), n1, n2)) <
                  1e-10);
        }
    }
    MESSAGE("vector ISAs tested: " << tested << ", active: " << std::string(simd::isa_name(simd::active().isa)));
    for (simd::Isa isa : {simd::Isa::avx2, simd::Isa::neon})
        if (!simd::isa_available(isa)) CHECK_THROWS_AS(simd::kernels(isa), CapabilityError);
}

TEST_CASE("switching the active table") {
    const simd::Isa before = simd::active().isa;
    simd::set_active(simd::Isa::scalar);
    CHECK(simd::active().isa == simd::Isa::scalar);
    simd::set_active(before);
    CHECK(simd::active().isa == before);
}
