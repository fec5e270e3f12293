#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

#include "magpack/core.hpp"

namespace magpack {

inline std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return __builtin_bswap64(v);
}

inline void write_le_complex(std::ostream& os, const std::vector<cplx>& v) {
    std::vector<std::uint64_t> buf(2 * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double re = v[i].real(), im = v[i].imag();
        std::uint64_t a, b;
        std::memcpy(&a, &re, 8);
        std::memcpy(&b, &im, 8);
        buf[2 * i] = to_le(a);
        buf[2 * i + 1] = to_le(b);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 8));
}

inline bool read_le_complex(std::istream& is, std::vector<cplx>& v) {
    std::vector<std::uint64_t> buf(2 * v.size());
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 8));
    if (static_cast<std::size_t>(is.gcount()) != buf.size() * 8) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::uint64_t a = to_le(buf[2 * i]), b = to_le(buf[2 * i + 1]);
        double re, im;
        std::memcpy(&re, &a, 8);
        std::memcpy(&im, &b, 8);
        v[i] = {re, im};
    }
    return true;
}

}  // namespace magpack
