#include <cmath>
#include <numbers>

#include "phi4/stochastic.hpp"

namespace phi4 {

namespace {

constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// (0, 1), 53 bits
inline double uniform(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return (static_cast<double>(x & ((1ULL << 53) - 1)) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
    for (int r = 0; r < 10; ++r) {
        std::uint32_t h0, l0, h1, l1;
        mulhilo(M0, c[0], h0, l0);
        mulhilo(M1, c[2], h1, l1);
        c = {h1 ^ c[1] ^ k[0], l1, h0 ^ c[3] ^ k[1], l0};
        k[0] += W0;
        k[1] += W1;
    }
    return c;
}

std::array<double, 4> philox_normals(std::uint64_t seed, std::uint64_t stream, std::uint64_t sample,
                                     std::uint64_t mode) {
    const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::array<double, 4> out{};
    for (std::uint32_t half = 0; half < 2; ++half) {
        const PhiloxCounter ctr{static_cast<std::uint32_t>(mode), static_cast<std::uint32_t>(sample),
                                static_cast<std::uint32_t>(stream),
                                (static_cast<std::uint32_t>(stream >> 32) << 1) | half};
        const auto r = philox4x32(ctr, key);
        // both uniforms use a full 64-bit draw
        const double u1 = uniform(r[0], r[1]), u2 = uniform(r[2], r[3]);
        const double rad = std::sqrt(-2.0 * std::log(u1)), ang = 2.0 * std::numbers::pi * u2;
        out[2 * half] = rad * std::cos(ang);
        out[2 * half + 1] = rad * std::sin(ang);
    }
    return out;
}

}  // namespace phi4
