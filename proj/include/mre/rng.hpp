#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mre {

/// Counter-based Gaussian streams (Philox4x32-10, Salmon et al. SC'11).
/// A draw is addressed by (seed, trajectory, stream, step, index); identical
/// addresses give identical values on every platform and thread schedule,
/// which is what makes ensemble runs and checkpoint resumes bit-exact.
namespace philox {

inline constexpr std::uint32_t kW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kM4x32B = 0xCD9E8D57u;

struct Block {
    std::uint32_t v[4];
};

inline void round_once(std::uint32_t ctr[4], std::uint32_t key[2]) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM4x32A) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM4x32B) * ctr[2];
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0), hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1), hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t out0 = hi1 ^ ctr[1] ^ key[0];
    const std::uint32_t out2 = hi0 ^ ctr[3] ^ key[1];
    ctr[0] = out0;
    ctr[1] = lo1;
    ctr[2] = out2;
    ctr[3] = lo0;
}

inline Block generate(std::uint64_t key64, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                      std::uint32_t c3) {
    std::uint32_t ctr[4] = {c0, c1, c2, c3};
    std::uint32_t key[2] = {static_cast<std::uint32_t>(key64),
                            static_cast<std::uint32_t>(key64 >> 32)};
    for (int i = 0; i < 10; ++i) {
        round_once(ctr, key);
        key[0] += kW32A;
        key[1] += kW32B;
    }
    return Block{{ctr[0], ctr[1], ctr[2], ctr[3]}};
}

}  // namespace philox

/// Uniform in (0,1] from 53 random bits; never 0, so log() is safe.
inline double uniform_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1p-53;
}

/// Address of one Gaussian draw.
struct DrawKey {
    std::uint64_t seed = 0;
    std::uint32_t trajectory = 0;
    std::uint32_t stream = 0;  // forcing mode index j (or another channel id)
    std::uint64_t step = 0;
    std::uint32_t index = 0;  // draw number within (trajectory, stream, step)
};

/// Standard normal at the given address via Box-Muller on one Philox block.
inline double gaussian(const DrawKey& k) {
    const std::uint32_t block = k.index >> 1;
    const philox::Block b =
        philox::generate(k.seed, k.trajectory, k.stream,
                         static_cast<std::uint32_t>(k.step),
                         static_cast<std::uint32_t>(k.step >> 32) ^ (block * 0x85EBCA6Bu + 0x1u));
    const std::uint64_t u0 = (static_cast<std::uint64_t>(b.v[0]) << 32) | b.v[1];
    const std::uint64_t u1 = (static_cast<std::uint64_t>(b.v[2]) << 32) | b.v[3];
    const double r = std::sqrt(-2.0 * std::log(uniform_open(u0)));
    const double theta = 2.0 * std::numbers::pi * uniform_open(u1);
    return (k.index & 1) ? r * std::sin(theta) : r * std::cos(theta);
}

}  // namespace mre
