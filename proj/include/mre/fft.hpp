#pragma once

#include <complex>
#include <map>
#include <vector>

#include "mre/grid.hpp"

namespace mre {

using cplx = std::complex<double>;

namespace fft_detail {

struct Plan {
    int n = 0;
    std::vector<int> bitrev;
    std::vector<cplx> twiddle_fwd;  // e^{-2pi i j/n}
    std::vector<cplx> twiddle_inv;  // e^{+2pi i j/n}
    bool pow2 = false;
};

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline const Plan& plan_for(int n) {
    thread_local std::map<int, Plan> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    Plan p;
    p.n = n;
    p.pow2 = is_pow2(n);
    p.twiddle_fwd.resize(n);
    p.twiddle_inv.resize(n);
    for (int j = 0; j < n; ++j) {
        const double ang = -kTwoPi * j / n;
        p.twiddle_fwd[j] = {std::cos(ang), std::sin(ang)};
        p.twiddle_inv[j] = std::conj(p.twiddle_fwd[j]);
    }
    if (p.pow2) {
        p.bitrev.resize(n);
        int bits = 0;
        while ((1 << bits) < n) ++bits;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (1 << b)) r |= 1 << (bits - 1 - b);
            p.bitrev[i] = r;
        }
    }
    return cache.emplace(n, std::move(p)).first->second;
}

/// In-place radix-2 Cooley-Tukey on a contiguous line of length n (power of 2).
inline void fft_pow2(cplx* a, const Plan& p, bool inverse) {
    const int n = p.n;
    for (int i = 0; i < n; ++i) {
        const int r = p.bitrev[i];
        if (i < r) std::swap(a[i], a[r]);
    }
    const auto& tw = inverse ? p.twiddle_inv : p.twiddle_fwd;
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len >> 1;
        const int step = n / len;
        for (int base = 0; base < n; base += len) {
            int tj = 0;
            for (int j = 0; j < half; ++j, tj += step) {
                const cplx w = tw[tj];
                const cplx u = a[base + j];
                const cplx v = a[base + j + half] * w;
                a[base + j] = u + v;
                a[base + j + half] = u - v;
            }
        }
    }
}

/// O(n^2) DFT for even non-power-of-two n. Desk-scale grids are powers of
/// two, so this path only serves odd cases like n=12 or n=24.
inline void dft_naive(cplx* a, const Plan& p, bool inverse) {
    const int n = p.n;
    const auto& tw = inverse ? p.twiddle_inv : p.twiddle_fwd;
    std::vector<cplx> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        cplx s = 0.0;
        for (int j = 0; j < n; ++j) s += a[j] * tw[(static_cast<long long>(j) * k) % n];
        out[k] = s;
    }
    for (int k = 0; k < n; ++k) a[k] = out[k];
}

inline void transform_line(cplx* a, const Plan& p, bool inverse) {
    if (p.pow2)
        fft_pow2(a, p, inverse);
    else
        dft_naive(a, p, inverse);
}

}  // namespace fft_detail

/// Unnormalized multi-dimensional DFT over the grid layout of GridSpec.
/// forward:  a_k <- sum_x a_x e^{-ik.x_idx};  inverse: a_x <- sum_k a_k e^{+ik.x_idx}.
inline void fft_nd(const GridSpec& g, std::vector<cplx>& a, bool inverse) {
    const int n = g.n;
    const auto& plan = fft_detail::plan_for(n);
    std::vector<cplx> line(static_cast<std::size_t>(n));
    const int axes = g.d;
    for (int axis = 0; axis < axes; ++axis) {
        std::size_t stride = 1;
        for (int ax = axis + 1; ax < axes; ++ax) stride *= static_cast<std::size_t>(n);
        const std::size_t block = stride * static_cast<std::size_t>(n);
        const std::size_t total = g.points();
        for (std::size_t base = 0; base < total; base += block) {
            for (std::size_t off = 0; off < stride; ++off) {
                cplx* src = a.data() + base + off;
                if (stride == 1) {
                    fft_detail::transform_line(src, plan, inverse);
                } else {
                    for (int i = 0; i < n; ++i) line[i] = src[static_cast<std::size_t>(i) * stride];
                    fft_detail::transform_line(line.data(), plan, inverse);
                    for (int i = 0; i < n; ++i) src[static_cast<std::size_t>(i) * stride] = line[i];
                }
            }
        }
    }
}

}  // namespace mre
