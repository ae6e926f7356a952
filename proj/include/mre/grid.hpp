#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mre {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Integer wavevector on Z^3; the third entry is 0 for d=2.
using Wave = std::array<int, 3>;

inline int wave_norm2(const Wave& k) {
    return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
}

inline bool wave_is_zero(const Wave& k) { return k[0] == 0 && k[1] == 0 && k[2] == 0; }

inline bool wave_lex_less(const Wave& a, const Wave& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[2] < b[2];
}

/// Uniform n^d collocation lattice on the torus [-pi,pi)^d.
/// Retained spectral band is |k_i| <= n/2 - 1 per axis; the Nyquist row and
/// the zero mode are excluded from every field.
struct GridSpec {
    int d = 2;
    int n = 16;

    void validate() const {
        if (d != 2 && d != 3) throw std::invalid_argument("GridSpec: d must be 2 or 3");
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("GridSpec: n must be even and >= 8, got " + std::to_string(n));
    }

    std::size_t points() const {
        std::size_t p = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
        return d == 3 ? p * static_cast<std::size_t>(n) : p;
    }

    /// Extent of the third axis in the unified d=2/3 index layout.
    int n2() const { return d == 3 ? n : 1; }

    int max_wave() const { return n / 2 - 1; }

    /// 2/3-rule band: modes with any |k_i| > dealias_limit() are zeroed
    /// after nonlinear products.
    int dealias_limit() const { return n / 3; }

    double dx() const { return kTwoPi / n; }

    double volume() const { return d == 3 ? kTwoPi * kTwoPi * kTwoPi : kTwoPi * kTwoPi; }

    bool operator==(const GridSpec& o) const { return d == o.d && n == o.n; }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Signed frequency of FFT bin i on an n-point axis.
inline int freq_of_bin(int i, int n) { return i <= n / 2 - 1 ? i : i - n; }

/// FFT bin of a signed frequency; valid for |k| <= n/2 - 1.
inline int bin_of_freq(int k, int n) { return k >= 0 ? k : k + n; }

inline std::size_t flat_index(const GridSpec& g, int i0, int i1, int i2) {
    return (static_cast<std::size_t>(i0) * g.n + i1) * g.n2() + i2;
}

/// Flat index of the coefficient slot for wavevector k (must be in band).
inline std::size_t index_of_wave(const GridSpec& g, const Wave& k) {
    return flat_index(g, bin_of_freq(k[0], g.n), bin_of_freq(k[1], g.n),
                      g.d == 3 ? bin_of_freq(k[2], g.n) : 0);
}

inline bool in_retained_band(const GridSpec& g, const Wave& k) {
    const int m = g.max_wave();
    if (std::abs(k[0]) > m || std::abs(k[1]) > m) return false;
    if (g.d == 3) return std::abs(k[2]) <= m;
    return k[2] == 0;
}

/// Visit every index slot with its signed wavevector. Slots on the Nyquist
/// rows are visited too (with the aliased negative frequency); callers that
/// need only retained modes should test in_retained_band.
template <class F>
inline void for_each_slot(const GridSpec& g, F&& f) {
    const int n = g.n, m2 = g.n2();
    std::size_t idx = 0;
    for (int i0 = 0; i0 < n; ++i0) {
        const int k0 = freq_of_bin(i0, n);
        for (int i1 = 0; i1 < n; ++i1) {
            const int k1 = freq_of_bin(i1, n);
            for (int i2 = 0; i2 < m2; ++i2, ++idx) {
                const int k2 = g.d == 3 ? freq_of_bin(i2, n) : 0;
                f(idx, Wave{k0, k1, k2});
            }
        }
    }
}

/// Physical coordinates of lattice site (i0,i1,i2) on [-pi,pi)^d.
inline std::array<double, 3> grid_point(const GridSpec& g, int i0, int i1, int i2) {
    const double h = g.dx();
    return {-std::numbers::pi + h * i0, -std::numbers::pi + h * i1,
            g.d == 3 ? -std::numbers::pi + h * i2 : 0.0};
}

}  // namespace mre
