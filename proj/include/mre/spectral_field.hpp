#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "mre/fft.hpp"
#include "mre/grid.hpp"

namespace mre {

/// Fourier coefficients of a real, mean-zero, divergence-free vector field
/// on the torus, stored dense in FFT bin order (comp[c][idx] = \hat B_k[c]).
///
/// Convention: B(x) = sum_k \hat B_k e^{ik.x} and inner products are plain
/// L^2 integrals over [-pi,pi]^d, so ||B||_{L^2}^2 = (2pi)^d sum_k |\hat B_k|^2.
/// The zero mode and the Nyquist rows are identically zero.
struct SpectralField {
    GridSpec grid;
    std::array<std::vector<cplx>, 3> comp;

    SpectralField() = default;
    explicit SpectralField(const GridSpec& g) : grid(g) {
        g.validate();
        for (int c = 0; c < g.d; ++c) comp[c].assign(g.points(), cplx{0.0, 0.0});
    }

    cplx& at(int c, const Wave& k) { return comp[c][index_of_wave(grid, k)]; }
    cplx at(int c, const Wave& k) const { return comp[c][index_of_wave(grid, k)]; }
};

/// Mean-zero scalar spectral function on the same lattice (flux functions,
/// vector-potential components, nonlinear products).
struct SpectralScalar {
    GridSpec grid;
    std::vector<cplx> coef;

    SpectralScalar() = default;
    explicit SpectralScalar(const GridSpec& g) : grid(g) { coef.assign(g.points(), cplx{0.0, 0.0}); }

    cplx& at(const Wave& k) { return coef[index_of_wave(grid, k)]; }
    cplx at(const Wave& k) const { return coef[index_of_wave(grid, k)]; }
};

/// Real collocation samples, one vector of n^d values per component.
struct PhysicalField {
    GridSpec grid;
    std::array<std::vector<double>, 3> comp;
};

enum class NormKind { homogeneous, inhomogeneous };

namespace detail {

/// Zero the slots excluded from the retained band (zero mode, Nyquist rows).
inline void scrub_excluded(const GridSpec& g, std::vector<cplx>& a) {
    for_each_slot(g, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(g, k)) a[idx] = 0.0;
    });
}

inline void check_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace detail

inline SpectralField zero_field(const GridSpec& g) { return SpectralField(g); }

// ---------------------------------------------------------------------------
// Leray projection and fractional operators
// ---------------------------------------------------------------------------

/// Mode-wise Leray projection \hat g_k <- (I - k kT/|k|^2) \hat g_k.
/// Also scrubs the zero mode and Nyquist rows, so the output satisfies the
/// divergence-free and mean-zero invariants on any raw input.
inline SpectralField project_divfree(const SpectralField& g) {
    SpectralField out = g;
    const int d = g.grid.d;
    for_each_slot(g.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(g.grid, k)) {
            for (int c = 0; c < d; ++c) out.comp[c][idx] = 0.0;
            return;
        }
        const double k2 = static_cast<double>(wave_norm2(k));
        cplx kdot = 0.0;
        for (int c = 0; c < d; ++c) kdot += static_cast<double>(k[c]) * g.comp[c][idx];
        kdot /= k2;
        for (int c = 0; c < d; ++c) out.comp[c][idx] = g.comp[c][idx] - kdot * static_cast<double>(k[c]);
    });
    return out;
}

/// (-Delta)^s as the Fourier multiplier |k|^{2s}; total for any real s since
/// the zero mode is absent.
inline SpectralField frac_laplacian(const SpectralField& B, double s) {
    SpectralField out = B;
    for_each_slot(B.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(B.grid, k)) {
            for (int c = 0; c < B.grid.d; ++c) out.comp[c][idx] = 0.0;
            return;
        }
        const double mult = std::pow(static_cast<double>(wave_norm2(k)), s);
        for (int c = 0; c < B.grid.d; ++c) out.comp[c][idx] = B.comp[c][idx] * mult;
    });
    return out;
}

inline SpectralScalar frac_laplacian(const SpectralScalar& f, double s) {
    SpectralScalar out = f;
    for_each_slot(f.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(f.grid, k)) {
            out.coef[idx] = 0.0;
            return;
        }
        out.coef[idx] = f.coef[idx] * std::pow(static_cast<double>(wave_norm2(k)), s);
    });
    return out;
}

// ---------------------------------------------------------------------------
// curl, curl^{-1} and gradients
// ---------------------------------------------------------------------------

/// d=3 curl: (curl B)^ = i k x \hat B.
inline SpectralField curl(const SpectralField& B) {
    if (B.grid.d != 3) throw std::invalid_argument("curl: requires d=3");
    SpectralField out(B.grid);
    for_each_slot(B.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(B.grid, k)) return;
        const cplx i{0.0, 1.0};
        const cplx b0 = B.comp[0][idx], b1 = B.comp[1][idx], b2 = B.comp[2][idx];
        out.comp[0][idx] = i * (static_cast<double>(k[1]) * b2 - static_cast<double>(k[2]) * b1);
        out.comp[1][idx] = i * (static_cast<double>(k[2]) * b0 - static_cast<double>(k[0]) * b2);
        out.comp[2][idx] = i * (static_cast<double>(k[0]) * b1 - static_cast<double>(k[1]) * b0);
    });
    return out;
}

/// d=2 flux function phi = curl^{-1}B = -grad_perp . (-Delta)^{-1} B,
/// the mean-zero scalar with grad_perp phi = B.
inline SpectralScalar curl_inv_scalar(const SpectralField& B) {
    if (B.grid.d != 2) throw std::invalid_argument("curl_inv_scalar: requires d=2");
    SpectralScalar phi(B.grid);
    const cplx i{0.0, 1.0};
    for_each_slot(B.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(B.grid, k)) return;
        const double k2 = static_cast<double>(wave_norm2(k));
        phi.coef[idx] = i * (static_cast<double>(k[1]) * B.comp[0][idx] -
                             static_cast<double>(k[0]) * B.comp[1][idx]) /
                        k2;
    });
    return phi;
}

/// d=3 vector potential A = curl^{-1}B = curl (-Delta)^{-1} B, the mean-zero
/// divergence-free field with curl A = B.
inline SpectralField curl_inv_field(const SpectralField& B) {
    if (B.grid.d != 3) throw std::invalid_argument("curl_inv_field: requires d=3");
    SpectralField A = curl(B);
    for_each_slot(A.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(A.grid, k)) return;
        const double k2 = static_cast<double>(wave_norm2(k));
        for (int c = 0; c < 3; ++c) A.comp[c][idx] /= k2;
    });
    return A;
}

/// d=2 grad_perp phi = (-d_y phi, d_x phi).
inline SpectralField perp_grad(const SpectralScalar& phi) {
    if (phi.grid.d != 2) throw std::invalid_argument("perp_grad: requires d=2");
    SpectralField out(phi.grid);
    const cplx i{0.0, 1.0};
    for_each_slot(phi.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(phi.grid, k)) return;
        out.comp[0][idx] = -i * static_cast<double>(k[1]) * phi.coef[idx];
        out.comp[1][idx] = i * static_cast<double>(k[0]) * phi.coef[idx];
    });
    return out;
}

// ---------------------------------------------------------------------------
// Inner products and norms
// ---------------------------------------------------------------------------

/// L^2(T^d) inner product, (A,B) = (2pi)^d sum_k \hat A_k . conj(\hat B_k).
inline double l2_inner(const SpectralField& A, const SpectralField& B) {
    detail::check_same_grid(A.grid, B.grid, "l2_inner");
    double s = 0.0;
    for (int c = 0; c < A.grid.d; ++c) {
        const auto& a = A.comp[c];
        const auto& b = B.comp[c];
        for (std::size_t i = 0; i < a.size(); ++i)
            s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    }
    return A.grid.volume() * s;
}

inline double l2_inner(const SpectralScalar& a, const SpectralScalar& b) {
    detail::check_same_grid(a.grid, b.grid, "l2_inner");
    double s = 0.0;
    for (std::size_t i = 0; i < a.coef.size(); ++i)
        s += a.coef[i].real() * b.coef[i].real() + a.coef[i].imag() * b.coef[i].imag();
    return a.grid.volume() * s;
}

inline double l2_norm2(const SpectralField& B) { return l2_inner(B, B); }
inline double l2_norm2(const SpectralScalar& f) { return l2_inner(f, f); }
inline double l2_norm(const SpectralField& B) { return std::sqrt(l2_norm2(B)); }
inline double l2_norm(const SpectralScalar& f) { return std::sqrt(l2_norm2(f)); }

namespace detail {

inline double sobolev_weight(int k2, double m, NormKind kind) {
    const double base = kind == NormKind::homogeneous ? static_cast<double>(k2)
                                                      : static_cast<double>(k2) + 1.0;
    return std::pow(base, m);
}

}  // namespace detail

/// Sobolev norm via the weighted Parseval sum; homogeneous |k|^{2m} weights
/// give ||(-Delta)^{m/2} . ||_{L^2}, inhomogeneous use (|k|^2+1)^m.
inline double sobolev_norm2(const SpectralField& B, double m, NormKind kind = NormKind::homogeneous) {
    double s = 0.0;
    for_each_slot(B.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(B.grid, k)) return;
        double a2 = 0.0;
        for (int c = 0; c < B.grid.d; ++c) a2 += std::norm(B.comp[c][idx]);
        if (a2 != 0.0) s += detail::sobolev_weight(wave_norm2(k), m, kind) * a2;
    });
    return B.grid.volume() * s;
}

inline double sobolev_norm2(const SpectralScalar& f, double m, NormKind kind = NormKind::homogeneous) {
    double s = 0.0;
    for_each_slot(f.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(f.grid, k)) return;
        const double a2 = std::norm(f.coef[idx]);
        if (a2 != 0.0) s += detail::sobolev_weight(wave_norm2(k), m, kind) * a2;
    });
    return f.grid.volume() * s;
}

inline double sobolev_norm(const SpectralField& B, double m, NormKind kind = NormKind::homogeneous) {
    return std::sqrt(sobolev_norm2(B, m, kind));
}

inline double sobolev_norm(const SpectralScalar& f, double m, NormKind kind = NormKind::homogeneous) {
    return std::sqrt(sobolev_norm2(f, m, kind));
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

namespace detail {

/// The collocation lattice starts at -pi, not 0, so DFT bin phases pick up
/// (-1)^{i0+i1+i2} relative to the plain transform.
inline void apply_origin_phase(const GridSpec& g, std::vector<cplx>& a) {
    const int n = g.n, m2 = g.n2();
    std::size_t idx = 0;
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < m2; ++i2, ++idx)
                if ((i0 + i1 + i2) & 1) a[idx] = -a[idx];
}

inline std::vector<double> spectral_to_samples(const GridSpec& g, std::vector<cplx> a) {
    apply_origin_phase(g, a);
    fft_nd(g, a, /*inverse=*/true);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
    return out;
}

inline std::vector<cplx> samples_to_spectral(const GridSpec& g, const std::vector<double>& s) {
    if (s.size() != g.points()) throw std::invalid_argument("to_spectral: grid mismatch");
    std::vector<cplx> a(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) a[i] = s[i];
    fft_nd(g, a, /*inverse=*/false);
    const double inv = 1.0 / static_cast<double>(g.points());
    for (auto& v : a) v *= inv;
    apply_origin_phase(g, a);
    scrub_excluded(g, a);
    return a;
}

}  // namespace detail

/// Collocation samples of B on the lattice of grid_point().
inline PhysicalField to_physical(const SpectralField& B) {
    PhysicalField out;
    out.grid = B.grid;
    for (int c = 0; c < B.grid.d; ++c) out.comp[c] = detail::spectral_to_samples(B.grid, B.comp[c]);
    return out;
}

inline std::vector<double> to_physical(const SpectralScalar& f) {
    return detail::spectral_to_samples(f.grid, f.coef);
}

/// Inverse transform of real samples. Reality holds by construction; the
/// zero mode and Nyquist rows are dropped, so round trips are exact only for
/// mean-zero band-limited input (the SpectralField contract).
inline SpectralField to_spectral(const PhysicalField& samples) {
    SpectralField out(samples.grid);
    for (int c = 0; c < samples.grid.d; ++c)
        out.comp[c] = detail::samples_to_spectral(samples.grid, samples.comp[c]);
    return out;
}

inline SpectralScalar to_spectral_scalar(const GridSpec& g, const std::vector<double>& samples) {
    SpectralScalar out(g);
    out.coef = detail::samples_to_spectral(g, samples);
    return out;
}

// ---------------------------------------------------------------------------
// Dealiased products
// ---------------------------------------------------------------------------

/// Zero every mode with any |k_i| > floor(n/3) (2/3 rule).
inline void dealias_truncate(const GridSpec& g, std::vector<cplx>& a) {
    const int lim = g.dealias_limit();
    for_each_slot(g, [&](std::size_t idx, const Wave& k) {
        if (std::abs(k[0]) > lim || std::abs(k[1]) > lim || std::abs(k[2]) > lim) a[idx] = 0.0;
    });
}

inline void dealias_truncate(SpectralField& B) {
    for (int c = 0; c < B.grid.d; ++c) dealias_truncate(B.grid, B.comp[c]);
}

inline void dealias_truncate(SpectralScalar& f) { dealias_truncate(f.grid, f.coef); }

/// Pointwise product of two sample arrays, transformed to spectral space and
/// truncated to the dealias band. Inputs supported inside the band make the
/// result an exact Galerkin product whenever 3*floor(n/3) < n.
inline SpectralScalar dealias_product(const GridSpec& g, const std::vector<double>& a,
                                      const std::vector<double>& b) {
    if (a.size() != g.points() || b.size() != g.points())
        throw std::invalid_argument("dealias_product: grid mismatch");
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
    SpectralScalar out = to_spectral_scalar(g, prod);
    dealias_truncate(out);
    return out;
}

// ---------------------------------------------------------------------------
// Validation helpers
// ---------------------------------------------------------------------------

/// Largest |k . \hat B_k| / |\hat B_k| over modes with nonnegligible amplitude.
inline double max_relative_divergence(const SpectralField& B) {
    double worst = 0.0;
    double amax = 0.0;
    for (int c = 0; c < B.grid.d; ++c)
        for (const auto& v : B.comp[c]) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) return 0.0;
    for_each_slot(B.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(B.grid, k)) return;
        cplx div = 0.0;
        double a = 0.0;
        for (int c = 0; c < B.grid.d; ++c) {
            div += static_cast<double>(k[c]) * B.comp[c][idx];
            a = std::max(a, std::abs(B.comp[c][idx]));
        }
        if (a > 1e-14 * amax)
            worst = std::max(worst, std::abs(div) / (std::sqrt(static_cast<double>(wave_norm2(k))) * a));
    });
    return worst;
}

/// Largest |\hat B_{-k} - conj(\hat B_k)| over the band.
inline double reality_defect(const SpectralField& B) {
    double worst = 0.0;
    for_each_slot(B.grid, [&](std::size_t idx, const Wave& k) {
        if (!in_retained_band(B.grid, k)) return;
        const Wave mk{-k[0], -k[1], -k[2]};
        const std::size_t jdx = index_of_wave(B.grid, mk);
        for (int c = 0; c < B.grid.d; ++c)
            worst = std::max(worst, std::abs(B.comp[c][jdx] - std::conj(B.comp[c][idx])));
    });
    return worst;
}

inline bool is_finite(const SpectralField& B) {
    for (int c = 0; c < B.grid.d; ++c)
        for (const auto& v : B.comp[c])
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

// Arithmetic used by integrators; pure value semantics at call sites.
inline void axpy(SpectralField& y, double a, const SpectralField& x) {
    detail::check_same_grid(y.grid, x.grid, "axpy");
    for (int c = 0; c < y.grid.d; ++c)
        for (std::size_t i = 0; i < y.comp[c].size(); ++i) y.comp[c][i] += a * x.comp[c][i];
}

inline SpectralField operator+(SpectralField a, const SpectralField& b) {
    axpy(a, 1.0, b);
    return a;
}

inline SpectralField operator-(SpectralField a, const SpectralField& b) {
    axpy(a, -1.0, b);
    return a;
}

inline SpectralField operator*(double s, SpectralField a) {
    for (int c = 0; c < a.grid.d; ++c)
        for (auto& v : a.comp[c]) v *= s;
    return a;
}

}  // namespace mre
