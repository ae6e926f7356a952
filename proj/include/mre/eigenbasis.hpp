#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mre/spectral_field.hpp"

namespace mre {

enum class BasisFlavor { stokes, beltrami };

enum class ModeBranch : int {
    cos_branch = 0,
    sin_branch = 1,
    // rotation-operator branches, d=3 only; p,q carry tau=+|k|, r,s tau=-|k|
    p = 10,
    q = 11,
    r = 12,
    s = 13,
};

inline const char* branch_name(ModeBranch b) {
    switch (b) {
        case ModeBranch::cos_branch: return "cos";
        case ModeBranch::sin_branch: return "sin";
        case ModeBranch::p: return "p";
        case ModeBranch::q: return "q";
        case ModeBranch::r: return "r";
        case ModeBranch::s: return "s";
    }
    return "?";
}

namespace basis_detail {

using Vec3 = std::array<double, 3>;

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

/// Deterministic orthonormal directions a_k^l perpendicular to k.
/// Gram-Schmidt over coordinate axes in cyclic order starting just after the
/// largest |k_i| axis; every projection is even in k, so a_{-k} = a_k.
/// The canonical axis vectors come out as a_{e1}=e2, a_{e2}=e3, a_{e3}=e1,
/// which reproduces the p/q modes listed for the |k|=1 shell.
inline std::array<Vec3, 2> polarization_frame(int d, const Wave& k) {
    const double norm = std::sqrt(static_cast<double>(wave_norm2(k)));
    const Vec3 xi{k[0] / norm, k[1] / norm, k[2] / norm};
    int lead = 0;
    for (int i = 1; i < d; ++i)
        if (std::abs(k[i]) > std::abs(k[lead])) lead = i;

    std::array<Vec3, 2> a{Vec3{0, 0, 0}, Vec3{0, 0, 0}};
    int found = 0;
    for (int step = 1; step <= d && found < d - 1; ++step) {
        const int c = (lead + step) % d;
        Vec3 v{0, 0, 0};
        v[c] = 1.0;
        v = {v[0] - dot(v, xi) * xi[0], v[1] - dot(v, xi) * xi[1], v[2] - dot(v, xi) * xi[2]};
        for (int j = 0; j < found; ++j) {
            const double p = dot(v, a[j]);
            v = {v[0] - p * a[j][0], v[1] - p * a[j][1], v[2] - p * a[j][2]};
        }
        const double len = std::sqrt(dot(v, v));
        if (len < 1e-9) continue;
        a[found++] = scaled(v, 1.0 / len);
    }
    if (found != d - 1) throw std::logic_error("polarization_frame: degenerate frame");
    return a;
}

/// Symmetric half-space K with K U -K = Z_0^d; fixes mode identity.
inline bool in_half_space(int d, const Wave& k) {
    if (d == 2) return k[1] > 0 || (k[1] == 0 && k[0] > 0);
    if (k[2] != 0) return k[2] > 0;
    if (k[1] != 0) return k[1] > 0;
    return k[0] > 0;
}

}  // namespace basis_detail

/// One real orthonormal eigenfunction, stored sparsely by its coefficient at
/// +k (the -k coefficient is the conjugate).
struct BasisMode {
    int j = 0;  // 1-based index within an enumeration, 0 if standalone
    int d = 2;
    Wave k{0, 0, 0};
    ModeBranch branch = ModeBranch::cos_branch;
    int l = 1;  // polarization index, Stokes only
    double lambda = 0.0;
    double tau = 0.0;  // curl eigenvalue, Beltrami branches only
    std::array<cplx, 3> coeff_plus{};

    /// field += amp * e_j
    void add_to(SpectralField& field, double amp) const {
        const std::size_t ip = index_of_wave(field.grid, k);
        const Wave mk{-k[0], -k[1], -k[2]};
        const std::size_t im = index_of_wave(field.grid, mk);
        for (int c = 0; c < d; ++c) {
            field.comp[c][ip] += amp * coeff_plus[c];
            field.comp[c][im] += amp * std::conj(coeff_plus[c]);
        }
    }

    /// (B, e_j)_H
    double coordinate(const SpectralField& B) const {
        const std::size_t ip = index_of_wave(B.grid, k);
        double s = 0.0;
        for (int c = 0; c < d; ++c) {
            const cplx v = B.comp[c][ip] * std::conj(coeff_plus[c]);
            s += v.real();
        }
        return 2.0 * B.grid.volume() * s;
    }

    SpectralField materialize(const GridSpec& grid) const {
        if (grid.d != d) throw std::invalid_argument("BasisMode: dimension mismatch");
        if (!in_retained_band(grid, k)) throw std::invalid_argument("BasisMode: k outside grid band");
        SpectralField f(grid);
        add_to(f, 1.0);
        return f;
    }
};

/// Stokes eigenfunction a_k^l cos(k.x) or sin(k.x), unit L^2 norm with the
/// normalization 1/(2^{(d-1)/2} pi^{d/2}).
inline BasisMode stokes_mode(int d, const Wave& k, int l, ModeBranch parity) {
    if (d != 2 && d != 3) throw std::invalid_argument("stokes_mode: d must be 2 or 3");
    if (wave_is_zero(k)) throw std::invalid_argument("stokes_mode: k must be nonzero");
    if (l < 1 || l > d - 1) throw std::invalid_argument("stokes_mode: polarization index out of range");
    if (parity != ModeBranch::cos_branch && parity != ModeBranch::sin_branch)
        throw std::invalid_argument("stokes_mode: parity must be cos or sin");

    const auto frame = basis_detail::polarization_frame(d, k);
    const auto& a = frame[l - 1];
    const double norm = 1.0 / (std::pow(2.0, 0.5 * (d - 1)) * std::pow(std::numbers::pi, 0.5 * d));

    BasisMode m;
    m.d = d;
    m.k = k;
    m.branch = parity;
    m.l = l;
    m.lambda = static_cast<double>(wave_norm2(k));
    const cplx factor = parity == ModeBranch::cos_branch ? cplx{0.5 * norm, 0.0} : cplx{0.0, -0.5 * norm};
    for (int c = 0; c < d; ++c) m.coeff_plus[c] = factor * a[c];
    return m;
}

/// Beltrami eigenfunction of the rotation operator (d=3): one of the four
/// real branches built from the complex plane wave (a_k + i xi x a_k)/sqrt2,
/// normalized by (2pi)^{-3/2}. p,q have curl eigenvalue +|k|; r,s have -|k|.
inline BasisMode beltrami_mode(const Wave& k, ModeBranch branch) {
    if (wave_is_zero(k)) throw std::invalid_argument("beltrami_mode: k must be nonzero");
    if (branch != ModeBranch::p && branch != ModeBranch::q && branch != ModeBranch::r &&
        branch != ModeBranch::s)
        throw std::invalid_argument("beltrami_mode: branch must be p,q,r,s");

    const auto frame = basis_detail::polarization_frame(3, k);
    const auto& a = frame[0];
    const double norm = std::sqrt(static_cast<double>(wave_norm2(k)));
    const basis_detail::Vec3 xi{k[0] / norm, k[1] / norm, k[2] / norm};
    const auto w = basis_detail::cross(xi, a);
    const double c0 = 1.0 / std::pow(kTwoPi, 1.5);

    BasisMode m;
    m.d = 3;
    m.k = k;
    m.branch = branch;
    m.l = 1;
    m.lambda = static_cast<double>(wave_norm2(k));
    m.tau = (branch == ModeBranch::p || branch == ModeBranch::q) ? norm : -norm;

    // real pair alpha cos(k.x) + beta sin(k.x) has \hat B_{+k} = (alpha - i beta)/2
    basis_detail::Vec3 alpha{}, beta{};
    switch (branch) {
        case ModeBranch::p: alpha = a; beta = basis_detail::scaled(w, -1.0); break;
        case ModeBranch::q: alpha = w; beta = a; break;
        case ModeBranch::r: alpha = a; beta = w; break;
        case ModeBranch::s: alpha = basis_detail::scaled(w, -1.0); beta = a; break;
        default: break;
    }
    for (int c = 0; c < 3; ++c)
        m.coeff_plus[c] = 0.5 * c0 * cplx{alpha[c], -beta[c]};
    return m;
}

/// Ordered eigenbasis up to the eigenvalue cutoff.
struct BasisEnumeration {
    int d = 2;
    double lambda_max = 0.0;
    BasisFlavor flavor = BasisFlavor::stokes;
    std::vector<BasisMode> modes;
};

inline int branch_rank(ModeBranch b) {
    switch (b) {
        case ModeBranch::cos_branch: return 0;
        case ModeBranch::sin_branch: return 1;
        case ModeBranch::p: return 0;
        case ModeBranch::q: return 1;
        case ModeBranch::r: return 2;
        case ModeBranch::s: return 3;
    }
    return 9;
}

/// All modes with |k|^2 <= lambda_max over the fixed half-space, each shell
/// fully populated, ordered by eigenvalue with the (k, branch, l) tie-break.
inline BasisEnumeration enumerate_basis(int d, double lambda_max, BasisFlavor flavor) {
    if (d != 2 && d != 3) throw std::invalid_argument("enumerate_basis: d must be 2 or 3");
    if (lambda_max < 1.0) throw std::invalid_argument("enumerate_basis: lambda_max must be >= 1");
    if (flavor == BasisFlavor::beltrami && d != 3)
        throw std::invalid_argument("enumerate_basis: beltrami basis requires d=3");

    const int kmax = static_cast<int>(std::floor(std::sqrt(lambda_max) + 1e-9));
    BasisEnumeration out;
    out.d = d;
    out.lambda_max = lambda_max;
    out.flavor = flavor;

    const int zlo = d == 3 ? -kmax : 0, zhi = d == 3 ? kmax : 0;
    for (int k0 = -kmax; k0 <= kmax; ++k0)
        for (int k1 = -kmax; k1 <= kmax; ++k1)
            for (int k2 = zlo; k2 <= zhi; ++k2) {
                const Wave k{k0, k1, k2};
                if (wave_is_zero(k) || !basis_detail::in_half_space(d, k)) continue;
                if (wave_norm2(k) > lambda_max + 1e-9) continue;
                if (flavor == BasisFlavor::stokes) {
                    for (int l = 1; l <= d - 1; ++l) {
                        out.modes.push_back(stokes_mode(d, k, l, ModeBranch::cos_branch));
                        out.modes.push_back(stokes_mode(d, k, l, ModeBranch::sin_branch));
                    }
                } else {
                    for (ModeBranch b : {ModeBranch::p, ModeBranch::q, ModeBranch::r, ModeBranch::s})
                        out.modes.push_back(beltrami_mode(k, b));
                }
            }

    std::sort(out.modes.begin(), out.modes.end(), [](const BasisMode& a, const BasisMode& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.k != b.k) return wave_lex_less(a.k, b.k);
        if (branch_rank(a.branch) != branch_rank(b.branch))
            return branch_rank(a.branch) < branch_rank(b.branch);
        return a.l < b.l;
    });
    for (std::size_t i = 0; i < out.modes.size(); ++i) out.modes[i].j = static_cast<int>(i) + 1;
    return out;
}

/// d=2 scalar system sqrt(lambda_j) curl^{-1} e_j, orthonormal on L^2_av.
inline std::vector<SpectralScalar> curl_inv_basis(const BasisEnumeration& basis, const GridSpec& grid) {
    if (basis.d != 2) throw std::invalid_argument("curl_inv_basis: requires d=2");
    std::vector<SpectralScalar> out;
    out.reserve(basis.modes.size());
    for (const auto& m : basis.modes) {
        SpectralScalar dj = curl_inv_scalar(m.materialize(grid));
        const double s = std::sqrt(m.lambda);
        for (auto& v : dj.coef) v *= s;
        out.push_back(std::move(dj));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Named equilibria
// ---------------------------------------------------------------------------

namespace basis_detail {

inline void set_pair(SpectralField& f, int c, const Wave& k, cplx coeff_plus) {
    f.at(c, k) += coeff_plus;
    f.at(c, Wave{-k[0], -k[1], -k[2]}) += std::conj(coeff_plus);
}

}  // namespace basis_detail

/// ABC flow (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x);
/// satisfies curl(field) = field on the |k|=1 shell.
inline SpectralField abc_field(const GridSpec& grid, double A, double B, double C) {
    if (grid.d != 3) throw std::invalid_argument("abc_field: requires d=3");
    SpectralField f(grid);
    const cplx half{0.5, 0.0};
    const cplx mhalf_i{0.0, -0.5};
    basis_detail::set_pair(f, 0, Wave{0, 0, 1}, A * mhalf_i);  // A sin z
    basis_detail::set_pair(f, 0, Wave{0, 1, 0}, C * half);     // C cos y
    basis_detail::set_pair(f, 1, Wave{1, 0, 0}, B * mhalf_i);  // B sin x
    basis_detail::set_pair(f, 1, Wave{0, 0, 1}, A * half);     // A cos z
    basis_detail::set_pair(f, 2, Wave{0, 1, 0}, C * mhalf_i);  // C sin y
    basis_detail::set_pair(f, 2, Wave{1, 0, 0}, B * half);     // B cos x
    return f;
}

/// Sheared field (sin y, 0): the |k|^2 = 1 Stokes equilibrium of Figure 1(a).
inline SpectralField kolmogorov_field(const GridSpec& grid) {
    if (grid.d != 2) throw std::invalid_argument("kolmogorov_field: requires d=2");
    SpectralField f(grid);
    basis_detail::set_pair(f, 0, Wave{0, 1}, cplx{0.0, -0.5});
    return f;
}

/// Island field (sin x sin y, cos x cos y): the |k|^2 = 2 Stokes equilibrium
/// of Figure 1(b), flux function sin x cos y.
inline SpectralField island_field(const GridSpec& grid) {
    if (grid.d != 2) throw std::invalid_argument("island_field: requires d=2");
    SpectralScalar phi(grid);
    phi.at(Wave{1, 1, 0}) = cplx{0.0, -0.25};
    phi.at(Wave{-1, -1, 0}) = cplx{0.0, 0.25};
    phi.at(Wave{1, -1, 0}) = cplx{0.0, -0.25};
    phi.at(Wave{-1, 1, 0}) = cplx{0.0, 0.25};
    return perp_grad(phi);
}

}  // namespace mre
