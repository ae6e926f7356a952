#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mre/spectral_field.hpp"

namespace mre {

/// Exponents and resistivity of the forced system; gamma > d/2 is the
/// subcritical well-posedness regime and is enforced.
struct PhysicsParams {
    double gamma = 2.0;  // velocity hyperviscosity exponent
    double alpha = 1.0;  // resistivity exponent
    double kappa = 0.0;  // resistivity

    void validate(int d) const {
        if (!(gamma > 0.5 * d))
            throw std::invalid_argument("PhysicsParams: gamma must exceed d/2");
        if (!(alpha >= 1.0)) throw std::invalid_argument("PhysicsParams: alpha must be >= 1");
        if (!(kappa >= 0.0)) throw std::invalid_argument("PhysicsParams: kappa must be >= 0");
    }

    static double default_gamma(int d) { return 0.5 * d + 1.0; }
};

namespace dyn_detail {

/// T_j = sum_i d_i(X_i Y_j) assembled spectrally from collocation products,
/// dealiased to the 2/3 band. X and Y are physical samples on the same grid.
inline SpectralField divergence_of_product(const GridSpec& g, const PhysicalField& X,
                                           const PhysicalField& Y, bool antisymmetrize) {
    const int d = g.d;
    // spectral products S[i][j] for needed (i,j)
    std::array<std::array<SpectralScalar, 3>, 3> S;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (antisymmetrize && j <= i) continue;  // use T_ji = -T_ij
            if (!antisymmetrize && j < i) continue;  // symmetric: use S_ji = S_ij
            std::vector<double> prod(g.points());
            const auto& xi = X.comp[i];
            const auto& yj = Y.comp[j];
            if (antisymmetrize) {
                const auto& yi = Y.comp[i];
                const auto& xj = X.comp[j];
                for (std::size_t p = 0; p < prod.size(); ++p)
                    prod[p] = xi[p] * yj[p] - yi[p] * xj[p];
            } else {
                for (std::size_t p = 0; p < prod.size(); ++p) prod[p] = xi[p] * yj[p];
            }
            S[i][j] = to_spectral_scalar(g, prod);
            dealias_truncate(S[i][j]);
        }

    SpectralField out(g);
    const cplx iunit{0.0, 1.0};
    for_each_slot(g, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(g, k)) return;
        for (int j = 0; j < d; ++j) {
            cplx acc = 0.0;
            for (int i = 0; i < d; ++i) {
                cplx sij;
                if (antisymmetrize) {
                    if (i == j) continue;
                    sij = i < j ? S[i][j].coef[idx] : -S[j][i].coef[idx];
                } else {
                    sij = i <= j ? S[i][j].coef[idx] : S[j][i].coef[idx];
                }
                acc += static_cast<double>(k[i]) * sij;
            }
            out.comp[j][idx] = iunit * acc;
        }
    });
    return out;
}

}  // namespace dyn_detail

/// Pi(B . grad B) on the dealias band: the divergence of B (x) B, projected.
/// This equals (-Delta)^gamma u and is the MHS defect field.
inline SpectralField lorentz_divergence(const SpectralField& B) {
    const PhysicalField phys = to_physical(B);
    SpectralField F = dyn_detail::divergence_of_product(B.grid, phys, phys, /*antisymmetrize=*/false);
    return project_divfree(F);
}

/// Constitutive law u = K_gamma(B,B) = (-Delta)^{-gamma} Pi grad.(B (x) B),
/// evaluated pseudo-spectrally with 2/3 dealiasing.
inline SpectralField velocity(const SpectralField& B, double gamma) {
    return frac_laplacian(lorentz_divergence(B), -gamma);
}

/// grad.(B (x) u - u (x) B) = B.grad u - u.grad B for divergence-free fields;
/// antisymmetry makes the result divergence-free, the projection only scrubs
/// roundoff.
inline SpectralField transport_term(const SpectralField& B, const SpectralField& u) {
    detail::check_same_grid(B.grid, u.grid, "transport_term");
    const PhysicalField bp = to_physical(B);
    const PhysicalField up = to_physical(u);
    SpectralField T = dyn_detail::divergence_of_product(B.grid, bp, up, /*antisymmetrize=*/true);
    return project_divfree(T);
}

/// Deterministic drift -kappa(-Delta)^alpha B + grad.(B (x) u - u (x) B).
/// with_transport=false isolates the resistive multiplier (test hook).
inline SpectralField drift(const SpectralField& B, const PhysicsParams& params,
                           bool with_transport = true) {
    params.validate(B.grid.d);
    SpectralField out =
        params.kappa > 0.0 ? (-params.kappa) * frac_laplacian(B, params.alpha) : SpectralField(B.grid);
    if (with_transport) {
        const SpectralField u = velocity(B, params.gamma);
        axpy(out, 1.0, transport_term(B, u));
    }
    return out;
}

/// || Pi(B.grad B) ||_{H^order} (homogeneous weights); order -1 by default to
/// tolerate low regularity of the quadratic term near the limit.
inline double mhs_residual(const SpectralField& B, double norm_order = -1.0) {
    return sobolev_norm(lorentz_divergence(B), norm_order);
}

// ---------------------------------------------------------------------------
// Finite-Fourier-mode support classification
// ---------------------------------------------------------------------------

/// Geometry of the spectral support: finite Fourier mode equilibria must be
/// supported on a line through 0, a centered circle/sphere, or (d=3) a plane
/// through 0.
struct ModeSupportReport {
    std::vector<Wave> support;  // retained k with |coeff| > threshold (full symmetric set)
    bool on_line = false;
    bool on_circle_or_sphere = false;
    bool on_plane = false;  // d=3 only, rank <= 2
    std::string structure;  // "line", "circle", "sphere", "plane", combinations, or "none"
};

inline ModeSupportReport classify_finite_modes(const SpectralField& B, double amplitude_threshold) {
    ModeSupportReport rep;
    for_each_slot(B.grid, [&](std::size_t idx, const Wave& k) {
        if (wave_is_zero(k) || !in_retained_band(B.grid, k)) return;
        double a = 0.0;
        for (int c = 0; c < B.grid.d; ++c) a = std::max(a, std::abs(B.comp[c][idx]));
        if (a > amplitude_threshold) rep.support.push_back(k);
    });

    if (rep.support.empty()) {
        rep.structure = "none";
        return rep;
    }

    const int d = B.grid.d;
    // rank of the integer support set (0, 1, 2, or 3)
    int rank = 0;
    Wave u{0, 0, 0}, v{0, 0, 0};
    for (const auto& k : rep.support) {
        if (rank == 0) {
            u = k;
            rank = 1;
            continue;
        }
        if (rank == 1) {
            const long long cx = static_cast<long long>(u[1]) * k[2] - static_cast<long long>(u[2]) * k[1];
            const long long cy = static_cast<long long>(u[2]) * k[0] - static_cast<long long>(u[0]) * k[2];
            const long long cz = static_cast<long long>(u[0]) * k[1] - static_cast<long long>(u[1]) * k[0];
            if (cx != 0 || cy != 0 || cz != 0) {
                v = k;
                rank = 2;
            }
            continue;
        }
        if (rank == 2 && d == 3) {
            const long long nx = static_cast<long long>(u[1]) * v[2] - static_cast<long long>(u[2]) * v[1];
            const long long ny = static_cast<long long>(u[2]) * v[0] - static_cast<long long>(u[0]) * v[2];
            const long long nz = static_cast<long long>(u[0]) * v[1] - static_cast<long long>(u[1]) * v[0];
            if (nx * k[0] + ny * k[1] + nz * k[2] != 0) {
                rank = 3;
                break;
            }
        }
    }

    const int n2 = wave_norm2(rep.support.front());
    bool same_shell = true;
    for (const auto& k : rep.support)
        if (wave_norm2(k) != n2) same_shell = false;

    rep.on_line = rank <= 1;
    rep.on_circle_or_sphere = same_shell;
    rep.on_plane = d == 3 && rank <= 2;

    std::string s;
    if (rep.on_line) s += "line";
    if (rep.on_circle_or_sphere) s += std::string(s.empty() ? "" : "+") + (d == 2 ? "circle" : "sphere");
    if (rep.on_plane && !rep.on_line) s += std::string(s.empty() ? "" : "+") + "plane";
    rep.structure = s.empty() ? "none" : s;
    return rep;
}

}  // namespace mre
