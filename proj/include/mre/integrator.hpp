#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mre/dynamics.hpp"
#include "mre/forcing.hpp"
#include "mre/spectral_field.hpp"

namespace mre {

/// Raised when a trajectory produces NaN/Inf or runs past the energy guard;
/// global well-posedness of the continuum system means this always signals a
/// discretization fault.
struct BlowupError : std::runtime_error {
    double t;
    explicit BlowupError(double when)
        : std::runtime_error("trajectory blow-up at t=" + std::to_string(when)), t(when) {}
};

/// One trajectory: time, absolute step counter (the rng cursor), field.
struct SimState {
    double t = 0.0;
    std::uint64_t step = 0;
    SpectralField B;
    PhysicsParams params;
    RngStream rng;
};

struct StepOptions {
    bool transport = true;
    bool noise = true;
    /// Noise increments composed from this many sub-draws per step; runs at
    /// dt and dt/2 with matching substep spacing consume identical draws.
    int noise_substeps = 1;
};

/// Heat factors e^{-kappa |k|^{2 alpha} dt} tabulated by |k|^2.
struct HeatFactors {
    std::vector<double> by_k2;

    static HeatFactors make(const GridSpec& g, const PhysicsParams& p, double dt) {
        const int m = g.max_wave();
        HeatFactors h;
        h.by_k2.assign(static_cast<std::size_t>(g.d) * m * m + 1, 1.0);
        if (p.kappa > 0.0)
            for (std::size_t k2 = 1; k2 < h.by_k2.size(); ++k2)
                h.by_k2[k2] = std::exp(-p.kappa * std::pow(static_cast<double>(k2), p.alpha) * dt);
        return h;
    }

    void apply(SpectralField& B) const {
        for_each_slot(B.grid, [&](std::size_t idx, const Wave& k) {
            if (wave_is_zero(k) || !in_retained_band(B.grid, k)) return;
            const double f = by_k2[static_cast<std::size_t>(wave_norm2(k))];
            for (int c = 0; c < B.grid.d; ++c) B.comp[c][idx] *= f;
        });
    }
};

/// Exact one-step statistics of the per-mode Ornstein-Uhlenbeck response to
/// the sqrt(kappa)-scaled forcing: decay e^{-kappa lambda^alpha dt} and
/// increment standard deviation b sqrt((1-e^{-2 kappa lambda^alpha dt})/(2 lambda^alpha)).
struct ModalNoise {
    std::vector<double> decay;
    std::vector<double> sigma;

    static ModalNoise make(const ForcingSpec& spec, const PhysicsParams& p, double dt) {
        ModalNoise mn;
        const std::size_t m = spec.size();
        mn.decay.assign(m, 1.0);
        mn.sigma.assign(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            const double lam_a = std::pow(spec.enumeration.modes[j].lambda, p.alpha);
            const double rate = p.kappa * lam_a;
            mn.decay[j] = std::exp(-rate * dt);
            const double var =
                spec.amplitudes[j] * spec.amplitudes[j] * (-std::expm1(-2.0 * rate * dt)) / (2.0 * lam_a);
            mn.sigma[j] = std::sqrt(std::max(var, 0.0));
        }
        return mn;
    }
};

namespace integ_detail {

inline void check_blowup(const SimState& s, double energy_guard) {
    if (!is_finite(s.B) || l2_norm2(s.B) > energy_guard) throw BlowupError(s.t);
}

/// Guard threshold: 1e6 x max(C_{-1}, ||B_0||^2, 1).
inline double energy_guard(const ForcingSpec& spec, const SpectralField& B0) {
    const double cminus1 = noise_constants(spec, {-1.0}).at(-1.0);
    return 1e6 * std::max({cminus1, l2_norm2(B0), 1.0});
}

}  // namespace integ_detail

/// Exponential Euler-Maruyama on the mild form: the stiff linear part is
/// exact, the transport increment rides inside the integrating factor, the
/// noise is the exact per-mode stochastic convolution over the step.
///
///   B' = e^{-kappa(-Delta)^alpha dt} [B + dt N(B)] + sum_j sigma_j xi_j e_j
inline void step_em(SimState& s, const ForcingSpec& spec, const HeatFactors& heat,
                    const ModalNoise& noise, double dt, const StepOptions& opt = {}) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_em: dt must be > 0");

    if (opt.transport) {
        const SpectralField u = velocity(s.B, s.params.gamma);
        axpy(s.B, dt, transport_term(s.B, u));
    }
    heat.apply(s.B);

    if (opt.noise && s.params.kappa > 0.0) {
        if (opt.noise_substeps <= 1) {
            for (std::size_t j = 0; j < spec.size(); ++j) {
                if (noise.sigma[j] == 0.0) continue;
                const double xi = s.rng.gaussian_for(j, s.step);
                spec.enumeration.modes[j].add_to(s.B, noise.sigma[j] * xi);
            }
        } else {
            // compose exact OU increments over noise_substeps fine intervals;
            // draw addresses use the fine step index so coarse and fine runs
            // over the same time grid share every Gaussian
            const int m = opt.noise_substeps;
            const double dtf = dt / m;
            for (std::size_t j = 0; j < spec.size(); ++j) {
                if (spec.amplitudes[j] == 0.0) continue;
                const double lam_a = std::pow(spec.enumeration.modes[j].lambda, s.params.alpha);
                const double rate = s.params.kappa * lam_a;
                const double decay_f = std::exp(-rate * dtf);
                const double sigma_f = std::sqrt(std::max(
                    spec.amplitudes[j] * spec.amplitudes[j] * (-std::expm1(-2.0 * rate * dtf)) /
                        (2.0 * lam_a),
                    0.0));
                double eta = 0.0;
                for (int sub = 0; sub < m; ++sub) {
                    const std::uint64_t fine_step = s.step * static_cast<std::uint64_t>(m) + sub;
                    eta = eta * decay_f + sigma_f * s.rng.gaussian_for(j, fine_step);
                }
                if (eta != 0.0) spec.enumeration.modes[j].add_to(s.B, eta);
            }
        }
    }

    s.t += dt;
    s.step += 1;
}

// ---------------------------------------------------------------------------
// Trajectory drivers
// ---------------------------------------------------------------------------

struct RunOptions {
    StepOptions step;
    std::uint64_t stride = 1;  // sink cadence in steps (on absolute step count)
    std::function<void(const SimState&)> sink;  // called after strided steps
};

/// Advance ceil(T/dt) steps; deterministic given (seed, trajectory, config).
inline SimState run(SimState state, const ForcingSpec& spec, double T, double dt,
                    const RunOptions& opt = {}) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("run: T and dt must be > 0");
    if (spec.max_wave_component() > state.B.grid.dealias_limit())
        throw std::invalid_argument("run: forcing modes outside the dealias band");
    dealias_truncate(state.B);  // the Galerkin space is the dealias band

    const auto heat = HeatFactors::make(state.B.grid, state.params, dt);
    const auto noise = ModalNoise::make(spec, state.params, dt);
    const double guard = integ_detail::energy_guard(spec, state.B);
    const std::uint64_t steps = static_cast<std::uint64_t>(std::ceil(T / dt - 1e-9));

    for (std::uint64_t i = 0; i < steps; ++i) {
        step_em(state, spec, heat, noise, dt, opt.step);
        integ_detail::check_blowup(state, guard);
        if (state.step % 256 == 0) {
            // spot-check the field invariants; a violation is a scheme bug
            const double scale = 1.0 + l2_norm(state.B);
            if (reality_defect(state.B) > 1e-10 * scale ||
                max_relative_divergence(state.B) > 1e-9)
                throw std::logic_error("run: field invariants violated mid-run");
        }
        if (opt.sink && state.step % opt.stride == 0) opt.sink(state);
    }
    return state;
}

/// Unforced run of the relaxation dynamics; kappa = 0 reduces the heat
/// factor to the identity and the scheme to explicit Euler on the transport.
inline SimState run_deterministic(const SpectralField& B0, const PhysicsParams& params, double T,
                                  double dt, const RunOptions& opt = {}) {
    SimState s;
    s.B = B0;
    s.params = params;
    ForcingSpec empty;
    empty.enumeration = BasisEnumeration{B0.grid.d, 1.0, BasisFlavor::stokes, {}};
    RunOptions o = opt;
    o.step.noise = false;
    return run(std::move(s), empty, T, dt, o);
}

// ---------------------------------------------------------------------------
// Noise paths and the pathwise decomposition B = b + Z
// ---------------------------------------------------------------------------

/// Realized per-mode Brownian increments on a uniform grid; coarsening by an
/// integer factor sums increments, which preserves the Wiener law exactly.
struct NoisePath {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<std::vector<double>> dbeta;  // [mode][step]

    std::size_t steps() const { return dbeta.empty() ? 0 : dbeta.front().size(); }

    NoisePath coarsen(int factor) const {
        if (factor < 1 || steps() % factor != 0)
            throw std::invalid_argument("NoisePath::coarsen: factor must divide the step count");
        NoisePath out;
        out.t0 = t0;
        out.dt = dt * factor;
        out.dbeta.resize(dbeta.size());
        for (std::size_t j = 0; j < dbeta.size(); ++j) {
            out.dbeta[j].resize(dbeta[j].size() / factor, 0.0);
            for (std::size_t i = 0; i < dbeta[j].size(); ++i)
                out.dbeta[j][i / factor] += dbeta[j][i];
        }
        return out;
    }
};

inline NoisePath make_brownian_path(const ForcingSpec& spec, const RngStream& rng, double dt,
                                    std::size_t steps, double t0 = 0.0) {
    NoisePath path;
    path.t0 = t0;
    path.dt = dt;
    path.dbeta.assign(spec.size(), {});
    const double root = std::sqrt(dt);
    for (std::size_t j = 0; j < spec.size(); ++j) {
        path.dbeta[j].resize(steps);
        for (std::size_t i = 0; i < steps; ++i) path.dbeta[j][i] = root * rng.gaussian_for(j, i);
    }
    return path;
}

/// Per-mode coordinates of the stochastic convolution Z(t_i) = sum_j z_j(t_i) e_j.
struct ZPath {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<std::vector<double>> z;  // [time][mode], z[0] = 0

    std::size_t steps() const { return z.empty() ? 0 : z.size() - 1; }

    SpectralField field_at(std::size_t i, const ForcingSpec& spec, const GridSpec& grid) const {
        SpectralField Z(grid);
        for (std::size_t j = 0; j < spec.size(); ++j)
            if (z[i][j] != 0.0) spec.enumeration.modes[j].add_to(Z, z[i][j]);
        return Z;
    }
};

/// Exact sampling of the stochastic convolution on a uniform grid: per mode
/// z' = e^{-kappa lambda^alpha dt} z + sqrt(kappa) b sqrt((1-e^{-2 kappa lambda^alpha dt})
/// /(2 kappa lambda^alpha)) xi, starting from Z(0) = 0.
inline ZPath stochastic_convolution(const ForcingSpec& spec, const PhysicsParams& params, double dt,
                                    std::size_t steps, const RngStream& rng) {
    if (!(params.kappa > 0.0))
        throw std::invalid_argument("stochastic_convolution: requires kappa > 0");
    const auto noise = ModalNoise::make(spec, params, dt);
    ZPath path;
    path.dt = dt;
    path.z.assign(steps + 1, std::vector<double>(spec.size(), 0.0));
    for (std::size_t i = 0; i < steps; ++i)
        for (std::size_t j = 0; j < spec.size(); ++j)
            path.z[i + 1][j] =
                noise.decay[j] * path.z[i][j] + noise.sigma[j] * rng.gaussian_for(j, i);
    return path;
}

/// Discretization of Z from a realized Brownian path, left-rule quadrature of
/// the convolution integral (the increment rides inside the heat factor):
///   z' = e^{-kappa lambda^alpha dt} (z + sqrt(kappa) b dbeta).
inline ZPath z_path_from_brownian(const ForcingSpec& spec, const PhysicsParams& params,
                                  const NoisePath& brownian) {
    const auto noise = ModalNoise::make(spec, params, brownian.dt);
    const double rootk = std::sqrt(params.kappa);
    ZPath path;
    path.t0 = brownian.t0;
    path.dt = brownian.dt;
    const std::size_t steps = brownian.steps();
    path.z.assign(steps + 1, std::vector<double>(spec.size(), 0.0));
    for (std::size_t i = 0; i < steps; ++i)
        for (std::size_t j = 0; j < spec.size(); ++j)
            path.z[i + 1][j] = noise.decay[j] * (path.z[i][j] +
                                                 rootk * spec.amplitudes[j] * brownian.dbeta[j][i]);
    return path;
}

/// Direct exponential Euler-Maruyama driven by a realized Brownian path, the
/// increment applied after the heat factor:
///   B' = e^{-kappa(-Delta)^alpha dt}[B + dt N(B)] + sqrt(kappa) sum_j b_j dbeta_j e_j.
inline SpectralField run_direct_from_noise(const SpectralField& B0, const ForcingSpec& spec,
                                           const PhysicsParams& params, const NoisePath& brownian) {
    params.validate(B0.grid.d);
    SpectralField B = B0;
    dealias_truncate(B);
    const double dt = brownian.dt;
    const auto heat = HeatFactors::make(B.grid, params, dt);
    const double rootk = std::sqrt(params.kappa);
    for (std::size_t i = 0; i < brownian.steps(); ++i) {
        const SpectralField u = velocity(B, params.gamma);
        axpy(B, dt, transport_term(B, u));
        heat.apply(B);
        for (std::size_t j = 0; j < spec.size(); ++j) {
            const double a = rootk * spec.amplitudes[j] * brownian.dbeta[j][i];
            if (a != 0.0) spec.enumeration.modes[j].add_to(B, a);
        }
        if (!is_finite(B)) throw BlowupError(brownian.t0 + dt * static_cast<double>(i + 1));
    }
    return B;
}

/// Pathwise-decomposed run: advance b by exponential Euler with the
/// (b+Z)-dependent transport, against the given realized Z path; the
/// reconstruction is B = b + Z. Exact in continuum, O(dt) against the direct
/// route in discrete time.
struct PerturbedRunResult {
    SpectralField b;
    SpectralField B_reconstructed;
};

inline PerturbedRunResult run_perturbed(const SpectralField& b0, const ForcingSpec& spec,
                                        const PhysicsParams& params, const ZPath& zpath,
                                        bool with_transport = true) {
    params.validate(b0.grid.d);
    const double dt = zpath.dt;
    if (!(dt > 0.0)) throw std::invalid_argument("run_perturbed: empty Z path");
    SpectralField b = b0;
    dealias_truncate(b);
    const auto heat = HeatFactors::make(b.grid, params, dt);
    for (std::size_t i = 0; i < zpath.steps(); ++i) {
        if (with_transport) {
            const SpectralField Bfull = b + zpath.field_at(i, spec, b.grid);
            const SpectralField u = velocity(Bfull, params.gamma);
            axpy(b, dt, transport_term(Bfull, u));
        }
        heat.apply(b);
        if (!is_finite(b)) throw BlowupError(zpath.t0 + dt * static_cast<double>(i + 1));
    }
    PerturbedRunResult out{b, b + zpath.field_at(zpath.steps(), spec, b0.grid)};
    return out;
}

/// Advection-limited step size min(cfl dx / max|u|, dt_max), evaluated once
/// at run start; mid-run adaptivity would break noise-path reproducibility.
inline double auto_dt(const SpectralField& B0, double gamma, double cfl = 0.5, double dt_max = 1e-2) {
    const SpectralField u = velocity(B0, gamma);
    const PhysicalField up = to_physical(u);
    double umax = 0.0;
    for (std::size_t i = 0; i < B0.grid.points(); ++i) {
        double m2 = 0.0;
        for (int c = 0; c < B0.grid.d; ++c) m2 += up.comp[c][i] * up.comp[c][i];
        umax = std::max(umax, m2);
    }
    umax = std::sqrt(umax);
    if (umax <= 0.0) return dt_max;
    return std::min(cfl * B0.grid.dx() / umax, dt_max);
}

}  // namespace mre
