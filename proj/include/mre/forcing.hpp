#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mre/eigenbasis.hpp"
#include "mre/rng.hpp"
#include "mre/spectral_field.hpp"

namespace mre {

/// Noise spectrum {b_j} over an eigenbasis enumeration. The Wiener process
/// is zeta = sum_j b_j e_j beta_j(t); truncation to finitely many modes is a
/// first-class, reported parameter.
struct ForcingSpec {
    BasisEnumeration enumeration;
    std::vector<double> amplitudes;  // b_j >= 0, aligned with enumeration.modes
    std::string preset = "explicit";
    bool all_nonzero_up_to_cutoff = false;

    std::size_t size() const { return enumeration.modes.size(); }

    void validate() const {
        if (amplitudes.size() != enumeration.modes.size())
            throw std::invalid_argument("ForcingSpec: amplitudes misaligned with enumeration");
        for (double b : amplitudes)
            if (!(b >= 0.0)) throw std::invalid_argument("ForcingSpec: amplitudes must be >= 0");
    }

    double max_amplitude() const {
        double m = 0.0;
        for (double b : amplitudes) m = std::max(m, b);
        return m;
    }

    /// Largest forced |k_i|; must sit inside the dealias band of the grid.
    int max_wave_component() const {
        int m = 0;
        for (std::size_t i = 0; i < amplitudes.size(); ++i) {
            if (amplitudes[i] == 0.0) continue;
            const auto& k = enumeration.modes[i].k;
            m = std::max({m, std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
        }
        return m;
    }
};

/// C_s = sum_j lambda_j^s b_j^2, plus the signed constant
/// sum_j b_j^2 / tau_j for Beltrami enumerations.
struct NoiseConstants {
    std::map<double, double> c;  // s -> C_s
    std::optional<double> c_minus_half_signed;

    double at(double s) const {
        auto it = c.find(s);
        if (it == c.end()) throw std::out_of_range("NoiseConstants: C_s not computed for requested s");
        return it->second;
    }
};

inline NoiseConstants noise_constants(const ForcingSpec& spec, const std::vector<double>& s_list) {
    spec.validate();
    NoiseConstants out;
    for (double s : s_list) {
        double acc = 0.0;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const double b2 = spec.amplitudes[i] * spec.amplitudes[i];
            if (b2 != 0.0) acc += std::pow(spec.enumeration.modes[i].lambda, s) * b2;
        }
        out.c[s] = acc;
    }
    if (spec.enumeration.flavor == BasisFlavor::beltrami) {
        double acc = 0.0;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const double b2 = spec.amplitudes[i] * spec.amplitudes[i];
            if (b2 != 0.0) acc += b2 / spec.enumeration.modes[i].tau;
        }
        out.c_minus_half_signed = acc;
    }
    return out;
}

/// The signed helicity-injection constant; defined only for Beltrami forcing.
inline double signed_c_minus_half(const ForcingSpec& spec) {
    const auto nc = noise_constants(spec, {});
    if (!nc.c_minus_half_signed)
        throw std::invalid_argument("signed_c_minus_half: requires a Beltrami enumeration");
    return *nc.c_minus_half_signed;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

struct PresetParams {
    double c = 1.0;          // power_law scale
    double q = 1.0;          // power_law decay b_j = c lambda_j^{-q}
    std::size_t J = 0;       // power_law truncation (first J modes)
    double shell_lambda = 1.0;
    double shell_amplitude = 1.0;
    int tau_sign = 0;        // single_shell on Beltrami bases: +1/-1 selects a
                             // curl-eigenvalue sign, 0 takes both
    std::vector<double> explicit_amplitudes;
};

inline ForcingSpec spectrum_preset(const std::string& name, const PresetParams& p,
                                   BasisEnumeration enumeration) {
    ForcingSpec spec;
    spec.enumeration = std::move(enumeration);
    spec.preset = name;
    const std::size_t m = spec.enumeration.modes.size();
    spec.amplitudes.assign(m, 0.0);

    if (name == "power_law") {
        if (p.J > m)
            throw std::invalid_argument("spectrum_preset: J exceeds enumeration length");
        const std::size_t J = p.J == 0 ? m : p.J;
        for (std::size_t i = 0; i < J; ++i)
            spec.amplitudes[i] = p.c * std::pow(spec.enumeration.modes[i].lambda, -p.q);
        spec.all_nonzero_up_to_cutoff = (J == m && p.c != 0.0);
    } else if (name == "single_shell") {
        bool hit = false;
        for (std::size_t i = 0; i < m; ++i) {
            const auto& mode = spec.enumeration.modes[i];
            if (std::abs(mode.lambda - p.shell_lambda) > 1e-9) continue;
            if (p.tau_sign != 0) {
                if (spec.enumeration.flavor != BasisFlavor::beltrami)
                    throw std::invalid_argument("spectrum_preset: tau_sign needs a Beltrami basis");
                if ((p.tau_sign > 0) != (mode.tau > 0)) continue;
            }
            spec.amplitudes[i] = p.shell_amplitude;
            hit = true;
        }
        if (!hit) throw std::invalid_argument("spectrum_preset: no modes on requested shell");
        spec.all_nonzero_up_to_cutoff = false;
    } else if (name == "explicit") {
        if (p.explicit_amplitudes.size() != m)
            throw std::invalid_argument("spectrum_preset: explicit amplitude list length mismatch");
        spec.amplitudes = p.explicit_amplitudes;
        spec.all_nonzero_up_to_cutoff = true;
        for (double b : spec.amplitudes)
            if (b == 0.0) spec.all_nonzero_up_to_cutoff = false;
    } else {
        throw std::invalid_argument("spectrum_preset: unknown preset '" + name + "'");
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Wiener increments
// ---------------------------------------------------------------------------

/// Identifies the per-trajectory noise streams; mode j uses stream id j.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint32_t trajectory = 0;

    double gaussian_for(std::size_t mode, std::uint64_t step, std::uint32_t index = 0) const {
        return mre::gaussian(DrawKey{seed, trajectory, static_cast<std::uint32_t>(mode), step, index});
    }
};

/// zeta(t+dt) - zeta(t) = sum_j b_j sqrt(dt) xi_j e_j; divergence-free by
/// construction since every e_j is.
inline SpectralField wiener_increment(const ForcingSpec& spec, const GridSpec& grid, double dt,
                                      const RngStream& rng, std::uint64_t step) {
    if (dt < 0.0) throw std::invalid_argument("wiener_increment: dt must be >= 0");
    SpectralField dz(grid);
    if (dt == 0.0) return dz;
    const double root = std::sqrt(dt);
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double b = spec.amplitudes[j];
        if (b == 0.0) continue;
        spec.enumeration.modes[j].add_to(dz, b * root * rng.gaussian_for(j, step));
    }
    return dz;
}

}  // namespace mre
