#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mre/dynamics.hpp"
#include "mre/forcing.hpp"
#include "mre/stats.hpp"

namespace mre {

/// Scalar observables of one snapshot. Dimension-inapplicable entries stay
/// unset. grad_energy is ||B||^2 in the homogeneous H^alpha norm (= ||grad B||^2
/// for alpha = 1); msp_alpha and curl_alpha are the alpha-weighted pairings
/// that appear in the hyper-resistive balances and reduce to 2E and curl_bb
/// at alpha = 1.
struct DiagnosticsRecord {
    double t = 0.0;
    double energy = 0.0;       // E = 1/2 ||B||^2
    double grad_energy = 0.0;  // ||B||^2_{Hdot^alpha}
    double u_norm = 0.0;       // ||u||^2_{Hdot^gamma}
    std::optional<double> helicity;   // (curl^{-1}B, B), d=3
    std::optional<double> msp;        // ||curl^{-1}B||^2, d=2
    std::optional<double> curl_bb;    // (curl B, B), d=3
    double mhs_res = 0.0;
    std::vector<std::pair<std::string, double>> casimirs;  // d=2
    double msp_alpha = 0.0;   // ||curl^{-1}B||^2_{Hdot^alpha} (d=2)
    double curl_alpha = 0.0;  // ((-Delta)^alpha curl^{-1}B, B) (d=3)
};

/// Casimir integral int f(phi) dx by collocation quadrature; exact for
/// polynomial f of degree within the quadrature band.
inline double casimir(const SpectralField& B, const std::function<double(double)>& f) {
    if (B.grid.d != 2) throw std::invalid_argument("casimir: requires d=2");
    const std::vector<double> phi = to_physical(curl_inv_scalar(B));
    double s = 0.0;
    for (double v : phi) s += f(v);
    const double cell = std::pow(B.grid.dx(), B.grid.d);
    return s * cell;
}

inline std::vector<std::pair<std::string, std::function<double(double)>>> default_casimirs() {
    return {
        {"phi2", [](double r) { return r * r; }},
        {"phi3", [](double r) { return r * r * r; }},
        {"phi4", [](double r) { return r * r * r * r; }},
    };
}

/// All scalar observables, computed spectrally (exact quadrature on the band).
inline DiagnosticsRecord observe(const SpectralField& B, const PhysicsParams& params, double t = 0.0,
                                 bool with_casimirs = true) {
    DiagnosticsRecord r;
    r.t = t;
    r.energy = 0.5 * l2_norm2(B);
    r.grad_energy = sobolev_norm2(B, params.alpha);

    const SpectralField F = lorentz_divergence(B);
    r.u_norm = sobolev_norm2(F, -params.gamma);  // ||u||^2_{Hdot^gamma} via u = (-Delta)^{-gamma} F
    r.mhs_res = sobolev_norm(F, -1.0);

    if (B.grid.d == 2) {
        const SpectralScalar phi = curl_inv_scalar(B);
        r.msp = l2_norm2(phi);
        r.msp_alpha = sobolev_norm2(phi, params.alpha);
        if (with_casimirs)
            for (const auto& [label, f] : default_casimirs()) r.casimirs.emplace_back(label, casimir(B, f));
    } else {
        const SpectralField A = curl_inv_field(B);
        r.helicity = l2_inner(A, B);
        r.curl_bb = l2_inner(curl(B), B);
        r.curl_alpha = l2_inner(frac_laplacian(A, params.alpha), B);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Balance reports
// ---------------------------------------------------------------------------

struct BalanceEntry {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual_abs = 0.0;
    double residual_rel = 0.0;
    double se = 0.0;         // Monte Carlo standard error of lhs
    double allowance = 0.0;  // explicit discretization allowance
    double tolerance = 0.0;  // 3 se + allowance
    bool pass = false;

    static BalanceEntry make(std::string id, double lhs, double rhs, double se, double allowance) {
        BalanceEntry e;
        e.id = std::move(id);
        e.lhs = lhs;
        e.rhs = rhs;
        e.residual_abs = std::abs(lhs - rhs);
        e.residual_rel = e.residual_abs / std::max(std::abs(rhs), 1e-30);
        e.se = se;
        e.allowance = allowance;
        e.tolerance = 3.0 * se + allowance;
        e.pass = e.residual_abs < e.tolerance;
        return e;
    }
};

struct BalanceReport {
    std::vector<BalanceEntry> entries;
    bool single_trajectory = false;  // ergodic caveat: expectations replaced by time averages

    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }

    const BalanceEntry& at(const std::string& id) const {
        for (const auto& e : entries)
            if (e.id == id) return e;
        throw std::out_of_range("BalanceReport: no entry " + id);
    }
};

using TrajectoryRecords = std::vector<DiagnosticsRecord>;

namespace diag_detail {

inline double trapezoid(const TrajectoryRecords& recs,
                        const std::function<double(const DiagnosticsRecord&)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < recs.size(); ++i)
        s += 0.5 * (f(recs[i]) + f(recs[i + 1])) * (recs[i + 1].t - recs[i].t);
    return s;
}

}  // namespace diag_detail

/// Time-integrated Ito balances over trajectories that share a time grid and
/// include the initial record. Right-hand sides carry the sqrt(kappa)-forcing
/// scaling of the simulated system, so the injection rates are kappa C_0,
/// kappa C_{-1/2} and kappa C_{-1}.
inline BalanceReport trajectory_balance(const std::vector<TrajectoryRecords>& trajectories,
                                        const ForcingSpec& spec, const PhysicsParams& params, int d,
                                        double dt_allowance = 0.0) {
    if (trajectories.empty() || trajectories.front().size() < 2)
        throw std::invalid_argument("trajectory_balance: empty record set");
    const auto nc = noise_constants(spec, {0.0, -1.0});
    const double c0 = nc.at(0.0);
    const double T = trajectories.front().back().t - trajectories.front().front().t;

    std::vector<double> energy_res, second_res;
    for (const auto& recs : trajectories) {
        if (recs.size() != trajectories.front().size())
            throw std::invalid_argument("trajectory_balance: trajectories on different grids");
        const double e_lhs = 2.0 * (recs.back().energy - recs.front().energy) +
                             2.0 * diag_detail::trapezoid(recs, [&](const DiagnosticsRecord& r) {
                                 return params.kappa * r.grad_energy + r.u_norm;
                             });
        energy_res.push_back(e_lhs);
        if (d == 2) {
            const double m_lhs = (recs.back().msp.value() - recs.front().msp.value()) +
                                 2.0 * params.kappa *
                                     diag_detail::trapezoid(recs, [](const DiagnosticsRecord& r) {
                                         return r.msp_alpha;
                                     });
            second_res.push_back(m_lhs);
        } else {
            const double h_lhs = (recs.back().helicity.value() - recs.front().helicity.value()) +
                                 2.0 * params.kappa *
                                     diag_detail::trapezoid(recs, [](const DiagnosticsRecord& r) {
                                         return r.curl_alpha;
                                     });
            second_res.push_back(h_lhs);
        }
    }

    BalanceReport rep;
    rep.single_trajectory = trajectories.size() == 1;
    const double se_e = rep.single_trajectory ? 0.0 : standard_error(energy_res);
    rep.entries.push_back(
        BalanceEntry::make("energy_4_1", mean_of(energy_res), params.kappa * c0 * T, se_e, dt_allowance));
    const double se_2 = rep.single_trajectory ? 0.0 : standard_error(second_res);
    if (d == 2) {
        rep.entries.push_back(BalanceEntry::make("msp_4_4", mean_of(second_res),
                                                 params.kappa * nc.at(-1.0) * T, se_2, dt_allowance));
    } else {
        const double ch = signed_c_minus_half(spec);
        rep.entries.push_back(BalanceEntry::make("helicity_4_3", mean_of(second_res),
                                                 params.kappa * ch * T, se_2, dt_allowance));
    }
    return rep;
}

/// Statistically stationary relations estimated from snapshot records pooled
/// per trajectory. Pass criterion: |mean - target| < 3 SE + allowance.
inline BalanceReport stationary_relations(const std::vector<TrajectoryRecords>& trajectories,
                                          const ForcingSpec& spec, const PhysicsParams& params, int d,
                                          double rel_allowance = 0.05) {
    std::size_t total = 0;
    for (const auto& t : trajectories) total += t.size();
    if (total < 10) throw std::invalid_argument("stationary_relations: fewer than 10 effective samples");

    const auto nc = noise_constants(spec, {0.0, -1.0});
    const double c0 = nc.at(0.0);

    // expectations by mean over independent trajectories; a single trajectory
    // falls back to batch means over its (correlated) series
    auto estimate = [&](const std::function<double(const DiagnosticsRecord&)>& f) {
        std::vector<double> traj_means;
        std::vector<double> flat;
        for (const auto& recs : trajectories) {
            if (recs.empty()) continue;
            double s = 0.0;
            for (const auto& r : recs) {
                s += f(r);
                flat.push_back(f(r));
            }
            traj_means.push_back(s / static_cast<double>(recs.size()));
        }
        const double mean = mean_of(traj_means);
        const double se =
            traj_means.size() >= 2 ? standard_error(traj_means) : batch_means_se(flat);
        return std::pair{mean, se};
    };

    BalanceReport rep;
    rep.single_trajectory = trajectories.size() == 1;

    {
        const auto [mean, se] = estimate(
            [&](const DiagnosticsRecord& r) { return params.kappa * r.grad_energy + r.u_norm; });
        const double target = 0.5 * params.kappa * c0;
        rep.entries.push_back(
            BalanceEntry::make("stat_5_1", mean, target, se, rel_allowance * std::abs(target)));
    }
    if (d == 2) {
        const auto [mean, se] = estimate([&](const DiagnosticsRecord& r) {
            return params.alpha == 1.0 ? 2.0 * r.energy : r.msp_alpha;
        });
        const double target = 0.5 * nc.at(-1.0);
        rep.entries.push_back(
            BalanceEntry::make("stat_5_4", mean, target, se, rel_allowance * std::abs(target)));
    } else {
        const auto [mean, se] = estimate([&](const DiagnosticsRecord& r) { return r.curl_alpha; });
        const double target = 0.5 * signed_c_minus_half(spec);
        rep.entries.push_back(BalanceEntry::make("stat_5_3", mean, target, se,
                                                 rel_allowance * std::max(std::abs(target), 1e-12)));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Exponential moment and empirical laws
// ---------------------------------------------------------------------------

struct ExpMomentResult {
    double rho = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double bound = 0.0;  // (C_0+1) e^{rho(C_0+1)}
    bool within_bound = false;
};

/// Sample mean of exp(rho ||B||^2) against the stationary bound; rho must
/// satisfy 0 < rho <= 1/(2 sup_j b_j^2).
inline ExpMomentResult exp_moment(const std::vector<TrajectoryRecords>& trajectories,
                                  const ForcingSpec& spec, double rho) {
    const double bmax = spec.max_amplitude();
    if (!(rho > 0.0) || !(bmax > 0.0) || rho > 1.0 / (2.0 * bmax * bmax))
        throw std::invalid_argument("exp_moment: rho outside (0, 1/(2 sup b_j^2)]");
    std::vector<double> tm;
    for (const auto& recs : trajectories) {
        if (recs.empty()) continue;
        double s = 0.0;
        for (const auto& r : recs) s += std::exp(rho * 2.0 * r.energy);
        tm.push_back(s / static_cast<double>(recs.size()));
    }
    if (tm.empty()) throw std::invalid_argument("exp_moment: no samples");
    const double c0 = noise_constants(spec, {0.0}).at(0.0);
    ExpMomentResult out;
    out.rho = rho;
    out.estimate = mean_of(tm);
    out.se = tm.size() >= 2 ? standard_error(tm) : 0.0;
    out.bound = (c0 + 1.0) * std::exp(rho * (c0 + 1.0));
    out.within_bound = out.estimate <= out.bound + 3.0 * out.se;
    return out;
}

struct LawHistogram {
    std::size_t samples = 0;
    std::size_t bins = 0;
    double lo = 0.0, hi = 0.0;
    std::vector<double> bin_mass;       // probability mass per bin
    double max_bin_mass = 0.0;          // largest empirical-CDF jump across a bin
    double max_density = 0.0;           // max bin mass / bin width
    double atom_statistic = 0.0;        // largest exact-value multiplicity fraction
};

/// Empirical-law diagnostics for the continuity results: a law with a point
/// atom shows up as a repeated exact value (atom_statistic) or a heavy bin.
inline LawHistogram law_histogram(std::vector<double> samples, std::size_t bins = 100,
                                  std::size_t min_samples = 1000) {
    if (samples.size() < min_samples)
        throw std::invalid_argument("law_histogram: too few samples");
    if (bins < 2) throw std::invalid_argument("law_histogram: bins must be >= 2");
    LawHistogram h;
    h.samples = samples.size();
    h.bins = bins;
    std::sort(samples.begin(), samples.end());
    h.lo = samples.front();
    h.hi = samples.back();

    std::size_t best_run = 1, run = 1;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        run = samples[i] == samples[i - 1] ? run + 1 : 1;
        best_run = std::max(best_run, run);
    }
    h.atom_statistic = static_cast<double>(best_run) / static_cast<double>(samples.size());

    const double width = (h.hi - h.lo) > 0.0 ? (h.hi - h.lo) : 1.0;
    h.bin_mass.assign(bins, 0.0);
    for (double v : samples) {
        auto b = static_cast<std::size_t>((v - h.lo) / width * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        h.bin_mass[b] += 1.0;
    }
    for (auto& m : h.bin_mass) m /= static_cast<double>(samples.size());
    for (double m : h.bin_mass) h.max_bin_mass = std::max(h.max_bin_mass, m);
    h.max_density = h.max_bin_mass * static_cast<double>(bins) / width;
    return h;
}

}  // namespace mre
