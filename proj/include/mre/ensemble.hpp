#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mre/diagnostics.hpp"
#include "mre/integrator.hpp"

namespace mre {

/// Monte Carlo ensemble over seed-disjoint trajectories, all started from the
/// same state (B_0 = 0 by default, the Cesaro construction) unless warm-start
/// fields are supplied.
struct EnsembleConfig {
    GridSpec grid;
    PhysicsParams params;
    ForcingSpec forcing;
    std::uint64_t seed = 1;
    std::uint32_t trajectory_base = 0;  // trajectory ids are base + m
    int trajectories = 32;
    double dt = 0.0;  // <= 0: advective auto step
    double burn_in = 0.0;
    std::uint64_t sample_stride = 100;    // steps between samples
    std::uint64_t samples_per_traj = 50;  // records collected per trajectory
    int workers = 1;
    bool transport = true;  // off: the exactly-solvable linear subsystem
    std::optional<SpectralField> init;               // shared initial state
    std::vector<SpectralField> init_per_trajectory;  // warm starts (overrides init)

    void validate() const {
        grid.validate();
        params.validate(grid.d);
        forcing.validate();
        if (trajectories < 1) throw std::invalid_argument("EnsembleConfig: trajectories must be >= 1");
        if (burn_in < 0.0) throw std::invalid_argument("EnsembleConfig: burn_in must be >= 0");
        if (sample_stride < 1) throw std::invalid_argument("EnsembleConfig: stride must be >= 1");
    }
};

struct EnsembleResult {
    double dt = 0.0;
    std::vector<TrajectoryRecords> records;  // per surviving trajectory, post burn-in
    std::vector<SpectralField> finals;       // final snapshots, trajectory order
    SpectralField mean_field;                // pooled time-averaged field
    std::vector<SpectralField> traj_mean_fields;  // per-trajectory time averages
    int requested = 0;
    int survived = 0;
    std::vector<int> failed;          // trajectory offsets that blew up
    std::uint64_t total_steps = 0;    // sum over surviving trajectories, no silent truncation
    double tau_int_energy = 1.0;

    std::vector<double> pooled(const std::function<double(const DiagnosticsRecord&)>& f) const {
        std::vector<double> out;
        for (const auto& recs : records)
            for (const auto& r : recs) out.push_back(f(r));
        return out;
    }
};

inline SimState make_initial_state(const EnsembleConfig& cfg, int m) {
    SimState s;
    if (!cfg.init_per_trajectory.empty())
        s.B = cfg.init_per_trajectory[static_cast<std::size_t>(m) % cfg.init_per_trajectory.size()];
    else if (cfg.init)
        s.B = *cfg.init;
    else
        s.B = SpectralField(cfg.grid);
    s.params = cfg.params;
    s.rng = RngStream{cfg.seed, cfg.trajectory_base + static_cast<std::uint32_t>(m)};
    return s;
}

/// Run M trajectories, discard burn-in, sample observables at the stride.
/// Failed trajectories are excluded and reported; at least 80% must survive.
inline EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
    cfg.validate();
    const int M = cfg.trajectories;

    double dt = cfg.dt;
    if (dt <= 0.0) {
        const SimState probe = make_initial_state(cfg, 0);
        dt = auto_dt(probe.B, cfg.params.gamma);
    }

    struct Slot {
        TrajectoryRecords recs;
        SpectralField final_field;
        SpectralField sum_field;
        std::size_t sum_count = 0;
        std::uint64_t steps = 0;
        bool failed = false;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(M));

    const double sample_time =
        static_cast<double>(cfg.samples_per_traj) * static_cast<double>(cfg.sample_stride) * dt;

    auto work = [&](int m) {
        Slot& slot = slots[static_cast<std::size_t>(m)];
        SimState s = make_initial_state(cfg, m);
        slot.sum_field = SpectralField(cfg.grid);
        try {
            if (cfg.burn_in > 0.0) {
                RunOptions burn;
                burn.step.transport = cfg.transport;
                s = run(std::move(s), cfg.forcing, cfg.burn_in, dt, burn);
            }
            RunOptions opt;
            opt.step.transport = cfg.transport;
            opt.stride = cfg.sample_stride;
            opt.sink = [&](const SimState& st) {
                slot.recs.push_back(observe(st.B, st.params, st.t));
                axpy(slot.sum_field, 1.0, st.B);
                slot.sum_count += 1;
            };
            s = run(std::move(s), cfg.forcing, sample_time, dt, opt);
            slot.final_field = s.B;
            slot.steps = s.step;
        } catch (const BlowupError&) {
            slot.failed = true;
        }
    };

    if (cfg.workers > 1) {
        std::atomic<int> next{0};
        auto loop = [&]() {
            for (int m = next.fetch_add(1); m < M; m = next.fetch_add(1)) work(m);
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(loop);
        for (auto& th : pool) th.join();
    } else {
        for (int m = 0; m < M; ++m) work(m);
    }

    EnsembleResult out;
    out.dt = dt;
    out.requested = M;
    out.mean_field = SpectralField(cfg.grid);
    std::size_t pooled_count = 0;
    for (int m = 0; m < M; ++m) {  // fixed reduction order: statistics are bitwise deterministic
        Slot& slot = slots[static_cast<std::size_t>(m)];
        if (slot.failed) {
            out.failed.push_back(m);
            continue;
        }
        out.survived += 1;
        axpy(out.mean_field, 1.0, slot.sum_field);
        pooled_count += slot.sum_count;
        out.total_steps += slot.steps;
        if (slot.sum_count > 0)
            out.traj_mean_fields.push_back((1.0 / static_cast<double>(slot.sum_count)) *
                                           slot.sum_field);
        out.records.push_back(std::move(slot.recs));
        out.finals.push_back(std::move(slot.final_field));
    }
    if (out.survived < static_cast<int>(std::ceil(0.8 * M)))
        throw std::runtime_error("run_ensemble: more than 20% of trajectories blew up");
    if (pooled_count > 0)
        out.mean_field = (1.0 / static_cast<double>(pooled_count)) * out.mean_field;

    std::vector<double> energies;
    if (!out.records.empty())
        for (const auto& r : out.records.front()) energies.push_back(r.energy);
    if (energies.size() >= 8) out.tau_int_energy = integrated_autocorrelation_time(energies);
    return out;
}

/// Aligned per-trajectory records including the initial state, for the
/// time-integrated balance identities.
inline std::vector<TrajectoryRecords> balance_ensemble(const EnsembleConfig& cfg, double T, double dt,
                                                       std::uint64_t stride, int noise_substeps = 1) {
    cfg.validate();
    std::vector<TrajectoryRecords> out;
    for (int m = 0; m < cfg.trajectories; ++m) {
        SimState s = make_initial_state(cfg, m);
        TrajectoryRecords recs;
        recs.push_back(observe(s.B, s.params, s.t));
        RunOptions opt;
        opt.stride = stride;
        opt.step.noise_substeps = noise_substeps;
        opt.sink = [&](const SimState& st) { recs.push_back(observe(st.B, st.params, st.t)); };
        run(std::move(s), cfg.forcing, T, dt, opt);
        out.push_back(std::move(recs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cesaro averaging
// ---------------------------------------------------------------------------

struct CesaroSeries {
    std::vector<double> times;
    std::vector<double> running_average;  // (1/(t-t0)) int_{t0}^{t} f ds
    double last_half_vs_full = 0.0;       // convergence diagnostic
};

/// Running time averages of one observable along a single trajectory
/// (the Krylov-Bogoliubov construction at the observable level).
inline CesaroSeries cesaro_statistics(const TrajectoryRecords& recs,
                                      const std::function<double(const DiagnosticsRecord&)>& f) {
    if (recs.size() < 10) throw std::invalid_argument("cesaro_statistics: trajectory too short");
    CesaroSeries out;
    double acc = 0.0;
    const double t0 = recs.front().t;
    for (std::size_t i = 1; i < recs.size(); ++i) {
        acc += 0.5 * (f(recs[i - 1]) + f(recs[i])) * (recs[i].t - recs[i - 1].t);
        out.times.push_back(recs[i].t);
        out.running_average.push_back(acc / (recs[i].t - t0));
    }
    const double full = out.running_average.back();
    const double half = out.running_average[out.running_average.size() / 2];
    out.last_half_vs_full = std::abs(full - half);
    return out;
}

// ---------------------------------------------------------------------------
// kappa sweep: the non-resistive limit protocol
// ---------------------------------------------------------------------------

struct SweepPoint {
    double kappa = 0.0;
    double e_u = 0.0;  // E ||u||^2_{Hdot^gamma}
    double e_u_se = 0.0;
    double e_b2 = 0.0;  // E ||B||^2
    double e_b2_se = 0.0;
    double mhs_res_mean_field = 0.0;
    double mhs_res_se = 0.0;     // jackknife over trajectories
    double mhs_res_scale = 0.0;  // mhs residual of a typical snapshot, for context
    SpectralField mean_field;    // pooled time-averaged field at this kappa
    BalanceReport relations;
    int survived = 0;
    int requested = 0;
};

struct SweepResult {
    std::vector<SweepPoint> points;  // kappa strictly decreasing
    double slope_log_eu_log_kappa = 0.0;
    bool warm_started = true;
    /// One kappa-path realization; subsequential limits are indistinguishable
    /// numerically, so monotonicity statements carry this caveat.
    std::string caveat = "single kappa-path; limit along one realized sequence";
};

/// Sweep kappa downward, scaling the per-kappa budget by the 1/kappa mixing
/// heuristic; optional warm start feeds each stage the previous finals.
inline SweepResult kappa_sweep(EnsembleConfig base, std::vector<double> kappas, bool warm_start = true) {
    if (kappas.size() < 3)
        throw std::invalid_argument("kappa_sweep: need at least 3 kappa values for a slope fit");
    for (std::size_t i = 1; i < kappas.size(); ++i)
        if (!(kappas[i] < kappas[i - 1]))
            throw std::invalid_argument("kappa_sweep: kappa list must be strictly decreasing");

    double lambda1 = 0.0;
    for (std::size_t j = 0; j < base.forcing.size(); ++j)
        if (base.forcing.amplitudes[j] > 0.0) {
            lambda1 = base.forcing.enumeration.modes[j].lambda;
            break;
        }
    if (lambda1 <= 0.0) throw std::invalid_argument("kappa_sweep: forcing has no active modes");

    SweepResult out;
    out.warm_started = warm_start;
    std::vector<SpectralField> carry;

    for (std::size_t stage = 0; stage < kappas.size(); ++stage) {
        EnsembleConfig cfg = base;
        cfg.params.kappa = kappas[stage];
        cfg.trajectory_base = base.trajectory_base + static_cast<std::uint32_t>(10000 * (stage + 1));
        const double t_mix = 1.0 / (cfg.params.kappa * lambda1);
        const bool warm = warm_start && !carry.empty();
        cfg.burn_in = (warm ? 2.0 : 10.0) * t_mix;
        if (warm) cfg.init_per_trajectory = carry;

        double dt = cfg.dt;
        if (dt <= 0.0) dt = 1e-2;
        cfg.dt = dt;
        const double t_sample = 20.0 * t_mix;
        const double stride_time = std::min(t_mix, cfg.dt * 100.0);
        cfg.sample_stride = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(stride_time / dt));
        cfg.samples_per_traj =
            std::max<std::uint64_t>(10, static_cast<std::uint64_t>(t_sample / (static_cast<double>(cfg.sample_stride) * dt)));

        EnsembleResult res = run_ensemble(cfg);
        if (warm_start) carry = res.finals;

        SweepPoint pt;
        pt.kappa = cfg.params.kappa;
        pt.requested = res.requested;
        pt.survived = res.survived;
        std::vector<double> mu, mb;
        for (const auto& recs : res.records) {
            double su = 0.0, sb = 0.0;
            for (const auto& r : recs) {
                su += r.u_norm;
                sb += 2.0 * r.energy;
            }
            mu.push_back(su / static_cast<double>(recs.size()));
            mb.push_back(sb / static_cast<double>(recs.size()));
        }
        pt.e_u = mean_of(mu);
        pt.e_u_se = mu.size() >= 2 ? standard_error(mu) : 0.0;
        pt.e_b2 = mean_of(mb);
        pt.e_b2_se = mb.size() >= 2 ? standard_error(mb) : 0.0;
        pt.mhs_res_mean_field = mhs_residual(res.mean_field);
        pt.mean_field = res.mean_field;
        // jackknife: residual of the leave-one-trajectory-out mean field
        if (res.traj_mean_fields.size() >= 3) {
            const std::size_t M = res.traj_mean_fields.size();
            SpectralField total(cfg.grid);
            for (const auto& f : res.traj_mean_fields) axpy(total, 1.0, f);
            std::vector<double> loo;
            for (std::size_t i = 0; i < M; ++i) {
                SpectralField rest = total;
                axpy(rest, -1.0, res.traj_mean_fields[i]);
                loo.push_back(mhs_residual((1.0 / static_cast<double>(M - 1)) * rest));
            }
            const double lmean = mean_of(loo);
            double acc = 0.0;
            for (double v : loo) acc += (v - lmean) * (v - lmean);
            pt.mhs_res_se = std::sqrt(acc * static_cast<double>(M - 1) / static_cast<double>(M));
        }
        double mr = 0.0;
        for (const auto& recs : res.records) mr += recs.back().mhs_res;
        pt.mhs_res_scale = mr / static_cast<double>(res.records.size());
        pt.relations = stationary_relations(res.records, cfg.forcing, cfg.params, cfg.grid.d);
        out.points.push_back(std::move(pt));
    }

    std::vector<double> lx, ly;
    for (const auto& p : out.points) {
        lx.push_back(std::log(p.kappa));
        ly.push_back(std::log(std::max(p.e_u, 1e-300)));
    }
    out.slope_log_eu_log_kappa = fit_slope(lx, ly);
    return out;
}

/// Non-resistive-limit gates: dissipation-scaling slope near 1, a
/// kappa-independent d=2 energy, and a nonincreasing mean-field MHS residual
/// along the sweep (monotonicity only; no convergence rate is claimed).
struct SweepCheck {
    bool slope_ok = false;
    bool energy_consistent = false;
    bool mhs_monotone = false;

    bool pass() const { return slope_ok && energy_consistent && mhs_monotone; }
};

inline SweepCheck check_sweep(const SweepResult& sw, double slope_lo = 0.85, double slope_hi = 1.15,
                              double energy_rel_allowance = 0.05) {
    SweepCheck out;
    out.slope_ok = sw.slope_log_eu_log_kappa >= slope_lo && sw.slope_log_eu_log_kappa <= slope_hi;

    out.energy_consistent = true;
    for (std::size_t i = 0; i < sw.points.size(); ++i)
        for (std::size_t j = i + 1; j < sw.points.size(); ++j) {
            const auto& a = sw.points[i];
            const auto& b = sw.points[j];
            const double tol = 3.0 * std::sqrt(a.e_b2_se * a.e_b2_se + b.e_b2_se * b.e_b2_se) +
                               energy_rel_allowance * 0.5 * (a.e_b2 + b.e_b2);
            if (std::abs(a.e_b2 - b.e_b2) > tol) out.energy_consistent = false;
        }

    // nonincreasing within the sampling error of the mean-field residual
    out.mhs_monotone = true;
    for (std::size_t i = 1; i < sw.points.size(); ++i) {
        const auto& prev = sw.points[i - 1];
        const auto& cur = sw.points[i];
        const double slack =
            3.0 * std::sqrt(prev.mhs_res_se * prev.mhs_res_se + cur.mhs_res_se * cur.mhs_res_se);
        if (cur.mhs_res_mean_field > prev.mhs_res_mean_field + slack + 1e-12)
            out.mhs_monotone = false;
    }
    return out;
}

}  // namespace mre
