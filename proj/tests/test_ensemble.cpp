#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "mre/ensemble.hpp"
#include "test_util.hpp"

using namespace mre;

namespace {

EnsembleConfig linear_cfg() {
    EnsembleConfig cfg;
    cfg.grid = GridSpec{2, 16};
    cfg.params = PhysicsParams{2.0, 1.0, 1.0};
    PresetParams p;
    p.shell_lambda = 1.0;
    p.shell_amplitude = 1.0;
    cfg.forcing = spectrum_preset("single_shell", p, enumerate_basis(2, 1.0, BasisFlavor::stokes));
    cfg.seed = 314;
    cfg.transport = false;
    cfg.dt = 0.05;
    cfg.burn_in = 10.0;
    cfg.sample_stride = 20;
    cfg.samples_per_traj = 30;
    cfg.trajectories = 8;
    return cfg;
}

}  // namespace

TEST_CASE("smoke ensemble is deterministic") {
    EnsembleConfig cfg = linear_cfg();
    cfg.trajectories = 2;
    cfg.burn_in = 0.2;
    cfg.samples_per_traj = 3;
    const EnsembleResult a = run_ensemble(cfg);
    const EnsembleResult b = run_ensemble(cfg);
    REQUIRE(a.records.size() == 2);
    REQUIRE(a.records[0].size() == 3);
    CHECK(a.survived == 2);
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(a.records[t][i].energy == b.records[t][i].energy);
            CHECK(a.records[t][i].t == b.records[t][i].t);
        }
    CHECK(mre::testing::field_rel_diff(a.mean_field, b.mean_field) == 0.0);
    // distinct trajectories see distinct noise
    CHECK(a.records[0].back().energy != a.records[1].back().energy);
    // budget accounting: ceil(burn/dt) + samples*stride steps per trajectory
    const std::uint64_t burn_steps = static_cast<std::uint64_t>(std::ceil(cfg.burn_in / cfg.dt - 1e-9));
    CHECK(a.total_steps == 2 * (burn_steps + cfg.samples_per_traj * cfg.sample_stride));
}

TEST_CASE("stream-id audit: trajectories consume disjoint draw addresses") {
    // the counter tuple (trajectory, stream, step, index) is the draw address;
    // collect the tuples two trajectories consume and check disjointness
    using Key = std::tuple<std::uint32_t, std::uint32_t, std::uint64_t, std::uint32_t>;
    auto addresses = [](std::uint32_t traj, std::size_t modes, std::uint64_t steps) {
        std::set<Key> keys;
        for (std::uint32_t j = 0; j < modes; ++j)
            for (std::uint64_t s = 0; s < steps; ++s) keys.insert(Key{traj, j, s, 0});
        return keys;
    };
    const auto a = addresses(0, 4, 200);
    const auto b = addresses(1, 4, 200);
    std::vector<Key> overlap;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(overlap));
    CHECK(overlap.empty());
    // and the generator maps distinct addresses to distinct values
    CHECK(gaussian(DrawKey{1, 0, 0, 5, 0}) != gaussian(DrawKey{1, 1, 0, 5, 0}));
}

TEST_CASE("linear subsystem ensemble matches the Gaussian stationary law") {
    const EnsembleConfig cfg = linear_cfg();
    const EnsembleResult res = run_ensemble(cfg);
    // E||B||^2 = C_{-1}/2 = 2 for the four unit-amplitude lambda=1 modes
    std::vector<double> tm;
    for (const auto& recs : res.records) {
        double s = 0.0;
        for (const auto& r : recs) s += 2.0 * r.energy;
        tm.push_back(s / static_cast<double>(recs.size()));
    }
    const double est = mean_of(tm);
    const double se = standard_error(tm);
    CHECK(std::abs(est - 2.0) < 3.0 * se + 0.05);

    const BalanceReport rel = stationary_relations(res.records, cfg.forcing, cfg.params, 2, 0.08);
    CHECK(rel.at("stat_5_4").pass);
    CHECK(rel.at("stat_5_1").pass);
}

TEST_CASE("ensemble throws when too many trajectories blow up") {
    EnsembleConfig cfg = linear_cfg();
    cfg.transport = true;
    cfg.trajectories = 3;
    cfg.dt = 0.5;  // violently unstable for the explicit transport at this amplitude
    cfg.burn_in = 0.0;
    cfg.samples_per_traj = 400;
    cfg.sample_stride = 1;
    SpectralField huge = 3000.0 * mre::testing::random_divfree_field(cfg.grid, 4, 5);
    cfg.init = huge;
    CHECK_THROWS_AS((void)run_ensemble(cfg), std::runtime_error);
}

TEST_CASE("cesaro_statistics") {
    SUBCASE("constant observable averages to itself") {
        TrajectoryRecords recs;
        for (int i = 0; i <= 20; ++i) {
            DiagnosticsRecord r;
            r.t = 0.1 * i;
            r.energy = 2.5;
            recs.push_back(r);
        }
        const CesaroSeries s = cesaro_statistics(recs, [](const DiagnosticsRecord& r) { return r.energy; });
        for (double v : s.running_average) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
        CHECK(s.last_half_vs_full < 1e-14);
    }
    SUBCASE("sine input decays like 1/t") {
        TrajectoryRecords recs;
        const double dt = 0.05;
        for (int i = 0; i <= 4000; ++i) {
            DiagnosticsRecord r;
            r.t = dt * i;
            r.energy = std::sin(r.t);
            recs.push_back(r);
        }
        const CesaroSeries s = cesaro_statistics(recs, [](const DiagnosticsRecord& r) { return r.energy; });
        const double t_end = recs.back().t;
        CHECK(std::abs(s.running_average.back()) < 2.5 / t_end);
    }
    SUBCASE("OU energy running average converges to the stationary mean") {
        EnsembleConfig cfg = linear_cfg();
        cfg.trajectories = 1;
        cfg.burn_in = 0.0;
        cfg.sample_stride = 4;
        cfg.samples_per_traj = 600;  // T = 120 at dt = 0.05
        const EnsembleResult res = run_ensemble(cfg);
        const CesaroSeries s =
            cesaro_statistics(res.records[0], [](const DiagnosticsRecord& r) { return 2.0 * r.energy; });
        // stationary mean 2; mixing time 1/(kappa lambda_1) = 1
        const double tail = s.running_average.back();
        CHECK(std::abs(tail - 2.0) < 0.35);  // ~3 x the batch-means error at this budget
    }
    SUBCASE("too short input is an error") {
        TrajectoryRecords recs(5);
        CHECK_THROWS_AS(
            (void)cesaro_statistics(recs, [](const DiagnosticsRecord& r) { return r.energy; }),
            std::invalid_argument);
    }
}

TEST_CASE("kappa_sweep on a toy budget") {
    EnsembleConfig cfg = linear_cfg();
    cfg.transport = true;
    cfg.trajectories = 2;
    cfg.dt = 0.01;
    const SweepResult sw = kappa_sweep(cfg, {2.0, 1.0, 0.5});
    REQUIRE(sw.points.size() == 3);
    CHECK(sw.points[0].kappa == 2.0);
    CHECK(sw.points[2].kappa == 0.5);
    for (const auto& p : sw.points) {
        CHECK(p.survived == 2);
        CHECK(p.e_b2 > 0.0);
        CHECK(std::isfinite(p.e_u));
    }
    CHECK(std::isfinite(sw.slope_log_eu_log_kappa));

    CHECK_THROWS_AS((void)kappa_sweep(cfg, {0.5, 0.25}), std::invalid_argument);
    CHECK_THROWS_AS((void)kappa_sweep(cfg, {0.25, 0.5, 1.0}), std::invalid_argument);
}
