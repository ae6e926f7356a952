// Command-line front end: single runs, ensembles, kappa sweeps, basis tables,
// snapshot diagnostics and checkpoint resume. Exit codes: 0 success, 2 config
// error, 3 runtime blow-up, 4 acceptance-check failure in --check mode.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mre/config.hpp"
#include "mre/ensemble.hpp"
#include "mre/io.hpp"

namespace fs = std::filesystem;
using namespace mre;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitCheckFailed = 4;

void emit_error(const std::string& message, int code,
                const std::vector<std::string>& violations = {}) {
    nlohmann::json j;
    j["error"] = message;
    j["code"] = code;
    if (!violations.empty()) j["violations"] = violations;
    std::cerr << j.dump() << "\n";
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
    bool quiet = false;
    bool check = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_check = false) {
    cmd->add_option("--config", args.config_path, "configuration file")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides [output] dir)");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&args](const std::uint64_t& v) { args.seed_override = v; }, "seed override");
    cmd->add_flag("--quiet", args.quiet, "suppress progress output");
    if (with_check) cmd->add_flag("--check", args.check, "exit 4 unless the acceptance gates pass");
}

SimConfig load_config(const CommonArgs& args) {
    std::ifstream f(args.config_path);
    if (!f) throw ConfigError({"cannot open config file '" + args.config_path + "'"});
    std::stringstream ss;
    ss << f.rdbuf();
    SimConfig cfg = parse_config(ss.str());
    if (args.seed_override) cfg.seed = *args.seed_override;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    return cfg;
}

SpectralField initial_field(const SimConfig& cfg) {
    switch (cfg.init) {
        case InitKind::zero: return SpectralField(cfg.grid());
        case InitKind::kolmogorov: return kolmogorov_field(cfg.grid());
        case InitKind::abc: return abc_field(cfg.grid(), 1.0, 1.0, 1.0);
        case InitKind::snapshot: {
            SpectralField B = read_snapshot(cfg.init_snapshot_path);
            if (B.grid != cfg.grid())
                throw ConfigError({"snapshot grid (d=" + std::to_string(B.grid.d) +
                                   ", n=" + std::to_string(B.grid.n) + ") does not match config (d=" +
                                   std::to_string(cfg.d) + ", n=" + std::to_string(cfg.n) + ")"});
            return B;
        }
    }
    return SpectralField(cfg.grid());
}

int cmd_simulate(const CommonArgs& args, double until) {
    const SimConfig cfg = load_config(args);
    fs::create_directories(cfg.out_dir);

    SimState state;
    state.B = initial_field(cfg);
    state.params = cfg.physics();
    state.rng = RngStream{cfg.seed, 0};
    const ForcingSpec spec = cfg.forcing();
    const double dt = cfg.dt > 0.0 ? cfg.dt : auto_dt(state.B, cfg.gamma);

    std::ofstream nd(fs::path(cfg.out_dir) / "diagnostics.ndjson");
    RunOptions opt;
    opt.stride = cfg.out_stride;
    opt.sink = [&](const SimState& s) { nd << record_to_ndjson(observe(s.B, s.params, s.t)) << "\n"; };

    const double horizon = until > 0.0 ? std::min(until, cfg.T) : cfg.T;
    state = run(std::move(state), spec, horizon, dt, opt);

    write_snapshot(state.B, (fs::path(cfg.out_dir) / "final.snap").string());
    write_checkpoint(state, dt, cfg.hash, (fs::path(cfg.out_dir) / "final.snap").string(),
                     (fs::path(cfg.out_dir) / "checkpoint.json").string());
    if (!args.quiet)
        std::cout << "simulate: T=" << state.t << " steps=" << state.step << " dt=" << dt
                  << " -> " << cfg.out_dir << "\n";
    return kExitOk;
}

int cmd_checkpoint_resume(const CommonArgs& args, const std::string& from_dir) {
    const SimConfig cfg = load_config(args);
    fs::create_directories(cfg.out_dir);

    const CheckpointMeta meta =
        read_checkpoint_meta((fs::path(from_dir) / "checkpoint.json").string());
    if (meta.config_hash != cfg.hash)
        throw ConfigError({"checkpoint was produced by a different config (hash mismatch)"});

    SimState state;
    state.B = read_snapshot((fs::path(from_dir) / "final.snap").string());
    state.t = meta.t;
    state.step = meta.step;
    state.params = cfg.physics();
    state.rng = RngStream{meta.seed, meta.trajectory};
    const ForcingSpec spec = cfg.forcing();

    const double dt = meta.dt;
    const std::uint64_t total_steps = static_cast<std::uint64_t>(std::ceil(cfg.T / dt - 1e-9));
    if (total_steps <= meta.step) throw ConfigError({"checkpoint already reaches sim.T"});
    const double remaining = static_cast<double>(total_steps - meta.step) * dt;

    std::ofstream nd(fs::path(cfg.out_dir) / "diagnostics.ndjson");
    RunOptions opt;
    opt.stride = cfg.out_stride;
    opt.sink = [&](const SimState& s) { nd << record_to_ndjson(observe(s.B, s.params, s.t)) << "\n"; };

    state = run(std::move(state), spec, remaining, dt, opt);
    write_snapshot(state.B, (fs::path(cfg.out_dir) / "final.snap").string());
    write_checkpoint(state, dt, cfg.hash, (fs::path(cfg.out_dir) / "final.snap").string(),
                     (fs::path(cfg.out_dir) / "checkpoint.json").string());
    if (!args.quiet)
        std::cout << "resume: continued from t=" << meta.t << " to t=" << state.t << "\n";
    return kExitOk;
}

int cmd_ensemble(const CommonArgs& args) {
    const SimConfig cfg = load_config(args);
    fs::create_directories(cfg.out_dir);

    EnsembleConfig ec = cfg.ensemble();
    ec.init = initial_field(cfg);
    const EnsembleResult res = run_ensemble(ec);

    std::ofstream nd(fs::path(cfg.out_dir) / "records.ndjson");
    for (const auto& recs : res.records)
        for (const auto& r : recs) nd << record_to_ndjson(r) << "\n";

    const BalanceReport rel = stationary_relations(res.records, ec.forcing, ec.params, cfg.d);
    nlohmann::json j = balance_report_to_json(rel);
    j["survived"] = res.survived;
    j["requested"] = res.requested;
    j["dt"] = res.dt;
    j["tau_int_energy"] = res.tau_int_energy;
    const double bmax = ec.forcing.max_amplitude();
    if (bmax > 0.0) {
        const ExpMomentResult em = exp_moment(res.records, ec.forcing, 0.25 / (bmax * bmax));
        j["exp_moment"] = {{"rho", em.rho},
                           {"estimate", em.estimate},
                           {"se", em.se},
                           {"bound", em.bound},
                           {"within_bound", em.within_bound}};
    }
    std::ofstream sj(fs::path(cfg.out_dir) / "stationary.json");
    sj << j.dump(2) << "\n";

    if (!args.quiet) std::cout << balance_report_table(rel);
    if (args.check && !rel.all_pass()) {
        emit_error("stationary relations outside tolerance", kExitCheckFailed);
        return kExitCheckFailed;
    }
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
    const SimConfig cfg = load_config(args);
    fs::create_directories(cfg.out_dir);

    EnsembleConfig base = cfg.ensemble();
    const SweepResult sw = kappa_sweep(base, cfg.sweep_kappas, cfg.sweep_warm_start);

    std::ofstream js(fs::path(cfg.out_dir) / "sweep.json");
    js << sweep_to_json(sw).dump(2) << "\n";
    std::ofstream cs(fs::path(cfg.out_dir) / "sweep.csv");
    cs << sweep_to_csv(sw);
    for (const auto& p : sw.points)
        write_snapshot(p.mean_field,
                       (fs::path(cfg.out_dir) / ("mean_field_k" + std::to_string(p.kappa) + ".snap"))
                           .string());

    if (!args.quiet) {
        std::cout << "kappa sweep: slope(log E||u||^2 vs log kappa) = " << sw.slope_log_eu_log_kappa
                  << "\n";
        for (const auto& p : sw.points)
            std::cout << "  kappa=" << p.kappa << "  E||u||^2=" << p.e_u << " (se " << p.e_u_se
                      << ")  E||B||^2=" << p.e_b2 << " (se " << p.e_b2_se << ")  mhs_res(mean)="
                      << p.mhs_res_mean_field << "\n";
    }
    if (args.check) {
        const SweepCheck chk = check_sweep(sw);
        if (!chk.pass()) {
            std::vector<std::string> why;
            if (!chk.slope_ok) why.push_back("slope outside [0.85, 1.15]");
            if (!chk.energy_consistent) why.push_back("E||B||^2 not kappa-independent within error");
            if (!chk.mhs_monotone) why.push_back("mean-field MHS residual not nonincreasing");
            emit_error("kappa-sweep acceptance gates failed", kExitCheckFailed, why);
            return kExitCheckFailed;
        }
    }
    return kExitOk;
}

int cmd_basis(int d, double lambda_max, const std::string& flavor_name, int n,
              const std::string& out_file, const std::string& dump_dir) {
    const BasisFlavor flavor = flavor_name == "beltrami" ? BasisFlavor::beltrami : BasisFlavor::stokes;
    const BasisEnumeration e = enumerate_basis(d, lambda_max, flavor);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_file.empty()) {
        file.open(out_file);
        out = &file;
    }
    *out << "j,k1,k2,k3,lambda,tau,branch,l\n";
    for (const auto& m : e.modes)
        *out << m.j << "," << m.k[0] << "," << m.k[1] << "," << m.k[2] << "," << m.lambda << ","
             << m.tau << "," << branch_name(m.branch) << "," << m.l << "\n";

    if (!dump_dir.empty()) {
        fs::create_directories(dump_dir);
        const GridSpec g{d, n};
        for (const auto& m : e.modes)
            write_snapshot(m.materialize(g),
                           (fs::path(dump_dir) / ("mode_" + std::to_string(m.j) + ".snap")).string());
    }
    return kExitOk;
}

int cmd_diagnose(const CommonArgs& args, const std::vector<std::string>& snapshots) {
    const SimConfig cfg = load_config(args);
    for (const auto& path : snapshots) {
        const SpectralField B = read_snapshot(path);
        if (B.grid.d != cfg.d)
            throw ConfigError({"snapshot '" + path + "' has d=" + std::to_string(B.grid.d) +
                               " but config says d=" + std::to_string(cfg.d)});
        std::cout << record_to_ndjson(observe(B, cfg.physics())) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral simulator of the randomly forced resistive magnetic relaxation "
                 "equations on the torus"};
    app.require_subcommand(1);

    CommonArgs sim_args, ens_args, sweep_args, diag_args, resume_args;
    std::string resume_from;
    std::vector<std::string> diag_snapshots;

    CLI::App* sim = app.add_subcommand("simulate", "run one trajectory");
    add_common(sim, sim_args);
    double sim_until = 0.0;
    sim->add_option("--until", sim_until,
                    "stop at this time (< sim.T) and checkpoint; default runs to sim.T");

    CLI::App* ens = app.add_subcommand("ensemble", "run a Monte Carlo ensemble");
    add_common(ens, ens_args, /*with_check=*/true);

    CLI::App* swp = app.add_subcommand("sweep", "kappa sweep toward the non-resistive limit");
    add_common(swp, sweep_args, /*with_check=*/true);

    int basis_d = 2, basis_n = 32;
    double basis_lambda_max = 4.0;
    std::string basis_flavor = "stokes", basis_out, basis_dump;
    CLI::App* bas = app.add_subcommand("basis", "emit eigenbasis mode tables");
    bas->add_option("--d", basis_d, "dimension (2 or 3)");
    bas->add_option("--lambda-max", basis_lambda_max, "eigenvalue cutoff");
    bas->add_option("--flavor", basis_flavor, "stokes or beltrami");
    bas->add_option("--n", basis_n, "grid size for --dump-fields");
    bas->add_option("--out-file", basis_out, "write the CSV here instead of stdout");
    bas->add_option("--dump-fields", basis_dump, "write one snapshot per mode into this directory");

    CLI::App* dia = app.add_subcommand("diagnose", "recompute observables from snapshots");
    add_common(dia, diag_args);
    dia->add_option("snapshots", diag_snapshots, "snapshot files")->required();

    CLI::App* res = app.add_subcommand("checkpoint-resume", "continue a run bit-exactly");
    add_common(res, resume_args);
    res->add_option("--from", resume_from, "directory holding final.snap and checkpoint.json")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error(std::string("argument error: ") + e.what(), kExitConfig);
        std::cerr << app.help() << "\n";
        return kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args, sim_until);
        if (ens->parsed()) return cmd_ensemble(ens_args);
        if (swp->parsed()) return cmd_sweep(sweep_args);
        if (bas->parsed())
            return cmd_basis(basis_d, basis_lambda_max, basis_flavor, basis_n, basis_out, basis_dump);
        if (dia->parsed()) return cmd_diagnose(diag_args, diag_snapshots);
        if (res->parsed()) return cmd_checkpoint_resume(resume_args, resume_from);
    } catch (const ConfigError& e) {
        emit_error("invalid configuration", kExitConfig, e.violations);
        return kExitConfig;
    } catch (const BlowupError& e) {
        emit_error(e.what(), kExitBlowup);
        return kExitBlowup;
    } catch (const SnapshotError& e) {
        emit_error(e.what(), kExitConfig);
        return kExitConfig;
    } catch (const std::exception& e) {
        emit_error(e.what(), kExitConfig);
        return kExitConfig;
    }
    return kExitOk;
}
