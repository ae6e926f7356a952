#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mre/dynamics.hpp"
#include "mre/ensemble.hpp"
#include "mre/forcing.hpp"

namespace mre {

/// Carries every violation found, not just the first.
struct ConfigError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ConfigError(std::vector<std::string> v)
        : std::runtime_error(join(v)), violations(std::move(v)) {}

    static std::string join(const std::vector<std::string>& v) {
        std::string s = "config error:";
        for (const auto& m : v) s += "\n  - " + m;
        return s;
    }
};

/// Parsed key/value text: [section] headers, key = value lines, # comments.
struct ParsedConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        return s != sections.end() && s->second.count(key) > 0;
    }
    std::string get(const std::string& sec, const std::string& key, const std::string& fallback) const {
        auto s = sections.find(sec);
        if (s == sections.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

}  // namespace config_detail

inline ParsedConfig parse_config_text(const std::string& text) {
    ParsedConfig out;
    std::vector<std::string> violations;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                violations.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = config_detail::trim(line.substr(1, line.size() - 2));
            out.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            violations.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = config_detail::trim(line.substr(0, eq));
        const std::string value = config_detail::trim(line.substr(eq + 1));
        if (section.empty()) {
            violations.push_back("line " + std::to_string(lineno) + ": key '" + key +
                                 "' outside any section");
            continue;
        }
        if (out.sections[section].count(key)) {
            violations.push_back("duplicate key '" + section + "." + key + "'");
            continue;
        }
        out.sections[section][key] = value;
    }
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return out;
}

/// Canonical serialization (sorted sections and keys) for hashing; the hash
/// is therefore stable under key reordering in the source text.
inline std::string canonical_config_text(const ParsedConfig& cfg) {
    std::string s;
    for (const auto& [sec, kv] : cfg.sections)
        for (const auto& [k, v] : kv) s += sec + "." + k + "=" + v + "\n";
    return s;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t config_hash(const ParsedConfig& cfg) {
    return fnv1a64(canonical_config_text(cfg));
}

// ---------------------------------------------------------------------------
// SimConfig
// ---------------------------------------------------------------------------

enum class InitKind { zero, kolmogorov, abc, snapshot };

/// Validated run configuration assembled from the parsed text with defaults
/// filled (gamma = d/2 + 1, alpha = 1, power-law forcing).
struct SimConfig {
    int d = 2;
    int n = 32;
    double gamma = 0.0;  // 0 means "default d/2+1" until validation fills it
    double alpha = 1.0;
    double kappa = 0.5;
    double dt = 0.0;  // 0: auto step control
    double T = 10.0;
    std::uint64_t seed = 1;
    InitKind init = InitKind::zero;
    std::string init_snapshot_path;

    BasisFlavor flavor = BasisFlavor::stokes;
    std::string preset = "power_law";
    double lambda_max = 2.0;
    double preset_c = 1.0;
    double preset_q = 1.0;
    std::size_t preset_J = 0;
    double shell = 1.0;
    double shell_amplitude = 1.0;
    int tau_sign = 0;
    std::vector<double> explicit_amplitudes;

    int trajectories = 32;
    double burn_in = 0.0;
    std::uint64_t stride = 100;
    std::uint64_t samples = 50;
    int workers = 1;

    std::vector<double> sweep_kappas = {0.5, 0.25, 0.125};
    bool sweep_warm_start = true;

    std::uint64_t out_stride = 100;  // diagnostics cadence for single runs
    std::string out_dir = ".";
    std::uint64_t hash = 0;

    GridSpec grid() const { return GridSpec{d, n}; }

    PhysicsParams physics() const { return PhysicsParams{gamma, alpha, kappa}; }

    ForcingSpec forcing() const {
        BasisEnumeration base = enumerate_basis(d, lambda_max, flavor);
        PresetParams p;
        p.c = preset_c;
        p.q = preset_q;
        p.J = preset_J;
        p.shell_lambda = shell;
        p.shell_amplitude = shell_amplitude;
        p.tau_sign = tau_sign;
        p.explicit_amplitudes = explicit_amplitudes;
        return spectrum_preset(preset, p, std::move(base));
    }

    EnsembleConfig ensemble() const {
        EnsembleConfig e;
        e.grid = grid();
        e.params = physics();
        e.forcing = forcing();
        e.seed = seed;
        e.trajectories = trajectories;
        e.dt = dt;
        e.burn_in = burn_in;
        e.sample_stride = stride;
        e.samples_per_traj = samples;
        e.workers = workers;
        return e;
    }
};

namespace config_detail {

struct Reader {
    const ParsedConfig& cfg;
    std::vector<std::string>& violations;
    std::map<std::string, std::vector<std::string>> known;

    void allow(const std::string& sec, std::initializer_list<std::string> keys) {
        auto& v = known[sec];
        v.insert(v.end(), keys.begin(), keys.end());
    }

    void check_unknown() {
        for (const auto& [sec, kv] : cfg.sections) {
            auto it = known.find(sec);
            if (it == known.end()) {
                violations.push_back("unknown section [" + sec + "]");
                continue;
            }
            for (const auto& [k, v] : kv)
                if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
                    violations.push_back("unknown key '" + sec + "." + k + "'");
        }
    }

    template <class T, class Parse>
    void read(const std::string& sec, const std::string& key, T& dst, Parse parse) {
        if (!cfg.has(sec, key)) return;
        const std::string raw = cfg.get(sec, key, "");
        try {
            dst = parse(raw);
        } catch (const std::exception& e) {
            violations.push_back("bad value '" + sec + "." + key + " = " + raw + "': " + e.what());
        }
    }

    void read_double(const std::string& sec, const std::string& key, double& dst) {
        read(sec, key, dst, [](const std::string& s) {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing characters");
            return v;
        });
    }

    void read_int(const std::string& sec, const std::string& key, int& dst) {
        read(sec, key, dst, [](const std::string& s) {
            std::size_t pos = 0;
            const long v = std::stol(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing characters");
            return static_cast<int>(v);
        });
    }

    void read_u64(const std::string& sec, const std::string& key, std::uint64_t& dst) {
        read(sec, key, dst, [](const std::string& s) {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing characters");
            return static_cast<std::uint64_t>(v);
        });
    }
};

}  // namespace config_detail

inline SimConfig make_sim_config(const ParsedConfig& parsed) {
    std::vector<std::string> violations;
    config_detail::Reader rd{parsed, violations, {}};
    rd.allow("sim", {"d", "n", "gamma", "alpha", "kappa", "dt", "T", "seed", "init"});
    rd.allow("forcing", {"flavor", "preset", "lambda_max", "c", "q", "J", "shell", "amplitude",
                         "tau_sign", "amplitudes"});
    rd.allow("ensemble", {"trajectories", "burn_in", "stride", "samples", "workers"});
    rd.allow("sweep", {"kappas", "warm_start"});
    rd.allow("output", {"stride", "dir"});
    rd.check_unknown();

    SimConfig c;
    rd.read_int("sim", "d", c.d);
    rd.read_int("sim", "n", c.n);
    rd.read_double("sim", "gamma", c.gamma);
    rd.read_double("sim", "alpha", c.alpha);
    rd.read_double("sim", "kappa", c.kappa);
    if (parsed.has("sim", "dt")) {
        const std::string raw = parsed.get("sim", "dt", "auto");
        if (raw == "auto")
            c.dt = 0.0;
        else
            rd.read_double("sim", "dt", c.dt);
    }
    rd.read_double("sim", "T", c.T);
    rd.read_u64("sim", "seed", c.seed);
    if (parsed.has("sim", "init")) {
        const std::string raw = parsed.get("sim", "init", "zero");
        if (raw == "zero")
            c.init = InitKind::zero;
        else if (raw == "kolmogorov")
            c.init = InitKind::kolmogorov;
        else if (raw == "abc")
            c.init = InitKind::abc;
        else if (raw.rfind("snapshot:", 0) == 0) {
            c.init = InitKind::snapshot;
            c.init_snapshot_path = raw.substr(9);
        } else
            violations.push_back("bad value 'sim.init = " + raw +
                                 "': expected zero|kolmogorov|abc|snapshot:PATH");
    }

    if (parsed.has("forcing", "flavor")) {
        const std::string raw = parsed.get("forcing", "flavor", "stokes");
        if (raw == "stokes")
            c.flavor = BasisFlavor::stokes;
        else if (raw == "beltrami")
            c.flavor = BasisFlavor::beltrami;
        else
            violations.push_back("bad value 'forcing.flavor = " + raw + "': expected stokes|beltrami");
    }
    if (parsed.has("forcing", "preset")) c.preset = parsed.get("forcing", "preset", "power_law");
    rd.read_double("forcing", "lambda_max", c.lambda_max);
    rd.read_double("forcing", "c", c.preset_c);
    rd.read_double("forcing", "q", c.preset_q);
    {
        std::uint64_t J = c.preset_J;
        rd.read_u64("forcing", "J", J);
        c.preset_J = static_cast<std::size_t>(J);
    }
    rd.read_double("forcing", "shell", c.shell);
    rd.read_double("forcing", "amplitude", c.shell_amplitude);
    rd.read_int("forcing", "tau_sign", c.tau_sign);
    if (parsed.has("forcing", "amplitudes")) {
        for (const auto& tok : config_detail::split_list(parsed.get("forcing", "amplitudes", ""))) {
            try {
                c.explicit_amplitudes.push_back(std::stod(tok));
            } catch (const std::exception&) {
                violations.push_back("bad value in 'forcing.amplitudes': '" + tok + "'");
            }
        }
    }

    rd.read_int("ensemble", "trajectories", c.trajectories);
    rd.read_double("ensemble", "burn_in", c.burn_in);
    rd.read_u64("ensemble", "stride", c.stride);
    rd.read_u64("ensemble", "samples", c.samples);
    rd.read_int("ensemble", "workers", c.workers);

    if (parsed.has("sweep", "kappas")) {
        c.sweep_kappas.clear();
        for (const auto& tok : config_detail::split_list(parsed.get("sweep", "kappas", ""))) {
            try {
                c.sweep_kappas.push_back(std::stod(tok));
            } catch (const std::exception&) {
                violations.push_back("bad value in 'sweep.kappas': '" + tok + "'");
            }
        }
    }
    if (parsed.has("sweep", "warm_start")) {
        const std::string raw = parsed.get("sweep", "warm_start", "true");
        if (raw == "true" || raw == "1")
            c.sweep_warm_start = true;
        else if (raw == "false" || raw == "0")
            c.sweep_warm_start = false;
        else
            violations.push_back("bad value 'sweep.warm_start = " + raw + "': expected true|false");
    }

    rd.read_u64("output", "stride", c.out_stride);
    if (parsed.has("output", "dir")) c.out_dir = parsed.get("output", "dir", ".");

    // constraint checks, every violation reported
    if (c.d != 2 && c.d != 3) violations.push_back("sim.d must be 2 or 3, got " + std::to_string(c.d));
    if (c.n < 8 || c.n % 2 != 0)
        violations.push_back("sim.n must be even and >= 8, got " + std::to_string(c.n));
    if (c.gamma == 0.0 && (c.d == 2 || c.d == 3)) c.gamma = PhysicsParams::default_gamma(c.d);
    if ((c.d == 2 || c.d == 3) && !(c.gamma > 0.5 * c.d))
        violations.push_back("sim.gamma must exceed d/2, got gamma = " + std::to_string(c.gamma) +
                             " with d = " + std::to_string(c.d));
    if (!(c.alpha >= 1.0)) violations.push_back("sim.alpha must be >= 1, got " + std::to_string(c.alpha));
    if (!(c.kappa >= 0.0)) violations.push_back("sim.kappa must be >= 0, got " + std::to_string(c.kappa));
    if (c.dt < 0.0) violations.push_back("sim.dt must be positive or auto");
    if (!(c.T > 0.0)) violations.push_back("sim.T must be > 0, got " + std::to_string(c.T));
    if (c.flavor == BasisFlavor::beltrami && c.d != 3)
        violations.push_back("forcing.flavor = beltrami requires sim.d = 3");
    if (c.preset != "power_law" && c.preset != "single_shell" && c.preset != "explicit")
        violations.push_back("forcing.preset must be power_law|single_shell|explicit, got '" + c.preset +
                             "'");
    if (c.tau_sign != -1 && c.tau_sign != 0 && c.tau_sign != 1)
        violations.push_back("forcing.tau_sign must be -1, 0 or 1");
    if (c.trajectories < 1) violations.push_back("ensemble.trajectories must be >= 1");
    if (c.workers < 1) violations.push_back("ensemble.workers must be >= 1");
    if ((c.d == 2 || c.d == 3) && c.n >= 8 && c.n % 2 == 0 && c.lambda_max >= 1.0) {
        const double kmax = std::floor(std::sqrt(c.lambda_max));
        if (kmax > GridSpec{c.d, c.n}.dealias_limit())
            violations.push_back("forcing.lambda_max reaches outside the dealias band of n = " +
                                 std::to_string(c.n));
    }

    if (!violations.empty()) throw ConfigError(std::move(violations));
    c.hash = config_hash(parsed);
    return c;
}

inline SimConfig parse_config(const std::string& text) {
    return make_sim_config(parse_config_text(text));
}

}  // namespace mre
