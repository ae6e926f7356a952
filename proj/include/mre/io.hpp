#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mre/diagnostics.hpp"
#include "mre/ensemble.hpp"
#include "mre/spectral_field.hpp"

namespace mre {

struct SnapshotError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace io_detail {

inline void require_little_endian() {
    const std::uint32_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    if (b != 1) throw SnapshotError("snapshot io requires a little-endian host");
}

template <class T>
inline void put(std::string& buf, T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
}

template <class T>
inline T take(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw SnapshotError("snapshot truncated");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

inline std::vector<Wave> sorted_band(const GridSpec& g) {
    std::vector<Wave> waves;
    const int m = g.max_wave();
    const int zlo = g.d == 3 ? -m : 0, zhi = g.d == 3 ? m : 0;
    for (int k0 = -m; k0 <= m; ++k0)
        for (int k1 = -m; k1 <= m; ++k1)
            for (int k2 = zlo; k2 <= zhi; ++k2) {
                if (k0 == 0 && k1 == 0 && k2 == 0) continue;
                waves.push_back(Wave{k0, k1, k2});
            }
    // loop order is already lexicographic in (k_1,...,k_d)
    return waves;
}

}  // namespace io_detail

/// Binary snapshot: little-endian, magic "MRE1", u32 d, u32 n, u64 count,
/// then per retained k sorted lexicographically: d x i32 wavevector and
/// d complex components as f64 (re, im). Bit-exact round trip.
inline std::string encode_snapshot(const SpectralField& B) {
    io_detail::require_little_endian();
    std::string buf;
    buf.append("MRE1", 4);
    io_detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(B.grid.d));
    io_detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(B.grid.n));
    const auto waves = io_detail::sorted_band(B.grid);
    io_detail::put<std::uint64_t>(buf, static_cast<std::uint64_t>(waves.size()));
    for (const auto& k : waves) {
        for (int c = 0; c < B.grid.d; ++c) io_detail::put<std::int32_t>(buf, k[c]);
        const std::size_t idx = index_of_wave(B.grid, k);
        for (int c = 0; c < B.grid.d; ++c) {
            io_detail::put<double>(buf, B.comp[c][idx].real());
            io_detail::put<double>(buf, B.comp[c][idx].imag());
        }
    }
    return buf;
}

inline SpectralField decode_snapshot(const std::string& buf) {
    io_detail::require_little_endian();
    std::size_t pos = 0;
    if (buf.size() < 4 || buf.compare(0, 3, "MRE") != 0) throw SnapshotError("bad snapshot magic");
    if (buf[3] != '1') throw SnapshotError(std::string("unsupported snapshot version '") + buf[3] + "'");
    pos = 4;
    const auto d = io_detail::take<std::uint32_t>(buf, pos);
    const auto n = io_detail::take<std::uint32_t>(buf, pos);
    if (d != 2 && d != 3) throw SnapshotError("snapshot d must be 2 or 3");
    if (n < 8 || n % 2 != 0) throw SnapshotError("snapshot n must be even and >= 8");
    GridSpec g{static_cast<int>(d), static_cast<int>(n)};
    const auto count = io_detail::take<std::uint64_t>(buf, pos);
    const auto waves = io_detail::sorted_band(g);
    if (count != waves.size()) throw SnapshotError("snapshot coefficient count mismatch");
    SpectralField B(g);
    for (const auto& k : waves) {
        Wave kk{0, 0, 0};
        for (std::uint32_t c = 0; c < d; ++c) kk[c] = io_detail::take<std::int32_t>(buf, pos);
        if (kk != k) throw SnapshotError("snapshot wavevectors out of order");
        const std::size_t idx = index_of_wave(g, k);
        for (std::uint32_t c = 0; c < d; ++c) {
            const double re = io_detail::take<double>(buf, pos);
            const double im = io_detail::take<double>(buf, pos);
            B.comp[c][idx] = {re, im};
        }
    }
    if (pos != buf.size()) throw SnapshotError("snapshot has trailing bytes");
    return B;
}

inline void write_snapshot(const SpectralField& B, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SnapshotError("cannot open '" + path + "' for writing");
    const std::string buf = encode_snapshot(B);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw SnapshotError("short write to '" + path + "'");
}

inline SpectralField read_snapshot(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SnapshotError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return decode_snapshot(ss.str());
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

/// Snapshot plus the metadata needed for a bit-exact resume.
struct CheckpointMeta {
    double t = 0.0;
    std::uint64_t step = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t trajectory = 0;
    std::uint64_t config_hash = 0;
};

inline void write_checkpoint(const SimState& s, double dt, std::uint64_t config_hash,
                             const std::string& snapshot_path, const std::string& meta_path) {
    write_snapshot(s.B, snapshot_path);
    nlohmann::json j;
    j["t"] = s.t;
    j["step"] = s.step;
    j["dt"] = dt;
    j["seed"] = s.rng.seed;
    j["trajectory"] = s.rng.trajectory;
    j["config_hash"] = config_hash;
    std::ofstream f(meta_path);
    if (!f) throw SnapshotError("cannot open '" + meta_path + "' for writing");
    f << j.dump(2) << "\n";
}

inline CheckpointMeta read_checkpoint_meta(const std::string& meta_path) {
    std::ifstream f(meta_path);
    if (!f) throw SnapshotError("cannot open '" + meta_path + "'");
    nlohmann::json j;
    f >> j;
    CheckpointMeta m;
    m.t = j.at("t").get<double>();
    m.step = j.at("step").get<std::uint64_t>();
    m.dt = j.at("dt").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.trajectory = j.at("trajectory").get<std::uint32_t>();
    m.config_hash = j.at("config_hash").get<std::uint64_t>();
    return m;
}

// ---------------------------------------------------------------------------
// Diagnostics streaming
// ---------------------------------------------------------------------------

namespace io_detail {

inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace io_detail

/// One NDJSON line with the pinned key set; dimension-inapplicable entries
/// are null. Floats carry 17 significant digits so parsing is lossless.
inline std::string record_to_ndjson(const DiagnosticsRecord& r) {
    std::string s = "{\"t\":" + io_detail::g17(r.t);
    s += ",\"E\":" + io_detail::g17(r.energy);
    s += ",\"gradE\":" + io_detail::g17(r.grad_energy);
    s += ",\"uHg\":" + io_detail::g17(r.u_norm);
    s += ",\"H\":" + (r.helicity ? io_detail::g17(*r.helicity) : std::string("null"));
    s += ",\"M\":" + (r.msp ? io_detail::g17(*r.msp) : std::string("null"));
    s += ",\"curlBB\":" + (r.curl_bb ? io_detail::g17(*r.curl_bb) : std::string("null"));
    s += ",\"mhs_res\":" + io_detail::g17(r.mhs_res);
    if (r.casimirs.empty()) {
        s += ",\"casimirs\":null";
    } else {
        s += ",\"casimirs\":[";
        for (std::size_t i = 0; i < r.casimirs.size(); ++i) {
            if (i) s += ",";
            s += "[\"" + r.casimirs[i].first + "\"," + io_detail::g17(r.casimirs[i].second) + "]";
        }
        s += "]";
    }
    s += "}";
    return s;
}

inline nlohmann::json balance_report_to_json(const BalanceReport& rep) {
    nlohmann::json j;
    j["single_trajectory"] = rep.single_trajectory;
    j["all_pass"] = rep.all_pass();
    j["identities"] = nlohmann::json::array();
    for (const auto& e : rep.entries) {
        nlohmann::json je;
        je["id"] = e.id;
        je["lhs"] = e.lhs;
        je["rhs"] = e.rhs;
        je["residual_abs"] = e.residual_abs;
        je["residual_rel"] = e.residual_rel;
        je["se"] = e.se;
        je["allowance"] = e.allowance;
        je["tolerance"] = e.tolerance;
        je["pass"] = e.pass;
        j["identities"].push_back(je);
    }
    return j;
}

inline std::string balance_report_table(const BalanceReport& rep) {
    char line[256];
    std::string s;
    std::snprintf(line, sizeof(line), "%-14s %14s %14s %12s %10s %6s\n", "identity", "lhs", "rhs",
                  "residual", "tol", "pass");
    s += line;
    for (const auto& e : rep.entries) {
        std::snprintf(line, sizeof(line), "%-14s %14.6g %14.6g %12.4g %10.4g %6s\n", e.id.c_str(),
                      e.lhs, e.rhs, e.residual_abs, e.tolerance, e.pass ? "yes" : "NO");
        s += line;
    }
    return s;
}

inline nlohmann::json sweep_to_json(const SweepResult& sw) {
    nlohmann::json j;
    j["slope_log_Eu_log_kappa"] = sw.slope_log_eu_log_kappa;
    j["warm_started"] = sw.warm_started;
    j["caveat"] = sw.caveat;
    j["points"] = nlohmann::json::array();
    for (const auto& p : sw.points) {
        nlohmann::json jp;
        jp["kappa"] = p.kappa;
        jp["E_u2_Hgamma"] = p.e_u;
        jp["E_u2_se"] = p.e_u_se;
        jp["E_B2"] = p.e_b2;
        jp["E_B2_se"] = p.e_b2_se;
        jp["mhs_res_mean_field"] = p.mhs_res_mean_field;
        jp["mhs_res_se"] = p.mhs_res_se;
        jp["mhs_res_snapshot_scale"] = p.mhs_res_scale;
        jp["survived"] = p.survived;
        jp["requested"] = p.requested;
        jp["relations"] = balance_report_to_json(p.relations);
        j["points"].push_back(jp);
    }
    return j;
}

inline std::string sweep_to_csv(const SweepResult& sw) {
    std::string s = "kappa,E_u2,E_u2_se,E_B2,E_B2_se,mhs_res_mean_field,slope\n";
    for (const auto& p : sw.points) {
        s += io_detail::g17(p.kappa) + "," + io_detail::g17(p.e_u) + "," + io_detail::g17(p.e_u_se) +
             "," + io_detail::g17(p.e_b2) + "," + io_detail::g17(p.e_b2_se) + "," +
             io_detail::g17(p.mhs_res_mean_field) + "," + io_detail::g17(sw.slope_log_eu_log_kappa) +
             "\n";
    }
    return s;
}

}  // namespace mre
