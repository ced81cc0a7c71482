#include "kduo/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "kduo/io.hpp"
#include "kduo/reduce.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace kduo {

namespace {

volatile std::sig_atomic_t g_interrupt = 0;

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    return x;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        auto comma = v.find(',', pos);
        const std::string tok =
            v.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) out.push_back(to_double(key, tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

// One concrete simulation with everything resolved.
struct RunUnit {
    RunMode mode = RunMode::Quantum;
    ModelParams params;
    std::uint64_t seed = 0;
    std::string label;
    std::string dir;  // absolute/relative output directory
    std::int64_t record_every = 1;
    std::size_t particles = 100000;
    GuardConfig guard;
    bool compute_sl = false, compute_svn = false, compute_scl = false;
    int scl_R_bins = 64;
    double scl_P_width = 0.0;
    bool kick_literal = false;
    bool emit_distribution = false, emit_ensemble = false;
    std::optional<std::string> resume_path;
    std::string note;  // free-form metadata remark (guard compromises etc.)
};

struct Fig4Row {
    double x = 0.0, w = 0.0;
    std::string label;
};

// Deferred outputs assembled from unit CSVs after all units finish.
struct PostProcess {
    // fig1: (quantum label, classical label, diff output name)
    std::vector<std::array<std::string, 3>> diffs;
    // fig4: per-w fit summary
    std::vector<Fig4Row> fig4;
    std::int64_t fit_lo = 20, fit_hi = 200;
    std::string dir;
};

json params_json(const ModelParams& p) {
    return json{{"m", p.m},       {"M", p.M},           {"mu", p.mu},
                {"k", p.k},       {"K", p.K},           {"T", p.T},
                {"hbar", p.hbar}, {"w", p.w},           {"N_R", p.N_R},
                {"N_r", p.N_r},   {"n_kicks", p.n_kicks}};
}

void write_metadata(const RunUnit& u, const std::vector<std::string>& files,
                    double wall_s, bool interrupted) {
    json meta;
    meta["version"] = kVersion;
    meta["mode"] = mode_name(u.mode);
    meta["label"] = u.label;
    meta["params"] = params_json(u.params);
    meta["seed"] = u.seed;
    meta["rng"] = "splitmix64";
    meta["record_every"] = u.record_every;
    meta["record_convention"] = "after_kick";
    meta["guard"] = json{{"enabled", u.guard.enabled},
                         {"window_frac", u.guard.window_frac},
                         {"tail_tol", u.guard.tail_tol}};
    meta["kick_literal"] = u.kick_literal;
    if (u.mode == RunMode::Classical || u.mode == RunMode::SingleRotorClassical)
        meta["particles"] = u.particles;
    if (u.compute_scl)
        meta["classical_entropy_grid"] =
            json{{"R_bins", u.scl_R_bins},
                 {"P_bin_width", u.scl_P_width > 0.0 ? u.scl_P_width : u.params.K}};
    if (!u.note.empty()) meta["note"] = u.note;
    meta["files"] = files;
    meta["wall_time_s"] = wall_s;
    if (interrupted) meta["interrupted"] = true;
    std::ofstream out(fs::path(u.dir) / (u.label + ".meta.json"));
    out << meta.dump(2) << '\n';
}

Moments array_moments(const std::vector<double>& P) {
    Moments m;
    m.P_mean = sample_mean(P);
    m.P2_mean = sample_mean_sq(P);
    return m;
}

Moments single_rotor_moments(const std::vector<cplx>& amps, const ModelParams& p) {
    const auto NR = static_cast<std::int64_t>(amps.size());
    Moments m;
    m.P_mean = pairwise_sum(amps.size(), [&](std::size_t i) {
        const double l =
            static_cast<double>(static_cast<std::int64_t>(i) < NR / 2
                                    ? static_cast<std::int64_t>(i)
                                    : static_cast<std::int64_t>(i) - NR);
        return std::norm(amps[i]) * p.hbar * l;
    });
    m.P2_mean = pairwise_sum(amps.size(), [&](std::size_t i) {
        const double l =
            static_cast<double>(static_cast<std::int64_t>(i) < NR / 2
                                    ? static_cast<std::int64_t>(i)
                                    : static_cast<std::int64_t>(i) - NR);
        const double P = p.hbar * l;
        return std::norm(amps[i]) * P * P;
    });
    return m;
}

void run_quantum_unit(const RunUnit& u) {
    const auto t0 = std::chrono::steady_clock::now();
    Transformer t(u.params.N_R, u.params.N_r);
    QuantumState s = [&] {
        if (!u.resume_path) return initial_state(u.params);
        QuantumState loaded = read_checkpoint(*u.resume_path);
        const ModelParams& a = loaded.params;
        const ModelParams& b = u.params;
        if (a.N_R != b.N_R || a.N_r != b.N_r || a.m != b.m || a.k != b.k ||
            a.T != b.T || a.hbar != b.hbar || a.w != b.w)
            throw StateError("checkpoint params differ from configured params");
        return loaded;
    }();
    TimeSeries ts;
    const bool need_gram = u.compute_sl || u.compute_svn;
    StateObserver obs = [&](std::int64_t n, const QuantumState& st) {
        TimeSeries::Row row;
        row.n = n;
        const Moments m = momentum_moments(st);
        row.P_mean = m.P_mean;
        row.P2_mean = m.P2_mean;
        row.delta2 = delta2(m, st.params);
        if (need_gram) {
            const GramMatrix g = gram(st);
            if (u.compute_sl) row.s_l = linear_entropy(g);
            if (u.compute_svn) row.S_vn = von_neumann_entropy(g);
        }
        ts.rows.push_back(row);
        return true;
    };
    EvolveOptions opts;
    opts.record_every = u.record_every;
    opts.guard = u.guard;
    opts.interrupt = interrupt_flag();
    opts.checkpoint_path = (fs::path(u.dir) / (u.label + ".interrupted.ckpt")).string();
    const std::int64_t remaining = u.params.n_kicks - s.kick_count;
    const EvolveResult res = evolve(s, t, remaining > 0 ? remaining : 0, obs, opts);
    std::vector<std::string> files;
    const std::string ts_file = u.label + ".csv";
    write_timeseries_csv((fs::path(u.dir) / ts_file).string(), ts);
    files.push_back(ts_file);
    if (u.emit_distribution) {
        const std::string df = u.label + "_dist.csv";
        write_distribution_csv((fs::path(u.dir) / df).string(),
                               momentum_distribution(s));
        files.push_back(df);
    }
    if (res.interrupted) files.push_back(u.label + ".interrupted.ckpt");
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_metadata(u, files, wall, res.interrupted);
}

void run_classical_unit(const RunUnit& u) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool coupled = u.mode == RunMode::Classical;
    ClassicalEnsemble e = coupled
                              ? sample_ensemble(u.params, u.particles, u.seed)
                              : sample_standard_ensemble(u.params, u.particles, u.seed);
    TimeSeries ts;
    const double p_width = u.scl_P_width > 0.0 ? u.scl_P_width : u.params.K;
    auto record = [&](std::int64_t n, const ClassicalEnsemble& en) {
        TimeSeries::Row row;
        row.n = n;
        const Moments m = array_moments(en.P);
        row.P_mean = m.P_mean;
        row.P2_mean = m.P2_mean;
        row.delta2 = delta2(m, en.params);
        if (u.compute_scl)
            row.S_cl = classical_entropy(en.R, en.P, u.scl_R_bins, p_width);
        ts.rows.push_back(row);
        return true;
    };
    if (coupled) {
        evolve_ensemble(e, u.params.n_kicks, record, u.record_every);
    } else {
        for (std::int64_t n = 0; n < u.params.n_kicks; ++n) {
            step_standard_ensemble(e);
            if (u.record_every > 0 && e.kick_count % u.record_every == 0)
                record(e.kick_count, e);
        }
    }
    std::vector<std::string> files;
    const std::string ts_file = u.label + ".csv";
    write_timeseries_csv((fs::path(u.dir) / ts_file).string(), ts);
    files.push_back(ts_file);
    if (u.emit_ensemble) {
        const std::string ef = u.label + "_ensemble.csv";
        write_ensemble_csv((fs::path(u.dir) / ef).string(), e.R, e.P,
                           coupled ? e.r : std::vector<double>(e.size(), 0.0),
                           coupled ? e.p : std::vector<double>(e.size(), 0.0));
        files.push_back(ef);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_metadata(u, files, wall, false);
}

void run_single_rotor_quantum_unit(const RunUnit& u) {
    const auto t0 = std::chrono::steady_clock::now();
    SingleRotor rotor(u.params, u.kick_literal);
    auto amps = rotor.initial();
    TimeSeries ts;
    SingleRotor::Observer obs = [&](std::int64_t n, const std::vector<cplx>& a) {
        TimeSeries::Row row;
        row.n = n;
        const Moments m = single_rotor_moments(a, u.params);
        row.P_mean = m.P_mean;
        row.P2_mean = m.P2_mean;
        row.delta2 = delta2(m, u.params);
        ts.rows.push_back(row);
        return true;
    };
    rotor.evolve(amps, u.params.n_kicks, obs, u.guard, u.record_every);
    std::vector<std::string> files;
    const std::string ts_file = u.label + ".csv";
    write_timeseries_csv((fs::path(u.dir) / ts_file).string(), ts);
    files.push_back(ts_file);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_metadata(u, files, wall, false);
}

void run_unit(const RunUnit& u) {
    fs::create_directories(u.dir);
    switch (u.mode) {
        case RunMode::Quantum:
            run_quantum_unit(u);
            break;
        case RunMode::Classical:
        case RunMode::SingleRotorClassical:
            run_classical_unit(u);
            break;
        case RunMode::SingleRotorQuantum:
            run_single_rotor_quantum_unit(u);
            break;
        default:
            throw ConfigError("run_unit: unsupported mode");
    }
}

ModelParams with(const ModelParams& base, double hbar, double w, std::int64_t NR,
                 std::int64_t Nr, std::int64_t n_kicks) {
    ModelParams p = base;
    p.hbar = hbar;
    p.w = w;
    p.N_R = NR;
    p.N_r = Nr;
    p.n_kicks = n_kicks;
    validate(p);
    return p;
}

RunUnit base_unit(const ExperimentSpec& spec, const std::string& dir) {
    RunUnit u;
    u.params = spec.params;
    u.seed = spec.seed;
    u.dir = dir;
    u.record_every = spec.record_every;
    u.particles = spec.particles;
    u.guard = spec.guard;
    u.compute_sl = spec.compute_sl;
    u.compute_svn = spec.compute_svn;
    u.compute_scl = spec.compute_scl;
    u.scl_R_bins = spec.scl_R_bins;
    u.scl_P_width = spec.scl_P_width;
    u.kick_literal = spec.kick_literal;
    u.emit_distribution = spec.emit_distribution;
    u.emit_ensemble = spec.emit_ensemble;
    return u;
}

// Figure presets. Desk scale trades grid size (and where unavoidable the
// guard) for minutes-scale runtimes; every compromise lands in metadata.
void expand_preset(const ExperimentSpec& spec, std::vector<RunUnit>& units,
                   PostProcess& post) {
    const std::string dir = (fs::path(spec.out_dir) / spec.preset).string();
    post.dir = dir;
    const bool paper = spec.scale == "paper";
    ModelParams base = spec.params;

    if (spec.preset == "fig1") {
        // variance-difference series, w = 0 (single rotor) and 0.1 .. 0.7
        const double hbar = paper ? 0.07 : 0.25;
        const std::int64_t NR = paper ? 16384 : 2048;
        const std::int64_t Nr = paper ? 256 : 64;
        const std::int64_t n = paper ? 500 : 300;
        GuardConfig guard;
        std::string note;
        if (!paper) {
            guard.tail_tol = 1e-2;  // momentum support wraps the desk grid late
            note = "desk scale: loosened guard tail_tol; wrap tails < 1e-2 "
                   "affect late-time rows only";
        } else {
            guard.tail_tol = 2e-2;
            note = "paper grid fills past N_R/4 for large w at n=500; guard "
                   "loosened to match the paper's own basis compromise";
        }
        std::vector<double> ws{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
        std::uint64_t member = 0;
        {
            RunUnit q = base_unit(spec, dir);
            q.mode = RunMode::SingleRotorQuantum;
            q.params = with(base, hbar, 0.5, NR, Nr, n);  // w unused at w=0 row
            q.guard = guard;
            q.note = note;
            q.label = "single_rotor_quantum_w0";
            q.seed = spec.seed + member++;
            units.push_back(q);
            RunUnit c = q;
            c.mode = RunMode::SingleRotorClassical;
            c.label = "single_rotor_classical_w0";
            c.seed = spec.seed + member++;
            units.push_back(c);
            post.diffs.push_back({q.label, c.label, "diff_w0.csv"});
        }
        for (double w : ws) {
            RunUnit q = base_unit(spec, dir);
            q.mode = RunMode::Quantum;
            q.params = with(base, hbar, w, NR, Nr, n);
            q.guard = guard;
            q.note = note;
            q.label = "quantum_w" + fmt_g(w);
            q.seed = spec.seed + member++;
            units.push_back(q);
            RunUnit c = q;
            c.mode = RunMode::Classical;
            c.label = "classical_w" + fmt_g(w);
            c.seed = spec.seed + member++;
            units.push_back(c);
            post.diffs.push_back({q.label, c.label, "diff_w" + fmt_g(w) + ".csv"});
        }
    } else if (spec.preset == "fig2") {
        // momentum distributions at n = 500
        struct Panel {
            double hbar, w;
        };
        const std::vector<Panel> panels{{0.25, 0.2}, {0.25, 1.0}, {0.1, 0.2}};
        std::uint64_t member = 0;
        for (const Panel& pn : panels) {
            std::int64_t NR, Nr;
            if (paper) {
                NR = pn.hbar < 0.2 ? 32768 : 16384;
                Nr = pn.hbar < 0.2 ? 512 : 256;
            } else {
                NR = pn.w < 0.5 ? 16384 : 8192;
                Nr = pn.w < 0.5 ? 64 : 256;
            }
            RunUnit q = base_unit(spec, dir);
            q.mode = RunMode::Quantum;
            q.params = with(base, pn.hbar, pn.w, NR, Nr, 500);
            q.emit_distribution = true;
            q.label = "quantum_w" + fmt_g(pn.w) + "_hbar" + fmt_g(pn.hbar);
            q.seed = spec.seed + member++;
            units.push_back(q);
        }
    } else if (spec.preset == "fig3") {
        // linear entropy vs time
        const std::int64_t NR = paper ? 16384 : 4096;
        const std::int64_t Nr = paper ? 256 : 128;
        const std::int64_t n = paper ? 500 : 100;
        std::uint64_t member = 0;
        for (double w : {0.1, 0.3, 0.5, 0.7}) {
            RunUnit q = base_unit(spec, dir);
            q.mode = RunMode::Quantum;
            q.params = with(base, 0.07, w, NR, Nr, n);
            q.compute_sl = true;
            if (paper) {
                q.guard.tail_tol = 2e-2;
                q.note = "paper-grid compromise: support passes N_R/4 late in "
                         "the run; tolerance loosened accordingly";
            } else {
                q.guard.enabled = false;
                q.note = "desk grid pinned at 4096x128: momentum support "
                         "exceeds N_R/4 at hbar=0.07, guard disabled";
            }
            q.label = "quantum_w" + fmt_g(w);
            q.seed = spec.seed + member++;
            units.push_back(q);
        }
    } else if (spec.preset == "fig4") {
        // diffusion-coefficient scaling over one decade of x = wK/hbar
        const std::int64_t n = paper ? 4000 : 200;
        post.fit_lo = paper ? 1500 : 20;
        post.fit_hi = paper ? 4000 : 200;
        std::uint64_t member = 0;
        for (int i = 0; i <= 5; ++i) {
            const double w = 0.125 * std::pow(10.0, i / 5.0);
            const double x = w * 5.0 / 0.25;
            const std::int64_t Nr = w <= 0.5 ? 64 : 128;
            RunUnit q = base_unit(spec, dir);
            q.mode = RunMode::Quantum;
            q.params = with(base, 0.25, w, 8192, Nr, n);
            q.label = "quantum_w" + fmt_g(w);
            q.seed = spec.seed + member++;
            if (paper)
                q.note = "fit window [1500,4000] sits past the localization "
                         "transient, where the quartic scaling is measurable";
            units.push_back(q);
            post.fig4.push_back({x, w, q.label});
        }
    } else if (spec.preset == "fig5") {
        // entropy growth; the paper itself shrank the basis for these runs,
        // so desk and paper scales coincide
        std::uint64_t member = 0;
        for (double w : {0.2, 0.4, 0.6, 0.8, 1.0}) {
            RunUnit q = base_unit(spec, dir);
            q.mode = RunMode::Quantum;
            q.params = with(base, 0.07, w, 4096, 256, 100);
            q.compute_sl = true;
            q.compute_svn = true;
            q.guard.enabled = false;
            q.note = "grid pinned at 4096x256 (the paper's reduced basis); "
                     "support exceeds N_R/4 at hbar=0.07, guard disabled";
            q.label = "quantum_w" + fmt_g(w);
            q.seed = spec.seed + member++;
            units.push_back(q);
            RunUnit c = base_unit(spec, dir);
            c.mode = RunMode::Classical;
            c.params = with(base, 0.07, w, 4096, 256, 500);
            c.compute_scl = true;
            c.label = "classical_w" + fmt_g(w);
            c.seed = spec.seed + member++;
            units.push_back(c);
        }
    } else {
        throw ConfigError("unknown preset: " + spec.preset);
    }
}

void expand(const ExperimentSpec& spec, std::vector<RunUnit>& units,
            PostProcess& post) {
    if (!spec.preset.empty()) {
        expand_preset(spec, units, post);
        return;
    }
    post.dir = spec.out_dir;
    post.fit_lo = spec.fit_lo;
    post.fit_hi = spec.fit_hi;
    if (spec.mode == RunMode::Sweep) {
        if (spec.sweep_param != "w")
            throw ConfigError("sweep_param must be 'w' (got '" + spec.sweep_param +
                              "')");
        if (spec.sweep_values.empty())
            throw ConfigError("sweep mode requires sweep_values");
        std::uint64_t member = 0;
        for (double w : spec.sweep_values) {
            RunUnit u = base_unit(spec, spec.out_dir);
            u.mode = RunMode::Quantum;
            u.params.w = w;
            validate(u.params);
            u.label = "quantum_w" + fmt_g(w);
            u.seed = spec.seed + member++;
            units.push_back(u);
            post.fig4.push_back({w * spec.params.K / spec.params.hbar, w, u.label});
        }
        return;
    }
    RunUnit u = base_unit(spec, spec.out_dir);
    u.mode = spec.mode;
    u.resume_path = spec.resume_path;
    u.label = spec.label.empty() ? mode_name(spec.mode) : spec.label;
    units.push_back(u);
}

void post_process(const PostProcess& post) {
    for (const auto& [qlabel, clabel, out_name] : post.diffs) {
        const TimeSeries q =
            TimeSeries::read_csv((fs::path(post.dir) / (qlabel + ".csv")).string());
        const TimeSeries c =
            TimeSeries::read_csv((fs::path(post.dir) / (clabel + ".csv")).string());
        compare_series(q, c, (fs::path(post.dir) / out_name).string());
    }
    if (!post.fig4.empty()) {
        std::ofstream out(fs::path(post.dir) / "d_scaling.csv");
        out << "x,w,D,residual_stderr\n";
        std::vector<double> lx, ly;
        for (const Fig4Row& row : post.fig4) {
            const TimeSeries ts = TimeSeries::read_csv(
                (fs::path(post.dir) / (row.label + ".csv")).string());
            std::vector<std::int64_t> ns;
            std::vector<double> p2;
            for (const auto& r : ts.rows)
                if (r.P2_mean) {
                    ns.push_back(r.n);
                    p2.push_back(*r.P2_mean);
                }
            const DiffusionFit fit = fit_diffusion(ns, p2, post.fit_lo, post.fit_hi);
            out << format_g17(row.x) << ',' << format_g17(row.w) << ','
                << format_g17(fit.D) << ',' << format_g17(fit.residual_stderr)
                << '\n';
            if (fit.D > 0.0) {
                lx.push_back(std::log(row.x));
                ly.push_back(std::log(fit.D));
            }
        }
        json meta;
        meta["fit_window"] = json{{"n_lo", post.fit_lo}, {"n_hi", post.fit_hi}};
        if (lx.size() >= 2) {
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
            mx /= static_cast<double>(lx.size());
            my /= static_cast<double>(lx.size());
            double sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                sxx += (lx[i] - mx) * (lx[i] - mx);
                sxy += (lx[i] - mx) * (ly[i] - my);
            }
            meta["loglog_slope"] = sxy / sxx;
        }
        std::ofstream mout(fs::path(post.dir) / "d_scaling.meta.json");
        mout << meta.dump(2) << '\n';
    }
}

}  // namespace

RunMode parse_mode(const std::string& name) {
    if (name == "quantum") return RunMode::Quantum;
    if (name == "classical") return RunMode::Classical;
    if (name == "single-rotor-quantum") return RunMode::SingleRotorQuantum;
    if (name == "single-rotor-classical") return RunMode::SingleRotorClassical;
    if (name == "compare") return RunMode::Compare;
    if (name == "sweep") return RunMode::Sweep;
    throw ConfigError("unknown mode: " + name);
}

std::string mode_name(RunMode m) {
    switch (m) {
        case RunMode::Quantum: return "quantum";
        case RunMode::Classical: return "classical";
        case RunMode::SingleRotorQuantum: return "single-rotor-quantum";
        case RunMode::SingleRotorClassical: return "single-rotor-classical";
        case RunMode::Compare: return "compare";
        case RunMode::Sweep: return "sweep";
    }
    return "?";
}

ExperimentSpec spec_from_kv(const std::map<std::string, std::string>& kv) {
    ExperimentSpec spec;
    double m = 0.5, k = 2.5, T = 1.0, hbar = 0.07, w = 0.5;
    std::int64_t N_R = 16384, N_r = 256, n_kicks = 500;
    for (const auto& [key, val] : kv) {
        if (key == "m") m = to_double(key, val);
        else if (key == "k") k = to_double(key, val);
        else if (key == "T") T = to_double(key, val);
        else if (key == "hbar") hbar = to_double(key, val);
        else if (key == "w") w = to_double(key, val);
        else if (key == "N_R") N_R = to_int(key, val);
        else if (key == "N_r") N_r = to_int(key, val);
        else if (key == "n_kicks") n_kicks = to_int(key, val);
        else if (key == "seed") spec.seed = static_cast<std::uint64_t>(to_int(key, val));
        else if (key == "output_dir") spec.out_dir = val;
        else if (key == "mode") spec.mode = parse_mode(val);
        else if (key == "record_every") spec.record_every = to_int(key, val);
        else if (key == "workers") spec.workers = static_cast<int>(to_int(key, val));
        else if (key == "particles") spec.particles = static_cast<std::size_t>(to_int(key, val));
        else if (key == "guard_enabled") spec.guard.enabled = to_bool(key, val);
        else if (key == "guard_window_frac") spec.guard.window_frac = to_double(key, val);
        else if (key == "guard_tail_tol") spec.guard.tail_tol = to_double(key, val);
        else if (key == "compute_sl") spec.compute_sl = to_bool(key, val);
        else if (key == "compute_svn") spec.compute_svn = to_bool(key, val);
        else if (key == "compute_scl") spec.compute_scl = to_bool(key, val);
        else if (key == "scl_R_bins") spec.scl_R_bins = static_cast<int>(to_int(key, val));
        else if (key == "scl_P_width") spec.scl_P_width = to_double(key, val);
        else if (key == "kick_literal") spec.kick_literal = to_bool(key, val);
        else if (key == "emit_distribution") spec.emit_distribution = to_bool(key, val);
        else if (key == "emit_ensemble") spec.emit_ensemble = to_bool(key, val);
        else if (key == "fit_lo") spec.fit_lo = to_int(key, val);
        else if (key == "fit_hi") spec.fit_hi = to_int(key, val);
        else if (key == "sweep_param") spec.sweep_param = val;
        else if (key == "sweep_values") spec.sweep_values = to_list(key, val);
        else if (key == "label") spec.label = val;
        else if (key == "compare_quantum") spec.compare_quantum = val;
        else if (key == "compare_classical") spec.compare_classical = val;
        else throw ConfigError("unknown config key: " + key);
    }
    spec.params = derive_params(m, k, T, hbar, w, N_R, N_r, n_kicks);
    if (spec.record_every < 1) throw ConfigError("record_every must be >= 1");
    if (spec.particles < 1) throw ConfigError("particles must be >= 1");
    return spec;
}

void apply_preset(ExperimentSpec& spec, const std::string& name,
                  const std::string& scale) {
    if (name != "fig1" && name != "fig2" && name != "fig3" && name != "fig4" &&
        name != "fig5")
        throw ConfigError("unknown preset: " + name);
    if (scale != "paper" && scale != "desk")
        throw ConfigError("scale must be 'paper' or 'desk', got '" + scale + "'");
    spec.preset = name;
    spec.scale = scale;
}

CompareSummary compare_series(const TimeSeries& quantum,
                              const TimeSeries& classical,
                              const std::string& out_csv) {
    if (quantum.rows.size() != classical.rows.size())
        throw ConfigError("compare: series have different lengths (" +
                          std::to_string(quantum.rows.size()) + " vs " +
                          std::to_string(classical.rows.size()) + ")");
    if (quantum.rows.empty()) throw ConfigError("compare: empty series");
    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + out_csv);
    out << "n,delta2_qm,delta2_cl,diff\n";
    CompareSummary sum;
    double acc = 0.0;
    for (std::size_t i = 0; i < quantum.rows.size(); ++i) {
        const auto& q = quantum.rows[i];
        const auto& c = classical.rows[i];
        if (q.n != c.n)
            throw ConfigError("compare: misaligned time grids at row " +
                              std::to_string(i) + " (n=" + std::to_string(q.n) +
                              " vs n=" + std::to_string(c.n) + ")");
        if (!q.delta2 || !c.delta2)
            throw ConfigError("compare: delta2 column missing at n=" +
                              std::to_string(q.n));
        const double d = *c.delta2 - *q.delta2;
        out << q.n << ',' << format_g17(*q.delta2) << ',' << format_g17(*c.delta2)
            << ',' << format_g17(d) << '\n';
        sum.max_abs_diff = std::max(sum.max_abs_diff, std::abs(d));
        acc += std::abs(d);
        if (i + 1 == quantum.rows.size() && *c.delta2 != 0.0)
            sum.rel_gap_final = std::abs(d) / *c.delta2;
    }
    sum.rows = quantum.rows.size();
    sum.mean_abs_diff = acc / static_cast<double>(sum.rows);
    json meta{{"rows", sum.rows},
              {"max_abs_diff", sum.max_abs_diff},
              {"mean_abs_diff", sum.mean_abs_diff},
              {"rel_gap_final", sum.rel_gap_final}};
    std::ofstream mout(out_csv + ".meta.json");
    mout << meta.dump(2) << '\n';
    return sum;
}

void run(const ExperimentSpec& spec) {
    if (spec.mode == RunMode::Compare && spec.preset.empty()) {
        if (!spec.compare_quantum || !spec.compare_classical)
            throw ConfigError("compare mode needs compare_quantum and "
                              "compare_classical paths");
        fs::create_directories(spec.out_dir);
        const TimeSeries q = TimeSeries::read_csv(*spec.compare_quantum);
        const TimeSeries c = TimeSeries::read_csv(*spec.compare_classical);
        compare_series(q, c, (fs::path(spec.out_dir) / "compare.csv").string());
        return;
    }

    std::vector<RunUnit> units;
    PostProcess post;
    expand(spec, units, post);
    if (units.empty()) throw ConfigError("experiment expands to no runs");

    int workers = spec.workers;
    if (const char* env = std::getenv("KICKED_DUO_WORKERS")) {
        const int env_workers = std::atoi(env);
        if (env_workers > 0) workers = env_workers;
    }
    if (workers <= 0)
        workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
    workers = std::min<int>(workers, static_cast<int>(units.size()));

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= units.size()) return;
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error) return;  // stop picking up new work
            }
            try {
                run_unit(units[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    post_process(post);
}

volatile std::sig_atomic_t* interrupt_flag() { return &g_interrupt; }

}  // namespace kduo
