// Command-line driver: simulations, analyses and module records.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "invasionlab/diagnostics.hpp"
#include "invasionlab/eikonal.hpp"
#include "invasionlab/error.hpp"
#include "invasionlab/front.hpp"
#include "invasionlab/io.hpp"
#include "invasionlab/pipeline.hpp"
#include "invasionlab/spectral.hpp"
#include "invasionlab/stepper.hpp"
#include "invasionlab/wavetrain.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace invasionlab;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kMaxHeatmapColumns = 1200;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Globals {
    std::string config;
    std::string out;
    int threads = 0;
    std::optional<std::uint64_t> seed;
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

fs::path out_dir(const Globals& g, const std::string& fallback) {
    fs::path dir = g.out.empty() ? output_root() / fallback : fs::path(g.out);
    fs::create_directories(dir);
    return dir;
}

json load_document(const Globals& g) {
    if (g.config.empty()) return json::object();
    if (!fs::exists(g.config)) throw Error(ErrorKind::config, "config: cannot open " + g.config);
    return read_json(g.config);
}

// Params section of a module config; defaults when absent.
Params params_of(const json& doc) {
    Params p{0.1, 2.0, 0.01};
    if (!doc.contains("params")) return p;
    const json& s = doc.at("params");
    if (!s.is_object()) throw Error(ErrorKind::config, "params: expected an object");
    for (const auto& [k, v] : s.items()) {
        if (k != "a" && k != "gamma" && k != "eps") throw Error(ErrorKind::config, "params." + k + ": unknown key");
        if (!v.is_number()) throw Error(ErrorKind::config, "params." + k + ": expected a number");
    }
    p.a = s.value("a", p.a);
    p.gamma = s.value("gamma", p.gamma);
    p.eps = s.value("eps", p.eps);
    try {
        p.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::config, std::string("params: ") + e.what());
    }
    return p;
}

// Section of a module config restricted to the given keys.
json section(const json& doc, const std::string& name, const std::set<std::string>& keys) {
    if (!doc.contains(name)) return json::object();
    const json& s = doc.at(name);
    if (!s.is_object()) throw Error(ErrorKind::config, name + ": expected an object");
    for (const auto& [k, v] : s.items()) {
        if (!keys.count(k)) throw Error(ErrorKind::config, name + "." + k + ": unknown key");
        (void)v;
    }
    return s;
}

template <class T>
T get_or(const json& s, const std::string& path, const std::string& key, T fallback) {
    if (!s.contains(key)) return fallback;
    try {
        return s.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::config, path + "." + key + ": wrong type");
    }
}

void check_top_level(const json& doc, const std::set<std::string>& keys) {
    if (!doc.is_object()) throw Error(ErrorKind::config, "<root>: expected an object");
    for (const auto& [k, v] : doc.items()) {
        (void)v;
        if (!keys.count(k)) throw Error(ErrorKind::config, k + ": unknown key");
    }
}

json params_json(const Params& p) { return {{"a", p.a}, {"gamma", p.gamma}, {"eps", p.eps}}; }

// ---------------------------------------------------------------------------
// Wave-train records

json wavetrain_json(const WaveTrain& wt) {
    return {{"m", wt.m},           {"L", wt.L},
            {"k_wt", wt.k_wt},     {"c", wt.c},
            {"residual", wt.residual}, {"newton_steps", wt.newton_steps},
            {"profile_u", wt.profile_u}, {"profile_w", wt.profile_w}};
}

WaveTrain wavetrain_from_json(const json& j) {
    WaveTrain wt;
    try {
        wt.m = j.at("m").get<int>();
        wt.L = j.at("L").get<double>();
        wt.k_wt = j.at("k_wt").get<double>();
        wt.c = j.at("c").get<double>();
        wt.residual = j.value("residual", 0.0);
        wt.newton_steps = j.value("newton_steps", 0);
        wt.profile_u = j.at("profile_u").get<std::vector<double>>();
        wt.profile_w = j.at("profile_w").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::missing_data, std::string("wave-train record: ") + e.what());
    }
    if (static_cast<int>(wt.profile_u.size()) != wt.m || static_cast<int>(wt.profile_w.size()) != wt.m)
        throw Error(ErrorKind::missing_data, "wave-train record: profile length differs from m");
    return wt;
}

// A front directory holds front.json (c_ps, eta_ps) and front_profile.bin.
FrontProfile load_front_dir(const fs::path& dir) {
    const json meta = read_json(dir / "front.json");
    const State s = read_snapshot(dir / "front_profile.bin");
    FrontProfile fp;
    fp.grid = s.grid;
    fp.u_ps = s.u;
    fp.w_ps = s.w;
    fp.c_ps = meta.at("c_ps").get<double>();
    fp.eta_ps = meta.value("eta_ps", 0.0);
    return fp;
}

std::vector<std::vector<double>> subsample_rows(const std::vector<State>& snaps, bool w_component = false) {
    std::vector<std::vector<double>> rows;
    if (snaps.empty()) return rows;
    const int n = snaps.front().grid.n;
    const int stride = std::max(1, (n + kMaxHeatmapColumns - 1) / kMaxHeatmapColumns);
    for (const State& s : snaps) {
        const auto& v = w_component ? s.w : s.u;
        std::vector<double> r;
        for (int i = 0; i < n; i += stride) r.push_back(v[i]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const Globals& g) {
    if (g.config.empty()) throw Error(ErrorKind::config, "config: --config is required");
    const json doc = load_document(g);
    RunConfig cfg = parse_run_config(doc);
    if (g.seed && cfg.init.kind == InitKind::noise) cfg.init.seed = *g.seed;
    const fs::path base = fs::path(g.config).parent_path();
    const fs::path dir = out_dir(g, fs::path(g.config).stem().string());
    const State init = initial_state(cfg, base);

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<State> snaps;
    std::vector<fs::path> files;
    run(init, cfg.params, cfg.scheme, cfg.events, [&](const State& s) { snaps.push_back(s); }, false);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(dir / "snapshots");
    std::vector<double> times, fronts;
    const double level = default_front_level(cfg.params);
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%05zu.bin", k);
        const fs::path rel = fs::path("snapshots") / name;
        write_snapshot(dir / rel, snaps[k]);
        files.push_back(rel);
        times.push_back(snaps[k].t);
        double pf = kNaN;
        try {
            pf = front_position(snaps[k], level);
        } catch (const Error&) {
        }
        fronts.push_back(pf);
    }
    write_csv(dir / "front.csv", {"t", "front"}, {times, fronts});
    files.emplace_back("front.csv");
    write_pgm16(dir / "u.pgm", subsample_rows(snaps));
    files.emplace_back("u.pgm");
    files.emplace_back("u.pgm.json");
    write_json(dir / "config.json", cfg.echo);
    files.emplace_back("config.json");

    json events = json::array();
    for (const auto& e : cfg.events)
        events.push_back({{"t_fire", e.t_fire}, {"center", e.center}, {"width", e.width},
                          {"amplitude", e.amplitude}, {"component", e.component == Component::u ? "u" : "w"}});
    json manifest = {
        {"tool", "invasionlab"},
        {"version", kVersion},
        {"config", cfg.echo},
        {"params", params_json(cfg.params)},
        {"grid", {{"x_min", cfg.grid.x_min}, {"x_max", cfg.grid.x_max}, {"n", cfg.grid.n}}},
        {"scheme",
         {{"dt", cfg.scheme.dt},
          {"frame_speed", cfg.scheme.frame_speed},
          {"bc", cfg.scheme.bc == BoundaryCondition::neumann ? "neumann" : "periodic"},
          {"record_every", cfg.scheme.record_every},
          {"t_end", cfg.scheme.t_end}}},
        {"events", events},
        {"snapshot_count", snaps.size()},
        {"wall_clock_s", wall}};
    write_manifest(dir, manifest, files);
    std::cout << dir.string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

Trajectory load_run(const fs::path& dir, json* manifest_out = nullptr) {
    const json m = read_manifest(dir);
    Trajectory tr;
    for (const auto& f : m.at("files")) {
        const std::string p = f.at("path").get<std::string>();
        if (p.rfind("snapshots/", 0) == 0) tr.snapshots.push_back(read_snapshot(dir / p));
    }
    if (tr.snapshots.empty()) throw Error(ErrorKind::missing_data, "run has no snapshots: " + dir.string());
    if (manifest_out) *manifest_out = m;
    return tr;
}

struct Recorder {
    json failures = json::array();
    template <class F>
    bool attempt(const std::string& what, F&& f) {
        try {
            f();
            return true;
        } catch (const Error& e) {
            failures.push_back({{"analysis", what}, {"kind", to_string(e.kind())}, {"message", e.what()}});
            return false;
        }
    }
};

int cmd_analyze(const Globals& g, const std::string& run_dir) {
    json spec = load_document(g);
    check_top_level(spec, {"params", "front", "wake", "spectrum", "lightcone", "defect"});
    const fs::path rdir(run_dir);
    json manifest;
    const Trajectory tr = load_run(rdir, &manifest);
    const fs::path dir = g.out.empty() ? rdir / "analysis" : fs::path(g.out);
    fs::create_directories(dir);

    Params params = params_of(json{{"params", manifest.at("params")}});
    const double frame = manifest.at("scheme").at("frame_speed").get<double>();
    const double level = default_front_level(params);
    json summary = {{"run", rdir.string()},
                    {"c_ps", nullptr},
                    {"eta_ps", nullptr},
                    {"k_selected", nullptr},
                    {"defect_speed", nullptr},
                    {"decay_exponents", nullptr}};
    json checks = json::array();
    Recorder rec;

    // Front speed from the trailing 60% of the front positions.
    const json fs_spec = section(spec, "front", {"trailing_fraction", "extract"});
    std::vector<double> times, fronts;
    for (const State& s : tr.snapshots) {
        double pf = kNaN;
        try {
            pf = front_position(s, level);
        } catch (const Error&) {
        }
        times.push_back(s.t);
        fronts.push_back(pf);
    }
    write_csv(dir / "front.csv", {"t", "front"}, {times, fronts});
    rec.attempt("front_speed", [&] {
        const double frac = get_or(fs_spec, "front", "trailing_fraction", 0.6);
        std::vector<double> tt, pp;
        const double t_lo = times.front() + (1.0 - frac) * (times.back() - times.front());
        for (std::size_t k = 0; k < times.size(); ++k)
            if (times[k] >= t_lo && std::isfinite(fronts[k])) {
                tt.push_back(times[k]);
                pp.push_back(fronts[k]);
            }
        if (tt.size() < 3) throw Error(ErrorKind::insufficient_data, "fewer than three front positions");
        const SpeedFit sf = measure_speed(tt, pp);
        summary["c_ps"] = frame + sf.c;
        summary["c_ps_stderr"] = sf.stderr_c;
    });
    std::optional<FrontProfile> fp;
    if (get_or(fs_spec, "front", "extract", true)) {
        rec.attempt("front_profile", [&] {
            ExtractOptions eo;
            eo.frame_speed = frame;
            fp = extract_front(tr, params, eo);
            summary["c_ps"] = fp->c_ps;
            summary["alignment_residual"] = fp->alignment_residual;
        });
        if (fp) rec.attempt("tail_fit", [&] {
                const TailFit tf = fit_tail_decay(*fp);
                summary["eta_ps"] = tf.eta;
                summary["tail_r2"] = tf.r2;
            });
    }

    // Selected wavenumber in the wake of the last snapshot.
    const json wk = section(spec, "wake", {"gap", "length"});
    rec.attempt("wake_wavenumber", [&] {
        const State& last = tr.snapshots.back();
        const double pf = front_position(last, level);
        const double gap = get_or(wk, "wake", "gap", 30.0), len = get_or(wk, "wake", "length", 250.0);
        const double lo = std::max(last.grid.x_min + 10.0, pf - gap - len);
        const WavenumberMeasurement m = measure_wavenumber(last, lo, pf - gap);
        summary["k_selected"] = m.k;
        summary["wavelength"] = m.L;
        summary["wake_spacing_cv"] = m.spacing_cv;
        summary["wake_coherent"] = m.coherent;
    });

    // Spectrum of the wave train selected in the wake; needs a converged front.
    if (spec.contains("spectrum")) {
        const json sp = section(spec, "spectrum", {"n_k", "m"});
        rec.attempt("spectrum", [&] {
            if (!fp) throw Error(ErrorKind::front_not_converged, "no converged front profile in this run");
            const State& last = tr.snapshots.back();
            const double pf = front_position(last, level);
            const int m = get_or(sp, "spectrum", "m", 128);
            const WaveTrain guess = wavetrain_from_state(last, last.grid.x_min + 10.0, pf - 30.0, fp->c_ps, m);
            const WaveTrain wt = solve_wavetrain(params, fp->c_ps, guess);
            const BlochSpectrum bs = bloch_sweep(params, wt, get_or(sp, "spectrum", "n_k", 32), g.threads);
            summary["spectrum"] = {{"c_g", bs.c_g}, {"D_eff", bs.D_eff}, {"theta", bs.theta_fit},
                                   {"violations", bs.violations}};
            checks.push_back({{"name", "group velocity negative"}, {"pass", bs.c_g < 0.0}});
        });
    }

    // Light cones against a stored front profile.
    if (spec.contains("lightcone")) {
        const json lc = section(spec, "lightcone", {"front_dir", "c_g", "delta_c", "eta0", "psi_inf", "t0"});
        const bool ok = rec.attempt("lightcone", [&] {
            if (!lc.contains("front_dir") || !lc.contains("c_g"))
                throw Error(ErrorKind::config, "lightcone: front_dir and c_g are required");
            fs::path fdir = lc.at("front_dir").get<std::string>();
            if (fdir.is_relative() && !g.config.empty()) fdir = fs::path(g.config).parent_path() / fdir;
            const FrontProfile ref = load_front_dir(fdir);
            const double c_g = lc.at("c_g").get<double>();
            const double delta = get_or(lc, "lightcone", "delta_c", std::abs(c_g) / 4.0);
            const double eta0 = get_or(lc, "lightcone", "eta0", 0.4);
            const double t0 = get_or(lc, "lightcone", "t0", tr.snapshots.front().t);
            const double psi_inf = lc.contains("psi_inf") ? lc.at("psi_inf").get<double>()
                                                          : best_shift(tr.snapshots.back(), ref, eta0);
            const LightconeSeries s = lightcone_norms(tr, ref, psi_inf, c_g, delta, eta0, t0);
            write_csv(dir / "lightcone.csv", {"t", "right", "left"}, {s.times, s.right, s.left});
            summary["psi_inf"] = psi_inf;
            json decay = json::object();
            rec.attempt("right_cone_fit", [&] {
                const DecayFit f = decay_fit(s.times, s.right, DecayKind::exponential);
                decay["right_rate"] = f.exponent_or_rate;
                decay["right_r2"] = f.r2;
            });
            rec.attempt("left_cone_fit", [&] {
                const DecayFit f = decay_fit(s.times, s.left, DecayKind::algebraic);
                decay["left_exponent"] = f.exponent_or_rate;
                decay["left_r2"] = f.r2;
            });
            summary["decay_exponents"] = decay;
        });
        (void)ok;
    }

    // Defect transport against an unperturbed reference run.
    if (spec.contains("defect")) {
        const json df = section(spec, "defect", {"reference", "xi_lo", "front_gap", "stride"});
        rec.attempt("defect", [&] {
            if (!df.contains("reference")) throw Error(ErrorKind::config, "defect.reference: missing");
            fs::path refdir = df.at("reference").get<std::string>();
            if (refdir.is_relative() && !g.config.empty()) refdir = fs::path(g.config).parent_path() / refdir;
            const Trajectory ref = load_run(refdir);
            if (ref.snapshots.size() != tr.snapshots.size())
                throw Error(ErrorKind::grid_mismatch, "reference run has a different snapshot count");
            const State& last = ref.snapshots.back();
            const double pf = front_position(ref.snapshots.front(), level);
            const double lo = get_or(df, "defect", "xi_lo", last.grid.x_min + 20.0);
            const double hi = pf - get_or(df, "defect", "front_gap", 30.0);
            const WaveTrain wt = wavetrain_from_state(last, lo, hi, frame);
            PhaseOptions po;
            po.stride = get_or(df, "defect", "stride", 2.0);
            PhaseTrack diff;
            for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
                const PhaseSamples a = extract_phase(tr.snapshots[k], wt, lo, hi, po);
                const PhaseSamples b = extract_phase(ref.snapshots[k], wt, lo, hi, po);
                PhaseSamples d = a;
                for (std::size_t i = 0; i < d.psi.size(); ++i) d.psi[i] = a.psi[i] - b.psi[i];
                diff.times.push_back(tr.snapshots[k].t);
                diff.samples.push_back(std::move(d));
            }
            const DefectSpeed ds = defect_speed(diff, 1e-2, 0.6, wt.L);
            write_csv(dir / "defect.csv", {"t", "position"}, {ds.times, ds.positions});
            summary["defect_speed"] = ds.speed;
            summary["defect_truncated"] = ds.truncated;
        });
    }

    if (!summary["c_ps"].is_null())
        rec.attempt("spreading_speed", [&] {
            const SpreadingSpeed ss = linear_spreading_speed(params);
            summary["c_lin"] = ss.c_lin;
            summary["eta_lin"] = ss.eta_lin;
            checks.push_back({{"name", "pushed ordering c_ps > c_lin"},
                              {"pass", summary["c_ps"].get<double>() > ss.c_lin}});
            if (!summary["eta_ps"].is_null())
                checks.push_back({{"name", "tail ordering eta_lin < eta_ps"},
                                  {"pass", ss.eta_lin < summary["eta_ps"].get<double>()}});
        });

    write_pgm16(dir / "u.pgm", subsample_rows(tr.snapshots));
    summary["checks"] = checks;
    summary["failures"] = rec.failures;
    write_json(dir / "summary.json", summary);
    std::cout << (dir / "summary.json").string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// Module drivers

int cmd_dispersion(const Globals& g) {
    const json doc = load_document(g);
    check_top_level(doc, {"params", "dispersion"});
    const Params p = params_of(doc);
    const json s = section(doc, "dispersion", {"c_lo", "c_hi"});
    const SpreadingSpeed ss =
        linear_spreading_speed(p, get_or(s, "dispersion", "c_lo", 0.02), get_or(s, "dispersion", "c_hi", 5.0));
    const fs::path dir = out_dir(g, "dispersion");
    const json out = {{"params", params_json(p)},
                      {"c_lin", ss.c_lin},
                      {"eta_lin", ss.eta_lin},
                      {"lambda", {ss.root.lambda.real(), ss.root.lambda.imag()}},
                      {"nu", {ss.root.nu.real(), ss.root.nu.imag()}},
                      {"pinched", ss.root.pinched},
                      {"residual_d", ss.root.residual_d},
                      {"residual_dnu", ss.root.residual_dnu}};
    write_json(dir / "dispersion.json", out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

json quadrature_json(const Params& p, double L) {
    json q = json::object();
    for (auto [name, conv] : {std::pair{"printed", RootConvention::printed},
                              std::pair{"cubic_critical_points", RootConvention::cubic_critical_points}}) {
        try {
            const WavelengthQuadrature wq = wavelength_quadrature(p, conv);
            const double diff = std::abs(p.eps * L - (wq.L_minus + wq.L_plus));
            q[name] = {{"L_minus", wq.L_minus},
                       {"L_plus", wq.L_plus},
                       {"eps_L", p.eps * L},
                       {"difference", diff},
                       {"bound", 3.0 * std::cbrt(p.eps)},
                       {"within_bound", diff <= 3.0 * std::cbrt(p.eps)}};
        } catch (const Error& e) {
            q[name] = {{"failure", e.what()}};
        }
    }
    return q;
}

int cmd_wavetrain(const Globals& g) {
    const json doc = load_document(g);
    check_top_level(doc, {"params", "wavetrain"});
    const Params p = params_of(doc);
    const json s = section(doc, "wavetrain", {"c", "m"});
    if (!s.contains("c")) throw Error(ErrorKind::config, "wavetrain.c: missing required number");
    const double c = get_or(s, "wavetrain", "c", 0.0);
    const int m = get_or(s, "wavetrain", "m", 256);
    const HomogeneousOrbit orb = homogeneous_oscillation(p);
    const WaveTrain wt = solve_wavetrain(p, c, wavetrain_from_orbit(orb, c, m));
    json out = wavetrain_json(wt);
    out["params"] = params_json(p);
    out["orbit_period"] = orb.T;
    out["quadrature"] = quadrature_json(p, wt.L);
    const fs::path dir = out_dir(g, "wavetrain");
    write_json(dir / "wavetrain.json", out);
    std::vector<double> xi, u, w;
    for (int j = 0; j < wt.m; ++j) xi.push_back(j * wt.h());
    write_csv(dir / "wavetrain.csv", {"xi", "u", "w"}, {xi, wt.profile_u, wt.profile_w});
    std::cout << (dir / "wavetrain.json").string() << '\n';
    return 0;
}

int cmd_front(const Globals& g) {
    const json doc = load_document(g);
    check_top_level(doc, {"params", "front"});
    const Params p = params_of(doc);
    const json s = section(doc, "front", {"t_end_a", "t_end_b"});
    StageAOptions ao;
    ao.t_end = get_or(s, "front", "t_end_a", ao.t_end);
    StageBOptions bo;
    bo.t_end = get_or(s, "front", "t_end_b", bo.t_end);
    const StageAResult a = run_stage_a(p, ao);
    const StageBResult b = run_stage_b(p, a, bo);
    json out = {{"params", params_json(p)},
                {"c_ps", b.fp.c_ps},
                {"eta_ps", b.fp.eta_ps},
                {"lab_speed", a.speed.c},
                {"lab_speed_stderr", a.speed.stderr_c},
                {"frame_speed", b.frame_speed},
                {"drift", b.drift},
                {"alignment_residual", b.fp.alignment_residual}};
    try {
        const SpreadingSpeed ss = linear_spreading_speed(p);
        out["c_lin"] = ss.c_lin;
        out["eta_lin"] = ss.eta_lin;
    } catch (const Error& e) {
        out["c_lin_failure"] = e.what();
    }
    const fs::path dir = out_dir(g, "front");
    State prof = State::zeros(b.fp.grid);
    prof.u = b.fp.u_ps;
    prof.w = b.fp.w_ps;
    write_snapshot(dir / "front_profile.bin", prof);
    write_csv(dir / "front_profile.csv", {"xi", "u", "w"}, {b.fp.grid.points(), b.fp.u_ps, b.fp.w_ps});
    write_csv(dir / "stage_a_front.csv", {"t", "front"}, {a.times, a.positions});
    write_json(dir / "front.json", out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_spectrum(const Globals& g) {
    const json doc = load_document(g);
    check_top_level(doc, {"params", "spectrum"});
    const Params p = params_of(doc);
    const json s = section(doc, "spectrum", {"wavetrain", "n_k", "front_dir", "point"});
    if (!s.contains("wavetrain")) throw Error(ErrorKind::config, "spectrum.wavetrain: missing record path");
    fs::path wpath = s.at("wavetrain").get<std::string>();
    const fs::path base = fs::path(g.config).parent_path();
    if (wpath.is_relative()) wpath = base / wpath;
    const WaveTrain wt = wavetrain_from_json(read_json(wpath));
    const int n_k = get_or(s, "spectrum", "n_k", 64);
    const fs::path dir = out_dir(g, "spectrum");

    const BlochSpectrum bs = bloch_sweep(p, wt, n_k, g.threads);
    std::vector<double> k, re0, im0, re1, im1;
    for (std::size_t j = 0; j < bs.k_grid.size(); ++j) {
        if (bs.eigenvalues[j].size() < 2) continue;
        k.push_back(bs.k_grid[j]);
        re0.push_back(bs.eigenvalues[j][0].real());
        im0.push_back(bs.eigenvalues[j][0].imag());
        re1.push_back(bs.eigenvalues[j][1].real());
        im1.push_back(bs.eigenvalues[j][1].imag());
    }
    write_csv(dir / "bloch.csv", {"k", "re_lambda0", "im_lambda0", "re_lambda1", "im_lambda1"},
              {k, re0, im0, re1, im1});
    json out = {{"params", params_json(p)},
                {"c_g", bs.c_g},
                {"D_eff", bs.D_eff},
                {"theta", bs.theta_fit},
                {"zero_eigenvalue_abs", bs.zero_eigenvalue_abs},
                {"simplicity_gap", bs.simplicity_gap},
                {"max_real_nonzero_k", bs.max_real_nonzero_k},
                {"violations", bs.violations},
                {"failed_k", bs.failed_k}};
    try {
        const GroupVelocity gv = group_velocity_adjoint(p, wt);
        out["c_g_adjoint"] = gv.c_g;
        out["adjoint_normalization"] = gv.normalization_check;
    } catch (const Error& e) {
        out["c_g_adjoint_failure"] = e.what();
    }
    if (s.contains("front_dir")) {
        fs::path fdir = s.at("front_dir").get<std::string>();
        if (fdir.is_relative()) fdir = base / fdir;
        try {
            const FrontProfile fp = load_front_dir(fdir);
            PointSpectrumOptions po;
            const PointSpectrumReport r = front_point_spectrum(p, fp, po);
            json ev = json::array();
            for (const cplx& l : r.eigenvalues) ev.push_back({l.real(), l.imag()});
            out["point_spectrum"] = {{"eigenvalue_nearest_zero",
                                      {r.eigenvalue_nearest_zero.real(), r.eigenvalue_nearest_zero.imag()}},
                                     {"gap", r.gap},
                                     {"eigenfunction_angle", r.eigenfunction_angle},
                                     {"ptr_normalization", r.ptr_normalization_check},
                                     {"c_ps_polished", r.profile.c_ps},
                                     {"eigenvalues", ev}};
        } catch (const Error& e) {
            out["point_spectrum_failure"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
        }
    }
    write_json(dir / "spectrum.json", out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_eikonal(const Globals& g) {
    const json doc = load_document(g);
    check_top_level(doc, {"eikonal"});
    const json s = section(doc, "eikonal", {"D_eff", "c_g", "beta", "x_min", "x_max", "n", "dt", "t_end",
                                             "record_every", "amplitude", "width"});
    EikonalConfig cfg;
    cfg.D_eff = get_or(s, "eikonal", "D_eff", 1.0);
    cfg.c_g = get_or(s, "eikonal", "c_g", -0.5);
    cfg.beta = get_or(s, "eikonal", "beta", 0.0);
    cfg.grid = Grid{get_or(s, "eikonal", "x_min", -300.0), get_or(s, "eikonal", "x_max", 100.0),
                    get_or(s, "eikonal", "n", 2001)};
    cfg.dt = get_or(s, "eikonal", "dt", 0.05);
    cfg.record_every = get_or(s, "eikonal", "record_every", 200);
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::config, std::string("eikonal: ") + e.what());
    }
    const double t_end = get_or(s, "eikonal", "t_end", 100.0);
    const double amp = get_or(s, "eikonal", "amplitude", 1.0);
    const double width = get_or(s, "eikonal", "width", 2.0);
    std::vector<double> psi0;
    for (double x : cfg.grid.points()) psi0.push_back(0.5 * amp * (1.0 + std::tanh(x / width)));
    const PhaseTrajectory tr = eikonal_run(psi0, cfg, t_end);
    const fs::path dir = out_dir(g, "eikonal");
    const std::vector<double> xs = cfg.grid.points();
    write_csv(dir / "eikonal_final.csv", {"xi", "psi"}, {xs, tr.psi.back()});
    write_pgm16(dir / "psi.pgm", tr.psi);
    json out = {{"D_eff", cfg.D_eff}, {"c_g", cfg.c_g}, {"beta", cfg.beta}, {"t_end", tr.times.back()}};
    try {
        const ErfFit f = fit_erf(xs, tr.psi.back(), tr.times.back(), cfg.c_g, true);
        out["erf_fit"] = {{"D0", f.D0}, {"amplitude", f.amplitude}, {"offset", f.offset},
                          {"shift", f.shift}, {"residual", f.residual}};
    } catch (const Error& e) {
        out["erf_fit_failure"] = e.what();
    }
    write_json(dir / "eikonal.json", out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_report(const Globals& g, const std::string& root) {
    const fs::path base = root.empty() ? output_root() : fs::path(root);
    if (!fs::is_directory(base)) throw Error(ErrorKind::missing_data, "no such directory " + base.string());
    static const std::set<std::string> records{"summary.json", "front.json", "dispersion.json",
                                               "spectrum.json", "wavetrain.json", "eikonal.json"};
    std::vector<fs::path> found;
    for (const auto& e : fs::recursive_directory_iterator(base))
        if (e.is_regular_file() && records.count(e.path().filename().string())) found.push_back(e.path());
    std::sort(found.begin(), found.end());
    json report = json::object();
    for (const fs::path& p : found) {
        json j = read_json(p);
        j.erase("profile_u");
        j.erase("profile_w");
        report[fs::relative(p, base).generic_string()] = j;
    }
    const fs::path dir = g.out.empty() ? base : fs::path(g.out);
    fs::create_directories(dir);
    write_json(dir / "report.json", report);
    std::cout << (dir / "report.json").string() << " (" << found.size() << " records)\n";
    return 0;
}

int exit_code(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument: return 2;
    case ErrorKind::integration_blowup: return 3;
    case ErrorKind::missing_data: return 4;
    default: return 5;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pushed fronts and wake selection in an oscillatory reaction-diffusion system"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Configuration file (JSON)");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--threads", g.threads, "Concurrent eigen-solves")->check(CLI::NonNegativeNumber);
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Noise seed override");
    app.set_version_flag("--version", kVersion);

    std::string run_dir, report_root;
    auto* sim = app.add_subcommand("simulate", "Run a configured simulation into a run directory");
    auto* ana = app.add_subcommand("analyze", "Analyse a completed run directory");
    ana->add_option("run", run_dir, "Run directory")->required();
    auto* wtc = app.add_subcommand("wavetrain", "Solve a wave train and compare with the wavelength quadrature");
    auto* frc = app.add_subcommand("front", "Acquire the pushed front by simulation");
    auto* dsp = app.add_subcommand("dispersion", "Linear spreading speed from the pinched double root");
    auto* spc = app.add_subcommand("spectrum", "Bloch sweep, group velocity and front point spectrum");
    auto* eik = app.add_subcommand("eikonal", "Integrate the phase equation and fit an erf profile");
    auto* rep = app.add_subcommand("report", "Collect records under a directory into report.json");
    rep->add_option("root", report_root, "Directory to scan");
    // Global options are accepted after the subcommand too.
    for (auto* sc : {sim, ana, wtc, frc, dsp, spc, eik, rep}) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (seed_opt->count()) g.seed = seed;

    try {
        if (sim->parsed()) return cmd_simulate(g);
        if (ana->parsed()) return cmd_analyze(g, run_dir);
        if (wtc->parsed()) return cmd_wavetrain(g);
        if (frc->parsed()) return cmd_front(g);
        if (dsp->parsed()) return cmd_dispersion(g);
        if (spc->parsed()) return cmd_spectrum(g);
        if (eik->parsed()) return cmd_eikonal(g);
        if (rep->parsed()) return cmd_report(g, report_root);
    } catch (const BlowupError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const json::exception& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    }
    return 0;
}
