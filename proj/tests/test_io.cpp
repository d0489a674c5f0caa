#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "invasionlab/error.hpp"
#include "invasionlab/front.hpp"
#include "invasionlab/io.hpp"

using namespace invasionlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("invasionlab_test_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

json base_config() {
    return json::parse(R"({
        "params": {"a": 0.1, "gamma": 2.0, "eps": 0.01},
        "grid": {"x_min": 0.0, "x_max": 100.0, "n": 501},
        "scheme": {"dt": 0.05, "frame_speed": 0.0, "bc": "neumann", "record_every": 100, "t_end": 20.0},
        "init": {"kind": "zero"}
    })");
}

std::string config_error_message(const json& doc) {
    try {
        parse_run_config(doc);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        return e.what();
    }
    FAIL("expected a config error");
    return {};
}

// Runs the CLI; skipped when the test is not launched through ctest.
struct Cli {
    std::string exe;
    Cli() {
        const char* e = std::getenv("INVASIONLAB_CLI");
        if (e) exe = e;
    }
    bool available() const { return !exe.empty() && fs::exists(exe); }
    int operator()(const std::string& args, const fs::path& log) const {
        const std::string cmd = "\"" + exe + "\" " + args + " > \"" + log.string() + "\" 2>&1";
        const int st = std::system(cmd.c_str());
        return WEXITSTATUS(st);
    }
};

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p);
    out << s;
}

}  // namespace

TEST_CASE("counter noise is deterministic and uniform on [-1, 1)") {
    double mn = 1.0, mx = -1.0, mean = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double v = counter_uniform(7, static_cast<std::uint64_t>(i));
        CHECK(v == counter_uniform(7, static_cast<std::uint64_t>(i)));
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        mean += v / n;
    }
    CHECK(mn >= -1.0);
    CHECK(mx < 1.0);
    CHECK(std::abs(mean) < 1e-2);
    CHECK(counter_uniform(7, 3) != counter_uniform(8, 3));
}

TEST_CASE("snapshot round trip is bit exact") {
    const fs::path dir = scratch("snap");
    State s = State::zeros(Grid{-3.25, 17.5, 97}, 12.375);
    for (int i = 0; i < s.grid.n; ++i) {
        s.u[i] = std::sin(0.37 * i) * 1e-300 + counter_uniform(1, i);
        s.w[i] = std::exp(-0.1 * i) / 3.0;
    }
    s.u[5] = std::numeric_limits<double>::denorm_min();
    s.w[7] = -0.0;
    write_snapshot(dir / "s.bin", s);
    const State r = read_snapshot(dir / "s.bin");
    CHECK(r.grid.n == s.grid.n);
    CHECK(r.grid.x_min == s.grid.x_min);
    CHECK(r.grid.x_max == s.grid.x_max);
    CHECK(r.t == s.t);
    CHECK(std::memcmp(r.u.data(), s.u.data(), s.u.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(r.w.data(), s.w.data(), s.w.size() * sizeof(double)) == 0);
}

TEST_CASE("CSV round trip keeps full precision") {
    const fs::path dir = scratch("csv");
    const std::vector<double> a{0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23};
    const std::vector<double> b{1.0, 2.0, 3.0, 4.0};
    write_csv(dir / "x.csv", {"a", "b"}, {a, b});
    const auto [h, cols] = read_csv(dir / "x.csv");
    REQUIRE(h.size() == 2);
    CHECK(h[0] == "a");
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(cols[0][i] == a[i]);
}

TEST_CASE("PGM maps global min and max to the 16-bit range") {
    const fs::path dir = scratch("pgm");
    const std::vector<std::vector<double>> rows{{-1.0, 0.0, 1.0}, {0.5, 0.25, -0.5}};
    const PgmInfo info = write_pgm16(dir / "h.pgm", rows);
    CHECK(info.vmin == -1.0);
    CHECK(info.vmax == 1.0);
    int w = 0, h = 0;
    const auto px = read_pgm16(dir / "h.pgm", w, h);
    CHECK(w == 3);
    CHECK(h == 2);
    CHECK(px[0] == 0);
    CHECK(px[2] == 65535);
    CHECK(px[1] == 32768);
    const json side = read_json(dir / "h.pgm.json");
    CHECK(side.at("min").get<double>() == -1.0);
}

TEST_CASE("manifest checksums detect corruption and missing files") {
    const fs::path dir = scratch("manifest");
    write_text(dir / "a.txt", "hello");
    write_text(dir / "b.txt", "world");
    write_manifest(dir, {{"tool", "x"}}, {"a.txt", "b.txt"});
    CHECK_NOTHROW(read_manifest(dir));
    write_text(dir / "b.txt", "w0rld");
    try {
        read_manifest(dir);
        FAIL("corruption not detected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::missing_data);
        CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }
    fs::remove(dir / "a.txt");
    CHECK_THROWS_AS(read_manifest(dir), Error);
}

TEST_CASE("CRC32 of a known string") {
    const fs::path dir = scratch("crc");
    write_text(dir / "q.txt", "123456789");
    CHECK(crc32_file(dir / "q.txt") == 0xCBF43926u);
}

TEST_CASE("config errors name the offending field") {
    json d = base_config();
    d["scheme"]["dt"] = -0.05;
    CHECK(config_error_message(d).find("scheme.dt") != std::string::npos);

    d = base_config();
    d["scheme"]["dtt"] = 0.05;
    CHECK(config_error_message(d).find("scheme.dtt: unknown key") != std::string::npos);

    d = base_config();
    d["extra"] = 1;
    CHECK(config_error_message(d).find("extra") != std::string::npos);

    d = base_config();
    d["grid"].erase("n");
    CHECK(config_error_message(d).find("grid.n") != std::string::npos);

    d = base_config();
    d["params"]["a"] = 0.5;
    CHECK(config_error_message(d).find("params") != std::string::npos);

    d = base_config();
    d["scheme"]["bc"] = "dirichlet";
    CHECK(config_error_message(d).find("scheme.bc") != std::string::npos);

    d = base_config();
    d["events"] = json::array({{{"t_fire", 1.0}, {"center", 5.0}, {"width", 0.0}, {"amplitude", 0.1}}});
    CHECK(config_error_message(d).find("events[0].width") != std::string::npos);

    d = base_config();
    d["init"] = {{"kind", "bump"}, {"center", 1.0}, {"width", 2.0}};
    CHECK(config_error_message(d).find("init.amplitude") != std::string::npos);
}

TEST_CASE("noise initial data depends only on seed and index") {
    json d = base_config();
    d["init"] = {{"kind", "noise"}, {"mean", 0.45}, {"amplitude", 0.45}, {"x_lo", 0.0}, {"x_hi", 50.0}, {"seed", 11}};
    const RunConfig c = parse_run_config(d);
    const State a = initial_state(c), b = initial_state(c);
    CHECK(a.u == b.u);
    for (int i = 0; i < c.grid.n; ++i) {
        if (c.grid.x(i) > 50.0) CHECK(a.u[i] == 0.0);
        else CHECK(a.u[i] == 0.45 + 0.45 * counter_uniform(11, static_cast<std::uint64_t>(i)));
    }
}

// ---------------------------------------------------------------------------
// Command line

TEST_CASE("cli: zero initial data gives all-zero snapshots") {
    const Cli cli;
    if (!cli.available()) return;
    const fs::path dir = scratch("cli_zero");
    write_json(dir / "c.json", base_config());
    REQUIRE(cli("simulate --config " + (dir / "c.json").string() + " --out " + (dir / "run").string(),
                dir / "log") == 0);
    const json m = read_manifest(dir / "run");
    int count = 0;
    for (const auto& f : m.at("files")) {
        const std::string p = f.at("path").get<std::string>();
        if (p.rfind("snapshots/", 0) != 0) continue;
        const State s = read_snapshot(dir / "run" / p);
        for (int i = 0; i < s.grid.n; ++i) {
            CHECK(s.u[i] == 0.0);
            CHECK(s.w[i] == 0.0);
        }
        ++count;
    }
    CHECK(count == 5);
}

TEST_CASE("cli: negative dt exits 2 naming scheme.dt") {
    const Cli cli;
    if (!cli.available()) return;
    const fs::path dir = scratch("cli_neg");
    json d = base_config();
    d["scheme"]["dt"] = -0.01;
    write_json(dir / "c.json", d);
    CHECK(cli("simulate --config " + (dir / "c.json").string() + " --out " + (dir / "run").string(),
              dir / "log") == 2);
    CHECK(slurp(dir / "log").find("scheme.dt") != std::string::npos);
}

TEST_CASE("cli: fixed seed reruns are byte identical") {
    const Cli cli;
    if (!cli.available()) return;
    const fs::path dir = scratch("cli_seed");
    json d = base_config();
    d["init"] = {{"kind", "noise"}, {"mean", 0.45}, {"amplitude", 0.45}, {"x_lo", 0.0}, {"x_hi", 30.0}, {"seed", 1}};
    write_json(dir / "c.json", d);
    const std::string cfg = " --config " + (dir / "c.json").string();
    REQUIRE(cli("simulate" + cfg + " --seed 42 --out " + (dir / "r1").string(), dir / "log1") == 0);
    REQUIRE(cli("simulate" + cfg + " --seed 42 --out " + (dir / "r2").string(), dir / "log2") == 0);
    REQUIRE(cli("simulate" + cfg + " --seed 43 --out " + (dir / "r3").string(), dir / "log3") == 0);
    const json m = read_manifest(dir / "r1");
    for (const auto& f : m.at("files")) {
        const std::string p = f.at("path").get<std::string>();
        if (p == "config.json") continue;
        CHECK_MESSAGE(slurp(dir / "r1" / p) == slurp(dir / "r2" / p), p);
    }
    CHECK(slurp(dir / "r1" / "snapshots" / "snap_00000.bin") != slurp(dir / "r3" / "snapshots" / "snap_00000.bin"));
}

TEST_CASE("cli: bump near the left boundary gives monotone front positions") {
    const Cli cli;
    if (!cli.available()) return;
    const fs::path dir = scratch("cli_bump");
    json d = base_config();
    d["grid"] = {{"x_min", 0.0}, {"x_max", 200.0}, {"n", 1001}};
    d["scheme"]["t_end"] = 150.0;
    d["init"] = {{"kind", "bump"}, {"center", 10.0}, {"width", 5.0}, {"amplitude", 0.5}};
    write_json(dir / "c.json", d);
    REQUIRE(cli("simulate --config " + (dir / "c.json").string() + " --out " + (dir / "run").string(),
                dir / "log") == 0);
    const auto [h, cols] = read_csv(dir / "run" / "front.csv");
    REQUIRE(h.size() == 2);
    REQUIRE(cols[1].size() >= 10);
    for (std::size_t k = 1; k < cols[1].size(); ++k) CHECK(cols[1][k] > cols[1][k - 1]);
}

TEST_CASE("cli: analyze on a missing run exits 4") {
    const Cli cli;
    if (!cli.available()) return;
    const fs::path dir = scratch("cli_missing");
    CHECK(cli("analyze " + (dir / "nothing").string(), dir / "log") == 4);

    // A run whose snapshot was deleted after the manifest was written.
    json d = base_config();
    write_json(dir / "c.json", d);
    REQUIRE(cli("simulate --config " + (dir / "c.json").string() + " --out " + (dir / "run").string(),
                dir / "log") == 0);
    fs::remove(dir / "run" / "snapshots" / "snap_00002.bin");
    CHECK(cli("analyze " + (dir / "run").string(), dir / "log") == 4);
}

TEST_CASE("cli: exact translate of a stored front gives a zero right-cone column") {
    const Cli cli;
    if (!cli.available()) return;
    const fs::path dir = scratch("cli_translate");
    // Synthetic front and a run made of its translate by an integer number of cells.
    const Grid g{-200.0, 100.0, 3001};
    const int shift = 7;
    auto front_u = [](double x) { return 0.45 * (1.0 - std::tanh(x)) + 0.05 * std::sin(0.1 * x) * (x < 0.0); };
    State prof = State::zeros(g);
    for (int i = 0; i < g.n; ++i) {
        prof.u[i] = front_u(g.x(i));
        prof.w[i] = 0.2 * prof.u[i];
    }
    fs::create_directories(dir / "front");
    write_snapshot(dir / "front" / "front_profile.bin", prof);
    write_json(dir / "front" / "front.json", {{"c_ps", 0.7}, {"eta_ps", 2.0}});

    fs::create_directories(dir / "run" / "snapshots");
    std::vector<fs::path> files;
    for (int k = 0; k < 12; ++k) {
        State s = State::zeros(g, 10.0 * k);
        for (int i = 0; i < g.n; ++i) {
            const int j = std::min(g.n - 1, i + shift);
            s.u[i] = i + shift < g.n ? prof.u[j] : 0.0;
            s.w[i] = i + shift < g.n ? prof.w[j] : 0.0;
        }
        char name[32];
        std::snprintf(name, sizeof name, "snap_%05d.bin", k);
        write_snapshot(dir / "run" / "snapshots" / name, s);
        files.push_back(fs::path("snapshots") / name);
    }
    write_manifest(dir / "run",
                   {{"params", {{"a", 0.1}, {"gamma", 2.0}, {"eps", 0.01}}},
                    {"scheme", {{"frame_speed", 0.7}}}},
                   files);
    write_json(dir / "spec.json", {{"front", {{"extract", false}}},
                                   {"lightcone",
                                    {{"front_dir", (dir / "front").string()},
                                     {"c_g", -0.5},
                                     {"psi_inf", shift * g.h()}}}});
    REQUIRE(cli("--config " + (dir / "spec.json").string() + " analyze " + (dir / "run").string() + " --out " +
                    (dir / "an").string(),
                dir / "log") == 0);
    const auto [h, cols] = read_csv(dir / "an" / "lightcone.csv");
    REQUIRE(h.at(1) == "right");
    REQUIRE(cols[1].size() == 12);
    for (double v : cols[1]) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("cli: spectrum request without a converged front is recorded, not fatal") {
    const Cli cli;
    if (!cli.available()) return;
    const fs::path dir = scratch("cli_spectrum");
    write_json(dir / "c.json", base_config());
    REQUIRE(cli("simulate --config " + (dir / "c.json").string() + " --out " + (dir / "run").string(),
                dir / "log") == 0);
    write_json(dir / "spec.json", {{"spectrum", {{"n_k", 8}}}});
    CHECK(cli("--config " + (dir / "spec.json").string() + " analyze " + (dir / "run").string(), dir / "log") == 0);
    const json s = read_json(dir / "run" / "analysis" / "summary.json");
    bool recorded = false;
    for (const auto& f : s.at("failures"))
        if (f.at("analysis") == "spectrum" && f.at("kind") == "front-not-converged") recorded = true;
    CHECK(recorded);
}

TEST_CASE("cli: dispersion record") {
    const Cli cli;
    if (!cli.available()) return;
    const fs::path dir = scratch("cli_dispersion");
    REQUIRE(cli("dispersion --out " + dir.string(), dir / "log") == 0);
    const json d = read_json(dir / "dispersion.json");
    CHECK(d.contains("c_lin"));
    CHECK(d.contains("eta_lin"));
    CHECK(d.at("pinched").get<bool>());
}
