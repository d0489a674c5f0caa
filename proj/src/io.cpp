#include "invasionlab/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <zlib.h>

#include "invasionlab/error.hpp"

namespace invasionlab {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t r = splitmix64(splitmix64(seed) ^ counter);
    return static_cast<double>(r >> 11) * 0x1.0p-52 - 1.0;
}

// ---------------------------------------------------------------------------
// Config

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::config, path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        if (!allowed.count(k)) config_error(path.empty() ? k : path + "." + k, "unknown key");
    }
}

double number(const json& obj, const std::string& path, const std::string& key,
              const double* fallback = nullptr) {
    const std::string full = path + "." + key;
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        config_error(full, "missing required number");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) config_error(full, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_error(full, "must be finite");
    return d;
}

double number_or(const json& obj, const std::string& path, const std::string& key, double fb) {
    return number(obj, path, key, &fb);
}

std::string text(const json& obj, const std::string& path, const std::string& key) {
    const std::string full = path + "." + key;
    if (!obj.contains(key)) config_error(full, "missing required string");
    if (!obj.at(key).is_string()) config_error(full, "expected a string");
    return obj.at(key).get<std::string>();
}

int integer(const json& obj, const std::string& path, const std::string& key, const int* fb = nullptr) {
    const std::string full = path + "." + key;
    if (!obj.contains(key)) {
        if (fb) return *fb;
        config_error(full, "missing required integer");
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) config_error(full, "expected an integer");
    const auto i = v.get<long long>();
    if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
        config_error(full, "out of range");
    return static_cast<int>(i);
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
    RunConfig cfg;
    cfg.echo = doc;
    check_keys(doc, "", {"params", "grid", "scheme", "init", "events"});
    for (const char* k : {"params", "grid", "scheme", "init"})
        if (!doc.contains(k)) config_error(k, "missing required section");

    const json& p = doc.at("params");
    check_keys(p, "params", {"a", "gamma", "eps"});
    cfg.params.a = number(p, "params", "a");
    cfg.params.gamma = number(p, "params", "gamma");
    cfg.params.eps = number(p, "params", "eps");
    try {
        cfg.params.validate();
    } catch (const Error& e) {
        config_error("params", e.what());
    }

    const json& g = doc.at("grid");
    check_keys(g, "grid", {"x_min", "x_max", "n"});
    cfg.grid.x_min = number(g, "grid", "x_min");
    cfg.grid.x_max = number(g, "grid", "x_max");
    cfg.grid.n = integer(g, "grid", "n");
    if (cfg.grid.n < 3) config_error("grid.n", "must be at least 3");
    if (!(cfg.grid.x_max > cfg.grid.x_min)) config_error("grid.x_max", "must exceed grid.x_min");

    const json& s = doc.at("scheme");
    check_keys(s, "scheme", {"dt", "frame_speed", "bc", "record_every", "t_end"});
    cfg.scheme.dt = number(s, "scheme", "dt");
    if (!(cfg.scheme.dt > 0.0)) config_error("scheme.dt", "must be positive");
    cfg.scheme.frame_speed = number_or(s, "scheme", "frame_speed", 0.0);
    cfg.scheme.t_end = number(s, "scheme", "t_end");
    if (cfg.scheme.t_end < 0.0) config_error("scheme.t_end", "must be nonnegative");
    const int rec = 50;
    cfg.scheme.record_every = integer(s, "scheme", "record_every", &rec);
    if (s.contains("bc")) {
        if (!s.at("bc").is_string()) config_error("scheme.bc", "expected a string");
        const std::string bc = s.at("bc").get<std::string>();
        if (bc == "neumann")
            cfg.scheme.bc = BoundaryCondition::neumann;
        else if (bc == "periodic")
            cfg.scheme.bc = BoundaryCondition::periodic;
        else
            config_error("scheme.bc", "expected \"neumann\" or \"periodic\"");
    }
    try {
        validate(cfg.scheme, cfg.params);
    } catch (const Error& e) {
        const std::string msg = e.what();
        config_error(msg.find("record_every") != std::string::npos ? "scheme.record_every" : "scheme.dt",
                     msg);
    }

    const json& in = doc.at("init");
    if (!in.is_object()) config_error("init", "expected an object");
    const std::string kind = text(in, "init", "kind");
    if (kind == "zero") {
        check_keys(in, "init", {"kind"});
        cfg.init.kind = InitKind::zero;
    } else if (kind == "bump") {
        check_keys(in, "init", {"kind", "center", "width", "amplitude"});
        cfg.init.kind = InitKind::bump;
        cfg.init.center = number(in, "init", "center");
        cfg.init.width = number(in, "init", "width");
        cfg.init.amplitude = number(in, "init", "amplitude");
        if (!(cfg.init.width > 0.0)) config_error("init.width", "must be positive");
    } else if (kind == "noise") {
        check_keys(in, "init", {"kind", "mean", "amplitude", "x_lo", "x_hi", "seed"});
        cfg.init.kind = InitKind::noise;
        cfg.init.mean = number_or(in, "init", "mean", 0.0);
        cfg.init.amplitude = number(in, "init", "amplitude");
        cfg.init.x_lo = number_or(in, "init", "x_lo", cfg.grid.x_min);
        cfg.init.x_hi = number_or(in, "init", "x_hi", cfg.grid.x_max);
        if (in.contains("seed")) {
            const json& sd = in.at("seed");
            if (!sd.is_number_integer() || (!sd.is_number_unsigned() && sd.get<long long>() < 0))
                config_error("init.seed", "expected an unsigned integer");
            cfg.init.seed = in.at("seed").get<std::uint64_t>();
        }
    } else if (kind == "file") {
        check_keys(in, "init", {"kind", "path"});
        cfg.init.kind = InitKind::file;
        cfg.init.path = text(in, "init", "path");
    } else {
        config_error("init.kind", "expected zero, bump, noise or file");
    }

    if (doc.contains("events")) {
        const json& ev = doc.at("events");
        if (!ev.is_array()) config_error("events", "expected an array");
        double last = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ev.size(); ++i) {
            const std::string path = "events[" + std::to_string(i) + "]";
            check_keys(ev[i], path, {"t_fire", "center", "width", "amplitude", "component"});
            PerturbationEvent e;
            e.t_fire = number(ev[i], path, "t_fire");
            e.center = number(ev[i], path, "center");
            e.width = number(ev[i], path, "width");
            e.amplitude = number(ev[i], path, "amplitude");
            if (!(e.width > 0.0)) config_error(path + ".width", "must be positive");
            if (e.t_fire < last) config_error(path + ".t_fire", "events must be sorted by t_fire");
            last = e.t_fire;
            if (ev[i].contains("component")) {
                const json& c = ev[i].at("component");
                if (c == "u")
                    e.component = Component::u;
                else if (c == "w")
                    e.component = Component::w;
                else
                    config_error(path + ".component", "expected \"u\" or \"w\"");
            }
            cfg.events.push_back(e);
        }
    }
    return cfg;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::missing_data, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::config, path.string() + ": " + e.what());
    }
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "config: cannot open " + path.string());
    return parse_run_config(read_json(path));
}

State initial_state(const RunConfig& cfg, const fs::path& base_dir) {
    const Grid& g = cfg.grid;
    State s = State::zeros(g);
    switch (cfg.init.kind) {
    case InitKind::zero:
        break;
    case InitKind::bump:
        for (int i = 0; i < g.n; ++i) {
            const double z = (g.x(i) - cfg.init.center) / cfg.init.width;
            s.u[i] = cfg.init.amplitude * std::exp(-z * z);
        }
        break;
    case InitKind::noise:
        for (int i = 0; i < g.n; ++i)
            if (g.x(i) >= cfg.init.x_lo && g.x(i) <= cfg.init.x_hi)
                s.u[i] = cfg.init.mean +
                         cfg.init.amplitude * counter_uniform(cfg.init.seed, static_cast<std::uint64_t>(i));
        break;
    case InitKind::file: {
        fs::path p = cfg.init.path;
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        s = read_snapshot(p);
        if (s.grid.n != g.n || s.grid.x_min != g.x_min || s.grid.x_max != g.x_max)
            throw Error(ErrorKind::config, "init.path: snapshot grid differs from grid");
        s.t = 0.0;
        break;
    }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

void put_le(std::ostream& out, const std::vector<double>& v) {
    std::vector<unsigned char> buf(v.size() * 8);
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v[i]);
        for (int b = 0; b < 8; ++b) buf[8 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::vector<double> get_le(std::istream& in, std::size_t n) {
    std::vector<unsigned char> buf(n * 8);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
        throw Error(ErrorKind::missing_data, "snapshot payload is truncated");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[8 * i + b]) << (8 * b);
        v[i] = std::bit_cast<double>(bits);
    }
    return v;
}

}  // namespace

void write_snapshot(const fs::path& path, const State& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::missing_data, "cannot write " + path.string());
    const json header = {{"grid", {{"x_min", s.grid.x_min}, {"x_max", s.grid.x_max}, {"n", s.grid.n}}},
                         {"t", s.t},
                         {"components", {"u", "w"}},
                         {"dtype", "float64-le"}};
    out << header.dump() << '\n';
    put_le(out, s.u);
    put_le(out, s.w);
}

State read_snapshot(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::missing_data, "cannot open snapshot " + path.string());
    std::string line;
    std::getline(in, line);
    json h;
    try {
        h = json::parse(line);
    } catch (const json::parse_error&) {
        throw Error(ErrorKind::missing_data, "bad snapshot header in " + path.string());
    }
    State s;
    s.grid.x_min = h.at("grid").at("x_min").get<double>();
    s.grid.x_max = h.at("grid").at("x_max").get<double>();
    s.grid.n = h.at("grid").at("n").get<int>();
    s.t = h.at("t").get<double>();
    s.u = get_le(in, s.grid.n);
    s.w = get_le(in, s.grid.n);
    return s;
}

// ---------------------------------------------------------------------------
// CSV, PGM, JSON

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size())
        throw Error(ErrorKind::invalid_argument, "CSV header and column count differ");
    std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns)
        if (c.size() != rows) throw Error(ErrorKind::invalid_argument, "CSV columns differ in length");
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::missing_data, "cannot write " + path.string());
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << format_double(columns[j][i]);
        out << '\n';
    }
}

std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::missing_data, "cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    std::vector<std::vector<double>> cols(header.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t j = 0;
        while (std::getline(ss, cell, ',') && j < cols.size()) cols[j++].push_back(std::strtod(cell.c_str(), nullptr));
    }
    return {header, cols};
}

PgmInfo write_pgm16(const fs::path& path, const std::vector<std::vector<double>>& rows) {
    PgmInfo info;
    info.height = static_cast<int>(rows.size());
    info.width = rows.empty() ? 0 : static_cast<int>(rows[0].size());
    info.vmin = std::numeric_limits<double>::infinity();
    info.vmax = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != info.width)
            throw Error(ErrorKind::invalid_argument, "heatmap rows differ in length");
        for (double v : r) {
            info.vmin = std::min(info.vmin, v);
            info.vmax = std::max(info.vmax, v);
        }
    }
    if (rows.empty() || info.width == 0) throw Error(ErrorKind::missing_data, "empty heatmap");
    const double span = info.vmax > info.vmin ? info.vmax - info.vmin : 1.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::missing_data, "cannot write " + path.string());
    out << "P5\n" << info.width << ' ' << info.height << "\n65535\n";
    std::vector<unsigned char> buf(2 * static_cast<std::size_t>(info.width));
    for (const auto& r : rows) {
        for (int j = 0; j < info.width; ++j) {
            const auto q = static_cast<std::uint16_t>(std::lround((r[j] - info.vmin) / span * 65535.0));
            buf[2 * j] = static_cast<unsigned char>(q >> 8);  // PGM samples are big endian
            buf[2 * j + 1] = static_cast<unsigned char>(q & 0xff);
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    out.close();
    write_json(fs::path(path.string() + ".json"),
               {{"min", info.vmin}, {"max", info.vmax}, {"width", info.width}, {"height", info.height},
                {"rows", "time"}, {"columns", "xi"}});
    return info;
}

std::vector<std::uint16_t> read_pgm16(const fs::path& path, int& width, int& height) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::missing_data, "cannot open " + path.string());
    std::string magic;
    int maxval = 0;
    in >> magic >> width >> height >> maxval;
    in.get();
    if (magic != "P5" || maxval != 65535) throw Error(ErrorKind::missing_data, "not a 16-bit PGM");
    std::vector<std::uint16_t> px(static_cast<std::size_t>(width) * height);
    for (auto& p : px) {
        const int hi = in.get(), lo = in.get();
        if (lo < 0) throw Error(ErrorKind::missing_data, "PGM payload is truncated");
        p = static_cast<std::uint16_t>((hi << 8) | lo);
    }
    return px;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::missing_data, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Manifest

std::uint32_t crc32_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::missing_data, "cannot open " + path.string());
    uLong crc = crc32(0L, Z_NULL, 0);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = in.gcount();
        if (got > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(got));
    }
    return static_cast<std::uint32_t>(crc);
}

void write_manifest(const fs::path& dir, json manifest, const std::vector<fs::path>& files) {
    json index = json::array();
    for (const fs::path& f : files) {
        const fs::path full = dir / f;
        index.push_back({{"path", f.generic_string()},
                         {"bytes", static_cast<std::uint64_t>(fs::file_size(full))},
                         {"crc32", crc32_file(full)}});
    }
    manifest["files"] = index;
    write_json(dir / "manifest.json", manifest);
}

json read_manifest(const fs::path& dir) {
    const fs::path mp = dir / "manifest.json";
    if (!fs::exists(mp)) throw Error(ErrorKind::missing_data, "no manifest in " + dir.string());
    const json m = read_json(mp);
    if (!m.contains("files")) throw Error(ErrorKind::missing_data, "manifest has no file index");
    for (const auto& f : m.at("files")) {
        const fs::path p = dir / f.at("path").get<std::string>();
        if (!fs::exists(p)) throw Error(ErrorKind::missing_data, "missing file " + p.string());
        if (fs::file_size(p) != f.at("bytes").get<std::uint64_t>())
            throw Error(ErrorKind::missing_data, "length mismatch for " + p.string());
        if (crc32_file(p) != f.at("crc32").get<std::uint32_t>())
            throw Error(ErrorKind::missing_data, "checksum mismatch for " + p.string());
    }
    return m;
}

fs::path output_root() {
    const char* env = std::getenv("INVASIONLAB_OUT");
    return env && *env ? fs::path(env) : fs::path("runs");
}

}  // namespace invasionlab
