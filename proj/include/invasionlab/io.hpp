#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "invasionlab/core.hpp"
#include "invasionlab/stepper.hpp"

namespace invasionlab {

// ---------------------------------------------------------------------------
// Reproducible noise

std::uint64_t splitmix64(std::uint64_t x);
/// Uniform on [-1, 1) from splitmix64 of seed and counter; independent of call order.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

// ---------------------------------------------------------------------------
// Run configuration

enum class InitKind { zero, bump, noise, file };

struct InitSpec {
    InitKind kind = InitKind::zero;
    double center = 0.0, width = 1.0, amplitude = 0.0;  ///< bump
    double mean = 0.0, x_lo = 0.0, x_hi = 0.0;          ///< noise: mean + amplitude U[-1,1) on [x_lo, x_hi]
    std::uint64_t seed = 0;
    std::string path;  ///< file: snapshot to start from
};

struct RunConfig {
    Params params;
    Grid grid;
    SchemeConfig scheme;
    InitSpec init;
    std::vector<PerturbationEvent> events;
    nlohmann::json echo;  ///< the document as parsed
};

/// Strict parse: unknown keys, missing required keys and invalid values throw
/// ErrorKind::config with the dotted field path leading the message.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// Initial state; relative file paths resolve against base_dir.
State initial_state(const RunConfig& cfg, const std::filesystem::path& base_dir = {});

// ---------------------------------------------------------------------------
// Files

/// One JSON header line, then n doubles of u and n of w, little endian.
void write_snapshot(const std::filesystem::path& path, const State& state);
State read_snapshot(const std::filesystem::path& path);

/// Full-precision number formatting used by CSV and JSON writers.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);
/// Header and columns of a numeric CSV file.
std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(
    const std::filesystem::path& path);

struct PgmInfo {
    int width = 0, height = 0;
    double vmin = 0.0, vmax = 0.0;
};

/// 16-bit binary PGM, one row per entry of rows, values mapped linearly from
/// [min, max] to [0, 65535]; the range goes to path + ".json".
PgmInfo write_pgm16(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows);
std::vector<std::uint16_t> read_pgm16(const std::filesystem::path& path, int& width, int& height);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// Run directories

std::uint32_t crc32_file(const std::filesystem::path& path);

/// Adds a "files" index (relative path, bytes, crc32) for files under dir and
/// writes dir/manifest.json.
void write_manifest(const std::filesystem::path& dir, nlohmann::json manifest,
                    const std::vector<std::filesystem::path>& files);

/// Loads dir/manifest.json and checks every indexed file; throws missing_data.
nlohmann::json read_manifest(const std::filesystem::path& dir);

/// $INVASIONLAB_OUT when set, else "runs".
std::filesystem::path output_root();

}  // namespace invasionlab
