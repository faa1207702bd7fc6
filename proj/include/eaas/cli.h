#ifndef EAAS_CLI_H
#define EAAS_CLI_H

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eaas/errors.h"
#include "eaas/optimizer.h"
#include "eaas/pattern.h"

namespace eaas::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::uint64_t kCheckpointTrials = 1000000;

enum class Command { Detect, Position, Recognize, Bounds, Optimize };

std::string_view command_name(Command command);

/// Schema violation in a config file; row and col are 1-based (0 = unknown).
struct ConfigError : ParseError {
    using ParseError::ParseError;
};

enum class GainMode { Nulling, Unity, Fixed };

struct GainChoice {
    GainMode mode = GainMode::Nulling;
    double value = 1.0;
};

struct Physics {
    double n_s = 1.0;
    double kappa_t = 0.75;
    double kappa_b = 1.0;
    double kappa_i = 1.0;
    double n_b = 0.0;
};

/// Fully resolved run description. `resolved` mirrors every field, defaults
/// included, and is what the manifest records.
struct RunConfig {
    Command command = Command::Detect;
    Physics physics;
    std::vector<std::uint64_t> m_copies;
    std::size_t m_slots = 1;
    std::size_t k_peaks = 1;
    std::optional<TransmissivityPattern> pattern;
    GainChoice gain;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    OptimizationSpec optimize;
    bool compare_gains = false;
    nlohmann::json resolved;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<unsigned> threads;
};

/// Parses YAML text. Relative paths inside the config resolve against base_dir.
/// Throws ConfigError carrying the line and column of the offending node.
RunConfig parse_config(const std::string &text, Command command, const std::filesystem::path &base_dir,
                       const Overrides &overrides = {});
RunConfig load_config(const std::filesystem::path &path, Command command, const Overrides &overrides = {});

/// Fixed 17-significant-digit rendering used in every result table.
std::string format_double(double value);

/// Writes results and manifest.json into out_dir, resuming from a checkpoint
/// left there by an interrupted run of the same config. Returns the process
/// exit code (0 on success, 3 on numeric failure).
int run(const RunConfig &config, const std::filesystem::path &out_dir, std::ostream &log);

/// Writes path via a temporary sibling and a rename.
void write_atomically(const std::filesystem::path &path, const std::string &contents);

}  // namespace eaas::cli

#endif
