// The `sbsim` driver: config loading, regime gate, sweeps and exit codes.

#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace sbsim::cli {

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_io = 1;  // I/O failure or anything unexpected
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;
inline constexpr int exit_cap = 4;

struct Sweep {
    std::string key;  // dotted path into the config, e.g. "modes.0.kappa_hz"
    std::vector<double> values;
};

// "key=v1,v2,..."; throws ConfigError.
Sweep parse_sweep(const std::string& spec);

struct RunOptions {
    std::filesystem::path out_dir{"."};
    std::size_t threads{1};
    bool strict_regime{false};
    bool dry_run{false};
    bool acknowledge_cap{false};
    std::vector<Sweep> sweeps;
};

std::string version();

int run(const std::string& subcommand, const std::filesystem::path& config_path, const RunOptions& opts,
        std::ostream& out, std::ostream& err);

}  // namespace sbsim::cli
