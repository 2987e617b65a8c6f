#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "iotbandit/config.hpp"

namespace iotbandit::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kIoError = 3 };

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::optional<std::filesystem::path> config;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> seeds;
    std::optional<std::string> policy;
    std::optional<std::uint64_t> horizon;
    std::filesystem::path out = "out";

    // sweep grid overrides
    std::optional<std::string> loads;
    std::optional<std::string> alphas;
    std::optional<std::string> devices;

    // report
    std::filesystem::path trace;
    std::optional<std::size_t> channels;
};

/// Defaults, then --preset, then the config file, then the remaining flags.
RunConfig resolve_config(const Options& opts);

/// Scenario for one sweep grid point. Unset dimensions keep the base value.
ScenarioConfig sweep_scenario(const ScenarioConfig& base, std::optional<double> max_load,
                              std::optional<double> alpha, std::optional<std::size_t> device_count);

// Each command writes its artifacts under opts.out (report prints only) and
// throws ConfigError or IoError on failure.
void cmd_bench(const Options& opts, std::ostream& out);
void cmd_sim(const Options& opts, std::ostream& out);
void cmd_sweep(const Options& opts, std::ostream& out);
void cmd_report(const Options& opts, std::ostream& out);

/// Full command line entry point; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace iotbandit::cli
