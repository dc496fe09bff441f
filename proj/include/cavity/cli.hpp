#ifndef CAVITY_CLI_HPP
#define CAVITY_CLI_HPP

#include <cstdint>
#include <optional>
#include <string>

namespace cavity {

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed; // overrides config / CAVITY_SEED
    std::string format = "json";       // csv | json
    int threads = 1;
};

/// Runs the command named in the config file. Returns the process exit code:
/// 0 success, 2 config validation failure, 3 computation error.
int run_cli(const CliOptions& options);

} // namespace cavity

#endif
