#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "rkm/cli/config.hpp"

namespace rkm::cli {

struct GlobalOptions {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed; ///< replaces the config's seed list
    std::optional<std::string> out;    ///< replaces output_dir
    unsigned threads = 0;              ///< 0 keeps the current setting
    bool large = false;
    bool dump_config = false;          ///< print the resolved config and stop
};

/// Loads the config (or the built-in default for `command`), applies the
/// overrides, fills absent sections from the defaults and validates.
ExperimentConfig resolve_config(const std::string& command, const GlobalOptions& opts);

/// Runs one subcommand. Progress goes to `out`, diagnostics to `err`.
/// Returns 0 on success, 2 on invalid input, 3 when an iteration fails to
/// converge, 4 on I/O failure and 1 otherwise.
int run_command(const std::string& command, const GlobalOptions& opts, std::ostream& out, std::ostream& err);

/// Same as run_command but lets exceptions escape.
void execute(const ExperimentConfig& config, std::ostream& out);

} // namespace rkm::cli
