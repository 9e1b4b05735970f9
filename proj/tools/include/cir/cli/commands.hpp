#pragma once

#include "cir/cli/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

namespace cir::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitInfeasible = 3,
    kExitNumerical = 4,
};

struct CommandOptions {
    std::optional<std::filesystem::path> out; // overrides the config's output path
    std::optional<std::uint64_t> seed;        // overrides /noise/seed
    std::optional<int> runs;                  // overrides /runs
};

void render_report(std::ostream& out, const FeasibilityReport& report);

// Each command writes results to `out` and diagnostics to `err` and returns
// an exit code. Library errors propagate; run_cli maps them to exit codes.
int cmd_check(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_run(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out,
            std::ostream& err);
int cmd_montecarlo(const ExperimentConfig& config, const CommandOptions& options,
                   std::ostream& out, std::ostream& err);

// Entry point of the `cir` executable.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace cir::cli
