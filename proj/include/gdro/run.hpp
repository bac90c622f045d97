#ifndef GDRO_RUN_HPP
#define GDRO_RUN_HPP

#include "gdro/config.hpp"
#include "gdro/parallel.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace gdro {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_validation = 2, exit_stability = 3, exit_assertion = 4 };

struct RunOptions {
    bool assert_checks = false;
    Execution exec;
    std::optional<config::Method> method;
    std::optional<std::filesystem::path> output_dir;
};

/// Solves, writes the requested outputs and returns an ExitCode.
/// Diagnostics go to `diag` as key=value lines.
int run(const config::RunConfig& cfg, const RunOptions& options, std::ostream& diag);

}  // namespace gdro

#endif  // GDRO_RUN_HPP
