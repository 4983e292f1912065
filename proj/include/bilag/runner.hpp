#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bilag/scene.hpp"

namespace bilag {

// Command-line flag overrides. Unset options fall back to the scene file and
// then to built-in defaults; the README documents the resolution rules.
struct RunFlags {
    std::optional<std::uint64_t> seed; // sampling seed (default: scene seed)
    std::optional<int> samples;        // verification sample count (default 100)
    std::optional<double> tol;         // blanket override of residual tolerances
    long iters = 10000;                // rotation-number iterations
    std::optional<double> tmax;        // flow-time budget
    std::optional<int> grid;           // section grid / sup grid
};

struct RunResult {
    int exit_code = 0; // 0 every check passed, 1 a check failed or the run errored
    nlohmann::ordered_json report;
    std::string csv; // empty when the command emits no table
};

// The subcommand names, in documentation order.
const std::vector<std::string>& command_names();

// Executes one subcommand against a parsed scene. Never throws: runtime
// errors come back as exit code 1 with an "error" field in the report;
// unknown command names come back as exit code 2.
RunResult run_command(const std::string& command, const Scene& scene,
                      const RunFlags& flags = {});

// out.json -> out.csv (otherwise the suffix .csv is appended)
std::string csv_path_for(const std::string& out_path);
// Writes the JSON report at out_path and, when present, the CSV table at
// csv_path_for(out_path).
void write_outputs(const RunResult& r, const std::string& out_path);

} // namespace bilag
