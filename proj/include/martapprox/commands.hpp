#pragma once

#include <string>

#include "martapprox/io.hpp"

/**
 * Command layer behind the `martapprox` executable.
 *
 * A RunConfig is fully serializable: `knobs` holds every numeric setting
 * (defaults filled in by resolve_defaults) and `inputs` embeds the parsed
 * input documents, so a report can be re-run without the original files.
 */
namespace martapprox::cmd {

using io::Json;

struct RunConfig {
    std::string command;             ///< chain-diagnose, linear, superlinear, frac-poisson, simulate, paper-examples
    Json knobs = Json::object();
    Json inputs = Json::object();    ///< "chain", "g", "coeffs", "fourier" documents
    Json input_paths = Json::object();

    Json to_json() const;
    static RunConfig from_json(const Json& doc);
};

/// Fills missing knobs with the command's defaults and validates ranges.
/// Throws UsageError for unknown commands, bad values, or a missing seed
/// where one is mandatory.
RunConfig resolve_defaults(RunConfig config);

/// Runs the command and returns the full report document:
/// {"format_version", "tool", "tool_version", "command", "config", "result"}.
Json run(const RunConfig& config);

/// Re-executes the configuration embedded in `report` and returns
/// {"reproduced": bool, "report": new report}.
Json rerun(const Json& report);

Json cmd_chain_diagnose(const RunConfig& config);
Json cmd_linear(const RunConfig& config);
Json cmd_superlinear(const RunConfig& config);
Json cmd_frac_poisson(const RunConfig& config);
Json cmd_simulate(const RunConfig& config);
Json cmd_paper_examples(const RunConfig& config);

/// Serializes with shortest round-trip doubles.
std::string dump(const Json& doc);

}  // namespace martapprox::cmd
