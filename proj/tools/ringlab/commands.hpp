#pragma once

#include "config_reader.hpp"
#include "report.hpp"

#include <string>
#include <vector>

namespace ringlab::cli {

const std::vector<std::string>& subcommands();
bool is_subcommand(const std::string& name);

/// Tolerance on |difference - residue_sum| in band-isolate.
inline constexpr double kBandTolerance = 1e-6;
/// Tolerance on the node identities in window-check.
inline constexpr double kNodeIdentityTolerance = 1e-12;

/// Dispatches to the subcommand driver. Configuration problems throw
/// Error(configuration); the returned exit_code is 0 or 1.
Output run_subcommand(const std::string& name, const json& config, int jobs = 1);

Output pipeline_output(const RunReport& rep, const std::string& subcommand, const ScenarioConfig& cfg);

}  // namespace ringlab::cli
