#pragma once

// Subcommand dispatch. Each run writes out/<name>/<subcommand>/ with
// report.json, an optional series.csv and snaps/*.nlsf.

#include <json.hpp>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace nlslab {

using json = nlohmann::json;

const char* version_string();

/// Known subcommands in help order.
const std::vector<std::string>& subcommands();
bool is_subcommand(const std::string& name);

struct RunReport {
  json report;        // {scenario, subcommand, version, seed, config, payload, timings}
  std::string dir;    // directory the side files went to
  int exit_code = 0;  // 3 when a verify check failed
};

/// Runs one subcommand. `out_root` overrides [output] dir when nonempty.
/// Throws ConfigError for unknown subcommands; downstream errors pass through
/// with the subcommand prepended.
RunReport run(const std::string& subcommand, const Scenario& scenario, const std::string& out_root = "");

/// The report without its timings block, for determinism checks.
json payload_only(const json& report);

/// Exit code for an exception escaping run().
int exit_code_for(const std::exception& e);

}  // namespace nlslab
