#pragma once

// Fast invariant suite behind the `verify` subcommand.

#include <json.hpp>

#include "scenario.hpp"

namespace nlslab {

/// {checks: [{name, passed, value, tolerance}], all_passed}. Never throws for
/// a failed check; a check that throws is recorded as failed with its message.
nlohmann::json verify_suite(const Scenario& s);

}  // namespace nlslab
