#pragma once

#include <string>

#include "json.hpp"

#include "spikereg/harness.hpp"

namespace spikereg {

// Fully populated config for a named scenario ("workbench" or "cw").
// Throws config_error for unknown names.
ExperimentConfig scenario_defaults(const std::string& scenario);

// Applies a JSON override object on top of cfg. Every key must be known and
// well typed; anything else throws config_error. Changing "scenario" resets
// the numeric fields to that scenario's defaults first, so later keys in the
// same object still win.
void apply_overrides(ExperimentConfig& cfg, const nlohmann::json& overrides);

// Defaults -> config file -> command-line overrides.
ExperimentConfig resolve_config(const nlohmann::json& file_overrides,
                                const nlohmann::json& cli_overrides);

// Structural checks shared by the harness and the command line.
void validate_config(const ExperimentConfig& cfg);

// Resolved config as JSON, the same shape apply_overrides accepts.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace spikereg
