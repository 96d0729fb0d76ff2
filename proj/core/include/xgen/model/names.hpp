#pragma once

#include <string>
#include <string_view>

namespace xgen::model {

/// Case-insensitive key in which underscores, spaces, hyphens and camel-case
/// boundaries are equivalent: "AutoPilot", "auto_pilot", "auto pilot" all map
/// to "autopilot".
std::string normalize_name(std::string_view name);

/// "flight scenario control" -> "FlightScenarioControl"; already-camel names
/// keep their inner capitals.
std::string to_class_name(std::string_view phrase);

/// "flight scenario control" -> "flight_scenario_control",
/// "AutoPilot" -> "auto_pilot".
std::string to_instance_name(std::string_view phrase);

/// Lower-cases and collapses runs of whitespace; used for document-level
/// entity matching.
std::string normalize_phrase(std::string_view phrase);

}  // namespace xgen::model
