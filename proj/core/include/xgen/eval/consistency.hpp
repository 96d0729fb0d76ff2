#pragma once

#include <map>
#include <string>
#include <vector>

#include "xgen/eval/metrics.hpp"
#include "xgen/model/ast.hpp"

namespace xgen::eval {

struct UnitConsistency {
  ConsistencyTally header;      // unit name against parent parts, imports
  ConsistencyTally port;        // couple units: connection endpoints
  ConsistencyTally definition;  // atomic and function units: ports, callees
  std::vector<std::string> issues;  // one line per inconsistent element
};

/// Keyed by unit name.
using ConsistencyReport = std::map<std::string, UnitConsistency>;

/// Cross-unit agreement of names, ports and function calls. Works on units
/// that do not link. `slot_of` maps a unit name to the part class it stands
/// in for when the two differ, so that its ports are still checked against
/// the parent's connections; the header check keeps comparing the literal
/// names.
ConsistencyReport consistency_check(const std::vector<model::ModelUnit>& units,
                                    const std::map<std::string, std::string>& slot_of = {});

}  // namespace xgen::eval
