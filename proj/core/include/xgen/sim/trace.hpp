#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xgen/sim/value.hpp"

namespace xgen::sim {

struct PortEvent {
  double time = 0.0;
  std::string path;  // dotted instance path
  std::string port;
  Value value;

  friend bool operator==(const PortEvent&, const PortEvent&) = default;
};

struct SimulationTrace {
  std::vector<PortEvent> events;

  friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;
};

/// One `time\tpath\tport\tvalue` line per event.
std::string to_tsv(const SimulationTrace& trace);
SimulationTrace trace_from_tsv(std::string_view text);

/// `{"events":[{"time":..,"path":..,"port":..,"value":..}, ...]}`
std::string to_json(const SimulationTrace& trace);
SimulationTrace trace_from_json(std::string_view text);

struct PortVerdict {
  std::string path;
  std::string port;
  bool match = true;
  std::size_t actual_count = 0;
  std::size_t reference_count = 0;
  std::size_t first_mismatch = 0;  // meaningful only when !match
  std::string reason;
};

struct TraceDiff {
  std::vector<PortVerdict> ports;  // sorted by (path, port)

  bool all_match() const;
  const PortVerdict* find(std::string_view path, std::string_view port) const;
};

class PortSetMismatch : public std::runtime_error {
 public:
  PortSetMismatch(std::vector<std::string> missing, std::vector<std::string> extra);

  const std::vector<std::string>& missing() const { return missing_; }  // in reference only
  const std::vector<std::string>& extra() const { return extra_; }      // in actual only

 private:
  std::vector<std::string> missing_;
  std::vector<std::string> extra_;
};

/// Per-port comparison. Event times must match exactly index by index;
/// numeric values within absolute `tol`, other values exactly.
TraceDiff compare_traces(const SimulationTrace& actual, const SimulationTrace& reference, double tol);

}  // namespace xgen::sim
