#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xgen/model/linker.hpp"
#include "xgen/sim/evaluator.hpp"
#include "xgen/sim/trace.hpp"

namespace xgen::sim {

enum class Integrator { ExplicitEuler, RK4 };

std::string_view to_string(Integrator integrator);
std::optional<Integrator> integrator_from_string(std::string_view text);

struct SimulationConfig {
  double end_time = 10.0;
  double continuous_step = 0.1;
  Integrator integrator = Integrator::ExplicitEuler;
  std::uint64_t seed = 0;
  /// Bound on cascade rounds and on zero-duration transitions at one instant.
  std::size_t max_iterations = 10000;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

class RuntimeFault : public std::runtime_error {
 public:
  RuntimeFault(double time, std::string part_path, std::string cause);

  double time() const { return time_; }
  const std::string& part_path() const { return part_path_; }
  const std::string& cause() const { return cause_; }

 private:
  double time_;
  std::string part_path_;
  std::string cause_;
};

/// A transform names a state the machine does not have.
class UnknownTransformTarget : public RuntimeFault {
 public:
  using RuntimeFault::RuntimeFault;
};

/// Mutable state of one discrete or continuous instance.
struct AtomicRuntime {
  const model::ModelUnit* unit = nullptr;
  std::string path;
  std::string current_state;  // empty for continuous units
  Env value_env;              // parameters and values
  Env ports;
  double time_of_last_event = 0.0;
  double time_advance = std::numeric_limits<double>::infinity();
  std::vector<PortEvent> pending_outputs;
  std::shared_ptr<ExecContext> context;

  double next_internal_time() const { return time_of_last_event + time_advance; }
};

/// Runtime at `start` in the initial state with its entry actions applied;
/// the outputs those actions wrote sit in pending_outputs. The unit must
/// outlive the runtime.
AtomicRuntime make_atomic_runtime(const model::ModelUnit& unit, std::string path,
                                  std::shared_ptr<ExecContext> context = nullptr, double start = 0.0);

/// Internal transition when `now` is the scheduled time, then the external
/// transition when `inputs` is nonempty. Outputs include anything pending.
std::pair<AtomicRuntime, std::vector<PortEvent>> step_atomic(AtomicRuntime rt,
                                                             const std::vector<PortEvent>& inputs,
                                                             double now);

/// The two halves of step_atomic, in place.
std::vector<PortEvent> internal_transition(AtomicRuntime& rt, double now);
std::vector<PortEvent> external_transition(AtomicRuntime& rt, const std::vector<PortEvent>& inputs,
                                           double now);

/// Runs the linked model from t=0 to config.end_time. The trace holds every
/// atomic output, every couple-port pass and every input delivery.
SimulationTrace simulate(const model::LinkedModel& model, const SimulationConfig& config);

}  // namespace xgen::sim
