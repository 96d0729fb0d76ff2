#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgen/eval/consistency.hpp"
#include "xgen/eval/metrics.hpp"
#include "xgen/model/ast.hpp"
#include "xgen/model/diagnostics.hpp"

namespace xgen::eval {

class NoModels : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Hand-counted simulation-logic errors of one unit.
struct Annotation {
  std::size_t n = 0;
  std::string notes;
};

/// Keyed by unit name (compared after name normalization).
using Annotations = std::map<std::string, Annotation>;

/// `{unit: {n, notes}}`. Throws std::invalid_argument on malformed entries.
Annotations annotations_from_json(std::string_view text);

enum class WeightsSource { Explicit, Entropy };

std::string_view to_string(WeightsSource source);

struct EvalConfig {
  PenaltyConfig penalties;
  CoupleWeights couple_weights;
  AtomicWeights atomic_weights;
  /// Part instance or class name -> C_i. Unlisted children weigh 1.
  std::map<std::string, double> subsystem_weights;
  WeightsSource weights_source = WeightsSource::Explicit;
  double end_time = 100.0;
  double continuous_step = 0.1;
  double tolerance = 1e-9;

  void validate() const;
};

/// Rejects unknown keys; absent keys keep their defaults.
EvalConfig eval_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvalConfig& config);

struct SourceFile {
  std::string path;
  std::string text;
};

struct ScoreTree {
  std::string name;            // reference unit
  std::string instance;        // part instance in the parent; empty at the root
  std::string generated_name;  // empty when the unit is missing
  model::UnitKind kind = model::UnitKind::Discrete;
  double A = 0.0;
  double P = 0.0;
  std::optional<double> final;  // couple nodes
  /// Couples: header, part_f1, port, attribute, connection.
  /// Atomics: header, definition, state | equation.
  std::map<std::string, double> components;
  std::map<std::string, double> weights;
  ErrorCounts counts;
  ConsistencyTally header;
  ConsistencyTally port;
  ConsistencyTally definition;
  bool fully_correct = false;
  bool missing = false;
  bool n_assumed_zero = false;
  std::vector<std::string> notes;
  std::vector<ScoreTree> children;

  /// Rolled-up score at couples, A at atomics.
  double score() const { return final ? *final : A; }
};

struct Evaluation {
  ScoreTree root;
  std::vector<model::Diagnostic> diagnostics;
  std::vector<std::string> unmatched;  // generated units with no reference counterpart
  bool n_assumed_zero = false;         // some unit had no annotation
  bool uniform_fallback = false;       // entropy weights degenerated to uniform
  std::string weights_source;
};

/// Scores a generated model set against the reference set. Throws NoModels
/// when `generated` holds no unit.
Evaluation evaluate_model_set(const std::vector<SourceFile>& generated,
                              const std::vector<model::ModelUnit>& reference, const Annotations& annotations,
                              const EvalConfig& config);

/// Scores every set; with WeightsSource::Entropy and at least two sets the
/// component and subsystem weights come from the batch matrix.
std::vector<Evaluation> evaluate_batch(const std::vector<std::vector<SourceFile>>& sets,
                                       const std::vector<model::ModelUnit>& reference,
                                       const std::vector<Annotations>& annotations, const EvalConfig& config,
                                       std::size_t max_in_flight = 4);

nlohmann::json to_json(const ScoreTree& tree);
nlohmann::json to_json(const Evaluation& evaluation);

/// One row per scored unit, depth-first.
std::string to_csv(const Evaluation& evaluation);

}  // namespace xgen::eval
