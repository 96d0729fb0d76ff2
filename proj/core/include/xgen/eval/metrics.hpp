#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xgen/model/ast.hpp"

namespace xgen::eval {

class WeightMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class KindMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateMatrix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PenaltyConfig {
  double epsilon = 0.8;         // incorrect-model ceiling
  double eps_header = 0.6;
  double eps_port = 0.6;
  double eps_definition = 0.6;
  double alpha_c = 0.2;         // per syntax error at the standard length
  double beta_c = 0.1;          // per logic error at the standard length
  double len_c = 1.0;           // standard state count

  /// Throws std::invalid_argument naming the first field out of range.
  void validate() const;
};

/// Component weights of couple units: header, attribute, connection.
struct CoupleWeights {
  double k_h = 1.0 / 3;
  double k_a = 1.0 / 3;
  double k_c = 1.0 / 3;
};

/// Component weights of atomic units. Discrete units use (k_h, k_d, k_s),
/// continuous units (k_h, k_d, k_e); the active group is scaled to sum 1.
struct AtomicWeights {
  double k_h = 0.2;
  double k_d = 0.3;
  double k_s = 0.5;
  double k_e = 0.5;
};

struct ErrorCounts {
  std::size_t m = 0;    // syntax errors
  std::size_t n = 0;    // simulation-logic errors
  std::size_t len = 1;  // states (discrete) or equations (continuous)
};

struct ConsistencyTally {
  std::size_t ce = 0;
  std::size_t ie = 0;

  bool consistent() const { return ie == 0; }
  friend bool operator==(const ConsistencyTally&, const ConsistencyTally&) = default;
};

/// Parent correctness times the weighted child correctness. Weights are
/// scaled to sum 1; their count must equal the child count.
double score_couple(double parent_a, const std::vector<double>& weights, const std::vector<double>& child_a);

/// 1 for a fully correct model, epsilon * p otherwise.
double simulation_correctness(bool fully_correct, double p, double epsilon);

double couple_similarity(double p_header, double f1_part, double p_port, double f1_connection,
                         const CoupleWeights& weights);

struct F1Score {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// F1 of two element sets compared after `model::normalize_name` on each
/// '\x1f'-separated field. Two empty sets score 1.
F1Score match_f1(const std::vector<std::string>& generated, const std::vector<std::string>& reference);

/// 1 when consistent, eps * CE / (CE + IE) otherwise.
double element_similarity(const ConsistencyTally& tally, double eps);

/// (alpha_i, beta_i): the standard-length coefficients rescaled to len_i.
std::pair<double, double> attenuation(double alpha_c, double beta_c, double len_c, double len_i);

/// alpha_i^m * beta_i^n.
double behavior_similarity(const ErrorCounts& counts, const PenaltyConfig& config);

struct AtomicParts {
  double header = 1.0;
  double definition = 1.0;
  std::optional<double> state;     // discrete only
  std::optional<double> equation;  // continuous only
};

/// Throws KindMismatch when the behaviour part does not fit `kind`.
double atomic_similarity(const AtomicParts& parts, model::UnitKind kind, const AtomicWeights& weights);

struct EntropyWeights {
  std::vector<double> weights;
  std::vector<double> entropy;
  bool uniform_fallback = false;  // every column carried the same information
};

/// Entropy weights of the columns of a non-negative row-major matrix.
/// Throws DegenerateMatrix for fewer than two rows or ragged rows.
EntropyWeights entropy_weights(const std::vector<std::vector<double>>& matrix);

}  // namespace xgen::eval
