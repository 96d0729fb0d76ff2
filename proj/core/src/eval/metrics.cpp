#include "xgen/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "xgen/model/names.hpp"

namespace xgen::eval {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool unit_interval(double v, bool open_low, bool open_high) {
  return (open_low ? v > 0 : v >= 0) && (open_high ? v < 1 : v <= 1);
}

std::vector<double> normalized(const std::vector<double>& weights) {
  double sum = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw WeightMismatch(fmt::format("weight {} is not a non-negative number", w));
    sum += w;
  }
  if (sum <= 0) throw WeightMismatch("weights sum to zero");
  std::vector<double> out;
  out.reserve(weights.size());
  for (double w : weights) out.push_back(w / sum);
  return out;
}

std::string normalized_key(const std::string& element) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto sep = element.find('\x1f', pos);
    out += model::normalize_name(element.substr(pos, sep == std::string::npos ? std::string::npos : sep - pos));
    if (sep == std::string::npos) break;
    out += '\x1f';
    pos = sep + 1;
  }
  return out;
}

}  // namespace

void PenaltyConfig::validate() const {
  require(unit_interval(epsilon, true, false), fmt::format("epsilon must lie in (0,1], got {}", epsilon));
  require(unit_interval(eps_header, true, false), fmt::format("eps_header must lie in (0,1], got {}", eps_header));
  require(unit_interval(eps_port, true, false), fmt::format("eps_port must lie in (0,1], got {}", eps_port));
  require(unit_interval(eps_definition, true, false),
          fmt::format("eps_definition must lie in (0,1], got {}", eps_definition));
  require(unit_interval(alpha_c, true, true), fmt::format("alpha_c must lie in (0,1), got {}", alpha_c));
  require(unit_interval(beta_c, true, true), fmt::format("beta_c must lie in (0,1), got {}", beta_c));
  require(beta_c < alpha_c, fmt::format("beta_c ({}) must be smaller than alpha_c ({})", beta_c, alpha_c));
  require(len_c >= 1 && std::isfinite(len_c), fmt::format("len_c must be at least 1, got {}", len_c));
}

double score_couple(double parent_a, const std::vector<double>& weights, const std::vector<double>& child_a) {
  if (weights.size() != child_a.size())
    throw WeightMismatch(fmt::format("{} weight(s) for {} child model(s)", weights.size(), child_a.size()));
  if (child_a.empty()) return parent_a;
  normalized(weights);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    num += weights[i] * child_a[i];
    den += weights[i];
  }
  return parent_a * (num / den);
}

double simulation_correctness(bool fully_correct, double p, double epsilon) {
  return fully_correct ? 1.0 : epsilon * p;
}

double couple_similarity(double p_header, double f1_part, double p_port, double f1_connection,
                         const CoupleWeights& weights) {
  normalized({weights.k_h, weights.k_a, weights.k_c});
  double num = weights.k_h * p_header + weights.k_a * (f1_part * p_port) + weights.k_c * f1_connection;
  return num / (weights.k_h + weights.k_a + weights.k_c);
}

F1Score match_f1(const std::vector<std::string>& generated, const std::vector<std::string>& reference) {
  std::set<std::string> gen, ref;
  for (const auto& g : generated) gen.insert(normalized_key(g));
  for (const auto& r : reference) ref.insert(normalized_key(r));
  F1Score s;
  for (const auto& g : gen) (ref.count(g) ? s.true_positive : s.false_positive)++;
  s.false_negative = ref.size() - s.true_positive;
  if (gen.empty() && ref.empty()) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = gen.empty() ? 0.0 : static_cast<double>(s.true_positive) / static_cast<double>(gen.size());
  s.recall = ref.empty() ? 0.0 : static_cast<double>(s.true_positive) / static_cast<double>(ref.size());
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

double element_similarity(const ConsistencyTally& tally, double eps) {
  if (tally.consistent()) return 1.0;
  return eps * static_cast<double>(tally.ce) / static_cast<double>(tally.ce + tally.ie);
}

std::pair<double, double> attenuation(double alpha_c, double beta_c, double len_c, double len_i) {
  if (!(len_i >= 1)) throw std::invalid_argument(fmt::format("len_i must be at least 1, got {}", len_i));
  const double scale = len_c / len_i;
  return {std::exp(scale * std::log(alpha_c)), std::exp(scale * std::log(beta_c))};
}

double behavior_similarity(const ErrorCounts& counts, const PenaltyConfig& config) {
  if (counts.m == 0 && counts.n == 0) return 1.0;
  // alpha_i^m = exp(m * len_c / len * ln alpha_c); kept in exponent form so
  // that (len, m, n) -> (k len, k m, k n) leaves the value unchanged.
  const double scale = config.len_c / static_cast<double>(std::max<std::size_t>(counts.len, 1));
  const double exponent = static_cast<double>(counts.m) * scale * std::log(config.alpha_c) +
                          static_cast<double>(counts.n) * scale * std::log(config.beta_c);
  return std::exp(exponent);
}

double atomic_similarity(const AtomicParts& parts, model::UnitKind kind, const AtomicWeights& weights) {
  if (kind == model::UnitKind::Discrete) {
    if (parts.equation) throw KindMismatch("a discrete unit has no equation part");
    normalized({weights.k_h, weights.k_d, weights.k_s});
    double num = weights.k_h * parts.header + weights.k_d * parts.definition + weights.k_s * parts.state.value_or(1.0);
    return num / (weights.k_h + weights.k_d + weights.k_s);
  }
  if (kind == model::UnitKind::Continuous) {
    if (parts.state) throw KindMismatch("a continuous unit has no state part");
    normalized({weights.k_h, weights.k_d, weights.k_e});
    double num = weights.k_h * parts.header + weights.k_d * parts.definition + weights.k_e * parts.equation.value_or(1.0);
    return num / (weights.k_h + weights.k_d + weights.k_e);
  }
  throw KindMismatch(fmt::format("{} units have no atomic similarity", model::to_string(kind)));
}

EntropyWeights entropy_weights(const std::vector<std::vector<double>>& matrix) {
  const auto rows = matrix.size();
  if (rows < 2) throw DegenerateMatrix(fmt::format("entropy weights need at least 2 rows, got {}", rows));
  const auto cols = matrix.front().size();
  if (cols == 0) throw DegenerateMatrix("matrix has no columns");
  for (const auto& r : matrix) {
    if (r.size() != cols) throw DegenerateMatrix("rows differ in length");
    for (double v : r)
      if (!(v >= 0) || !std::isfinite(v)) throw DegenerateMatrix(fmt::format("entry {} is negative or not finite", v));
  }

  EntropyWeights out;
  out.entropy.assign(cols, 1.0);
  std::vector<double> d(cols, 0.0);
  const double k = 1.0 / std::log(static_cast<double>(rows));
  for (std::size_t j = 0; j < cols; ++j) {
    bool constant = true;
    double sum = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      sum += matrix[i][j];
      constant = constant && matrix[i][j] == matrix[0][j];
    }
    // Identical entries (zeros included) carry no information.
    if (constant) continue;
    double e = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      double p = matrix[i][j] / sum;
      if (p > 0) e -= p * std::log(p);
    }
    out.entropy[j] = e * k;
    d[j] = 1.0 - out.entropy[j];
  }
  double total = std::accumulate(d.begin(), d.end(), 0.0);
  if (total <= 0) {
    out.uniform_fallback = true;
    out.weights.assign(cols, 1.0 / static_cast<double>(cols));
    return out;
  }
  out.weights.reserve(cols);
  for (double dj : d) out.weights.push_back(dj / total);
  return out;
}

}  // namespace xgen::eval
