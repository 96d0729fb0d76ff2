#include "run_config.hpp"

#include <fstream>

#include <fmt/format.h>

namespace xgen::cli {

namespace {

sim::SimulationConfig simulation_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("'simulation' must be an object");
  sim::SimulationConfig s;
  for (const auto& [key, v] : j.items()) {
    if (key == "end_time" || key == "continuous_step") {
      if (!v.is_number()) throw std::invalid_argument(fmt::format("'simulation.{}' must be a number", key));
      (key == "end_time" ? s.end_time : s.continuous_step) = v.get<double>();
    } else if (key == "integrator") {
      auto i = v.is_string() ? sim::integrator_from_string(v.get<std::string>()) : std::nullopt;
      if (!i) throw std::invalid_argument("'simulation.integrator' must be 'euler' or 'rk4'");
      s.integrator = *i;
    } else if (key == "max_iterations") {
      if (!v.is_number_unsigned()) throw std::invalid_argument("'simulation.max_iterations' must be a count");
      s.max_iterations = v.get<std::size_t>();
    } else {
      throw std::invalid_argument(fmt::format("unknown simulation key '{}'", key));
    }
  }
  s.validate();
  return s;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "pipeline") {
      c.pipeline = gen::pipeline_config_from_json(v);
    } else if (key == "evaluation") {
      c.evaluation = eval::eval_config_from_json(v);
    } else if (key == "simulation") {
      c.simulation = simulation_from_json(v);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw std::invalid_argument("'seed' must be a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "backend") {
      if (!v.is_string()) throw std::invalid_argument("'backend' must be a string");
      c.backend = v.get<std::string>();
    } else {
      throw std::invalid_argument(fmt::format("unknown config key '{}'", key));
    }
  }
  return c;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path) {
  if (!path) return {};
  std::ifstream in(*path);
  if (!in) throw std::invalid_argument(fmt::format("cannot read config {}", path->string()));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(fmt::format("config {} is not JSON: {}", path->string(), e.what()));
  }
  return run_config_from_json(doc);
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["pipeline"] = gen::to_json(c.pipeline);
  j["evaluation"] = eval::to_json(c.evaluation);
  j["simulation"] = {{"end_time", c.simulation.end_time},
                     {"continuous_step", c.simulation.continuous_step},
                     {"integrator", sim::to_string(c.simulation.integrator)},
                     {"max_iterations", c.simulation.max_iterations}};
  j["seed"] = c.seed;
  if (c.backend) j["backend"] = *c.backend;
  return j;
}

}  // namespace xgen::cli
