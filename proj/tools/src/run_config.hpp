#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "xgen/eval/evaluate.hpp"
#include "xgen/gen/orchestrator.hpp"
#include "xgen/sim/kernel.hpp"

namespace xgen::cli {

/// Everything a subcommand may read from the `--config` document.
struct RunConfig {
  gen::PipelineConfig pipeline;
  eval::EvalConfig evaluation;
  sim::SimulationConfig simulation;
  std::uint64_t seed = 0;
  std::optional<std::string> backend;
};

/// Keys: pipeline, evaluation, simulation {end_time, continuous_step,
/// integrator, max_iterations}, seed, backend. Unknown keys throw
/// std::invalid_argument.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::optional<std::filesystem::path>& path);

nlohmann::ordered_json to_json(const RunConfig& config);

}  // namespace xgen::cli
