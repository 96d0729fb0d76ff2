#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "xgen/eval/metrics.hpp"
#include "xgen/model/linker.hpp"
#include "xgen/model/parser.hpp"
#include "xgen/model/printer.hpp"
#include "xgen/sim/kernel.hpp"

namespace fs = std::filesystem;
using namespace xgen;

namespace {

std::string corpus_text() {
  std::string text;
  for (const auto& entry : fs::directory_iterator(fs::path(XGEN_FIXTURE_DIR) / "corpus")) {
    if (entry.path().extension() != ".x") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    text += ss.str() + "\n";
  }
  return text;
}

std::vector<model::ModelUnit> aircraft() {
  std::vector<model::ModelUnit> units;
  for (const auto& entry : fs::directory_iterator(fs::path(XGEN_FIXTURE_DIR) / "aircraft" / "reference")) {
    if (entry.path().extension() != ".x") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    for (auto& u : model::parse_units(ss.str(), entry.path().string())) units.push_back(std::move(u));
  }
  return units;
}

void BM_ParseCorpus(benchmark::State& state) {
  const auto text = corpus_text();
  for (auto _ : state) benchmark::DoNotOptimize(model::parse_units(text));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseCorpus);

void BM_PrintCorpus(benchmark::State& state) {
  const auto units = model::parse_units(corpus_text());
  for (auto _ : state) benchmark::DoNotOptimize(model::print_units(units));
}
BENCHMARK(BM_PrintCorpus);

void BM_LinkAircraft(benchmark::State& state) {
  const auto units = aircraft();
  for (auto _ : state) benchmark::DoNotOptimize(model::link_model_set(units));
}
BENCHMARK(BM_LinkAircraft);

void BM_SimulateAircraft(benchmark::State& state) {
  auto linked = model::link_model_set(aircraft());
  sim::SimulationConfig config;
  config.end_time = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sim::simulate(*linked.model, config));
}
BENCHMARK(BM_SimulateAircraft)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_EntropyWeights(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> cell(0.0, 1.0);
  std::vector<std::vector<double>> matrix(static_cast<std::size_t>(state.range(0)), std::vector<double>(8));
  for (auto& row : matrix)
    for (auto& v : row) v = cell(rng);
  for (auto _ : state) benchmark::DoNotOptimize(eval::entropy_weights(matrix));
}
BENCHMARK(BM_EntropyWeights)->Arg(16)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
