#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "run_config.hpp"
#include "xgen/doc/pipeline.hpp"
#include "xgen/eval/evaluate.hpp"
#include "xgen/gen/backend.hpp"
#include "xgen/gen/dataset.hpp"
#include "xgen/gen/orchestrator.hpp"
#include "xgen/model/linker.hpp"
#include "xgen/model/parser.hpp"
#include "xgen/model/printer.hpp"
#include "xgen/sim/kernel.hpp"
#include "xgen/templ/template.hpp"

namespace fs = std::filesystem;
using namespace xgen;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

/// Invalid input detected before any work started.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  bool json = false;
  std::optional<std::string> backend;
  std::optional<std::string> port_convention;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot read {}", path.string()));
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError(fmt::format("cannot write {}", path.string()));
  out << text;
}

/// `.x` files named directly or found under the given directories, sorted per directory.
std::vector<fs::path> model_files(const std::vector<std::string>& paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".x") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      out.emplace_back(p);
    } else {
      throw UsageError(fmt::format("no such file or directory: {}", p));
    }
  }
  return out;
}

std::vector<model::ModelUnit> load_units_strict(const std::vector<std::string>& paths) {
  std::vector<model::ModelUnit> units;
  for (const auto& file : model_files(paths)) {
    auto parsed = model::parse_units(read_text(file), file.string());
    units.insert(units.end(), parsed.begin(), parsed.end());
  }
  return units;
}

void print_diagnostics(const std::vector<model::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << model::format_diagnostic(d) << "\n";
}

cli::RunConfig apply_globals(const Globals& g) {
  cli::RunConfig c;
  try {
    c = cli::load_run_config(g.config_path ? std::optional<fs::path>(*g.config_path) : std::nullopt);
    if (g.seed) c.seed = *g.seed;
    if (g.backend) c.backend = g.backend;
    if (g.port_convention) c.pipeline.port_convention = templ::port_convention_from_string(*g.port_convention);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.pipeline.limits.seed = c.seed;
  c.simulation.seed = c.seed;
  return c;
}

std::unique_ptr<gen::GeneratorBackend> make_backend(const std::string& spec) {
  auto colon = spec.find(':');
  auto scheme = spec.substr(0, colon);
  auto rest = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (scheme == "reference" && !rest.empty()) return std::make_unique<gen::ReferenceBackend>(load_units_strict({rest}));
  if (scheme == "replay" && !rest.empty()) return std::make_unique<gen::ReplayBackend>(fs::path(rest));
  if (scheme == "http" && !rest.empty()) {
    gen::HttpChatOptions o;
    if (auto hash = rest.find('#'); hash != std::string::npos) {
      o.model = rest.substr(hash + 1);
      rest.resize(hash);
    }
    auto authority = rest.find("://");
    auto slash = rest.find('/', authority == std::string::npos ? 0 : authority + 3);
    o.url = rest.substr(0, slash);
    if (slash != std::string::npos) o.path = rest.substr(slash);
    if (const char* key = std::getenv("XGEN_API_KEY")) o.api_key = key;
    return std::make_unique<gen::HttpChatBackend>(o);
  }
  throw UsageError(fmt::format("backend '{}' is not one of reference:DIR, replay:DIR, http:URL[#model]", spec));
}

// ------------------------------------------------------------------- commands

int cmd_check(const Globals& g, const std::vector<std::string>& paths, const std::optional<std::string>& top) {
  apply_globals(g);
  std::vector<model::ModelUnit> units;
  std::vector<model::Diagnostic> diags;
  for (const auto& file : model_files(paths)) {
    auto parsed = model::parse_units_recovering(read_text(file), file.string());
    units.insert(units.end(), parsed.units.begin(), parsed.units.end());
    diags.insert(diags.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  }
  if (!model::has_errors(diags)) {
    model::LinkOptions opts;
    opts.top = top;
    auto linked = model::link_model_set(units, opts);
    diags.insert(diags.end(), linked.diagnostics.begin(), linked.diagnostics.end());
  }
  const bool failed = model::has_errors(diags);
  if (g.json) {
    std::cout << model::diagnostics_to_json(diags) << "\n";
  } else {
    print_diagnostics(diags);
    if (!failed) std::cout << fmt::format("ok: {} unit(s)\n", units.size());
  }
  return failed ? kFailed : kOk;
}

int cmd_simulate(const Globals& g, const std::vector<std::string>& paths, const std::optional<std::string>& top,
                 std::optional<double> end, std::optional<double> step, std::optional<std::string> integrator,
                 const std::optional<std::string>& out) {
  auto config = apply_globals(g);
  auto& s = config.simulation;
  if (end) s.end_time = *end;
  if (step) s.continuous_step = *step;
  if (integrator) {
    auto i = sim::integrator_from_string(*integrator);
    if (!i) throw UsageError("--integrator must be euler or rk4");
    s.integrator = *i;
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  model::LinkOptions opts;
  opts.top = top;
  auto linked = model::link_model_set(load_units_strict(paths), opts);
  if (!linked.ok()) {
    print_diagnostics(linked.diagnostics);
    return kFailed;
  }
  auto trace = sim::simulate(*linked.model, s);
  auto text = g.json ? sim::to_json(trace) + "\n" : sim::to_tsv(trace);
  if (out) {
    write_text(*out, text);
  } else {
    std::cout << text;
  }
  return kOk;
}

doc::DocPipelineOptions doc_options(const std::optional<std::string>& edits) {
  doc::DocPipelineOptions o;
  if (edits) o.edits = doc::parse_edits(read_text(*edits));
  return o;
}

int cmd_extract(const Globals& g, const std::string& document, const std::optional<std::string>& edits,
                const std::optional<std::string>& out) {
  apply_globals(g);
  auto options = doc_options(edits);
  auto result = doc::run_doc_pipeline(read_text(document), options);
  print_diagnostics(result.diagnostics);
  auto text = doc::to_json(result).dump(2) + "\n";
  if (out) {
    write_text(*out, text);
  } else {
    std::cout << text;
  }
  return kOk;
}

int cmd_pipeline(const Globals& g, const std::string& document, const std::optional<std::string>& edits,
                 const std::vector<std::string>& library_paths, const std::string& out_dir,
                 const std::optional<std::string>& record) {
  auto config = apply_globals(g);
  if (!config.backend) throw UsageError("pipeline needs --backend (reference:DIR, replay:DIR or http:URL)");
  if (library_paths.empty()) throw UsageError("pipeline needs at least one --library file or directory");
  auto library = gen::PromptLibrary::standard(load_units_strict(library_paths));
  auto options = doc_options(edits);
  auto text = read_text(document);
  auto backend = make_backend(*config.backend);
  std::unique_ptr<gen::RecordingBackend> recorder;
  gen::GeneratorBackend* active = backend.get();
  if (record) {
    recorder = std::make_unique<gen::RecordingBackend>(*backend, fs::path(*record));
    active = recorder.get();
  }
  auto run = gen::run_pipeline(text, options, *active, library, config.pipeline);
  gen::write_outputs(run, out_dir);
  print_diagnostics(run.diagnostics);
  if (g.json) {
    std::cout << gen::manifest_of(run).dump(2) << "\n";
  } else {
    std::cout << fmt::format("{} unit(s) written to {}; output digest {}\n", run.units.size(), out_dir,
                             run.output_digest());
  }
  if (!run.complete) {
    std::cerr << "error: the model set is incomplete; see manifest.json\n";
    return kFailed;
  }
  return kOk;
}

int cmd_dataset(const Globals& g, const std::vector<std::string>& paths, const std::string& out,
                const std::optional<std::string>& pool_file) {
  auto config = apply_globals(g);
  std::vector<std::string> pool;
  if (pool_file) {
    std::istringstream lines(read_text(*pool_file));
    for (std::string line; std::getline(lines, line);)
      if (!line.empty()) pool.push_back(line);
  }
  std::vector<model::ModelUnit> atomics;
  for (auto& u : load_units_strict(paths))
    if (u.kind == model::UnitKind::Discrete || u.kind == model::UnitKind::Continuous) atomics.push_back(std::move(u));
  auto samples = gen::build_mask_dataset(atomics, config.seed, pool);
  std::size_t sound = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      if (model::strip_spans(gen::unmask(samples[i].input, samples[i].output)) == model::strip_spans(atomics[i]))
        ++sound;
      else
        std::cerr << fmt::format("error: sample {} ({}) does not reconstruct its unit\n", i, atomics[i].name);
    } catch (const std::exception& e) {
      std::cerr << fmt::format("error: sample {} ({}): {}\n", i, atomics[i].name, e.what());
    }
  }
  write_text(out, gen::to_jsonl(samples));
  std::cout << fmt::format("{} sample(s) written to {}; {} reconstruct their unit\n", samples.size(), out, sound);
  return sound == samples.size() ? kOk : kFailed;
}

std::string summary_of(const eval::Evaluation& ev) {
  std::string out = fmt::format("Score_top {:.6f} ({} weights)\n", ev.root.score(), ev.weights_source);
  std::function<void(const eval::ScoreTree&, int)> line = [&](const eval::ScoreTree& t, int depth) {
    out += fmt::format("{:{}}{:<24} A={:.6f} P={:.6f}{}{}\n", "", depth * 2, t.name, t.A, t.P,
                       t.final ? fmt::format(" final={:.6f}", *t.final) : "", t.missing ? " missing" : "");
    for (const auto& c : t.children) line(c, depth + 1);
  };
  line(ev.root, 0);
  if (ev.n_assumed_zero) {
    std::vector<std::string> units;
    std::function<void(const eval::ScoreTree&)> walk = [&](const eval::ScoreTree& t) {
      if (t.n_assumed_zero && !t.missing) units.push_back(t.name);
      for (const auto& c : t.children) walk(c);
    };
    walk(ev.root);
    out += fmt::format("n assumed 0 (no annotation): {}\n", fmt::join(units, ", "));
  }
  return out;
}

int cmd_evaluate(const Globals& g, const std::vector<std::string>& model_dirs, const std::string& reference_dir,
                 const std::optional<std::string>& annotations_file, const std::optional<std::string>& out,
                 const std::optional<std::string>& csv) {
  auto config = apply_globals(g);
  if (annotations_file && model_dirs.size() != 1)
    throw UsageError("--annotations applies to a single model set; put annotations.json in each set instead");
  auto reference = load_units_strict({reference_dir});
  std::vector<std::vector<eval::SourceFile>> sets;
  std::vector<eval::Annotations> notes;
  for (const auto& dir : model_dirs) {
    std::vector<eval::SourceFile> files;
    for (const auto& f : model_files({dir})) files.push_back({f.lexically_relative(dir).string(), read_text(f)});
    sets.push_back(std::move(files));
    std::optional<fs::path> note_path;
    if (annotations_file) {
      note_path = *annotations_file;
    } else if (fs::is_directory(dir) && fs::exists(fs::path(dir) / "annotations.json")) {
      note_path = fs::path(dir) / "annotations.json";
    }
    try {
      notes.push_back(note_path ? eval::annotations_from_json(read_text(*note_path)) : eval::Annotations{});
    } catch (const std::invalid_argument& e) {
      throw UsageError(fmt::format("{}: {}", note_path->string(), e.what()));
    }
  }
  auto results = eval::evaluate_batch(sets, reference, notes, config.evaluation);

  nlohmann::ordered_json report = nlohmann::ordered_json::array();
  std::string table;
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto j = nlohmann::ordered_json(eval::to_json(results[i]));
    j["set"] = model_dirs[i];
    report.push_back(j);
    auto rows = eval::to_csv(results[i]);
    std::istringstream lines(rows);
    std::string line;
    bool header = true;
    while (std::getline(lines, line)) {
      if (header) {
        if (table.empty()) table = "set," + line + "\n";
        header = false;
        continue;
      }
      table += model_dirs[i] + "," + line + "\n";
    }
  }
  auto json_text = (results.size() == 1 ? report[0] : report).dump(2) + "\n";
  if (out) write_text(*out, json_text);
  if (csv) write_text(*csv, table);
  if (g.json && !out) {
    std::cout << json_text;
  } else {
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results.size() > 1) std::cout << "== " << model_dirs[i] << "\n";
      std::cout << summary_of(results[i]);
    }
  }
  for (const auto& ev : results) print_diagnostics(ev.diagnostics);
  return kOk;
}

int cmd_report(const Globals& g, const std::vector<std::string>& inputs, const std::optional<std::string>& csv) {
  apply_globals(g);
  std::vector<nlohmann::json> evaluations;
  for (const auto& path : inputs) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError(fmt::format("{} is not JSON: {}", path, e.what()));
    }
    if (doc.is_array()) {
      for (auto& e : doc) evaluations.push_back(e);
    } else {
      evaluations.push_back(doc);
    }
  }
  if (evaluations.empty()) throw UsageError("no evaluation to report");
  // Columns: the top model's children, in order.
  std::vector<std::string> columns;
  for (const auto& c : evaluations.front().at("tree").at("children")) columns.push_back(c.at("name").get<std::string>());
  auto label = [](const nlohmann::json& e, std::size_t i) {
    return e.contains("set") ? e["set"].get<std::string>() : fmt::format("set {}", i + 1);
  };

  std::string md = "| set |";
  std::string sep = "|---|";
  std::string table = "set";
  for (const auto& c : columns) {
    md += " " + c + " |";
    sep += "---|";
    table += "," + c;
  }
  md += " Score_top |\n" + sep + "---|\n";
  table += ",score_top\n";
  double total = 0;
  for (std::size_t i = 0; i < evaluations.size(); ++i) {
    const auto& e = evaluations[i];
    std::map<std::string, double> a;
    for (const auto& c : e.at("tree").at("children")) {
      double score = c.contains("final") ? c["final"].get<double>() : c.at("A").get<double>();
      a[c.at("name").get<std::string>()] = score;
    }
    md += "| " + label(e, i) + " |";
    table += label(e, i);
    for (const auto& c : columns) {
      auto v = a.count(c) ? fmt::format("{:.4f}", a[c]) : std::string("-");
      md += " " + v + " |";
      table += "," + v;
    }
    double top = e.at("score_top").get<double>();
    total += top;
    md += fmt::format(" {:.4f} |\n", top);
    table += fmt::format(",{:.6f}\n", top);
  }
  if (evaluations.size() > 1)
    md += fmt::format("\nmean Score_top over {} set(s): {:.4f}\n", evaluations.size(), total / evaluations.size());
  if (csv) write_text(*csv, table);
  std::cout << (g.json ? nlohmann::json(evaluations).dump(2) + "\n" : md);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document-to-simulation-model toolchain: parse, simulate, generate and score model sets", "xgen"};
  app.set_version_flag("--version", std::string(gen::kVersion));
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for sampling, generation limits and simulation");
  app.add_flag("--json", g.json, "Machine-readable output");
  app.add_option("--backend", g.backend, "Generator: reference:DIR, replay:DIR or http:URL[#model]");
  app.add_option("--port-convention", g.port_convention, "dataflow or paper-literal")
      ->check(CLI::IsMember({"dataflow", "paper-literal"}));
  app.fallthrough();

  std::function<int()> run;

  auto* check = app.add_subcommand("check", "Parse and link model files; exit 1 on any error");
  std::vector<std::string> check_paths;
  std::optional<std::string> check_top;
  check->add_option("paths", check_paths, "Files or directories")->required();
  check->add_option("--top", check_top, "Top-level couple");
  check->callback([&] { run = [&] { return cmd_check(g, check_paths, check_top); }; });

  auto* simulate = app.add_subcommand("simulate", "Simulate a model set and print its trace");
  std::vector<std::string> sim_paths;
  std::optional<std::string> sim_top, sim_integrator, sim_out;
  std::optional<double> sim_end, sim_step;
  simulate->add_option("paths", sim_paths, "Files or directories")->required();
  simulate->add_option("--top", sim_top, "Top-level couple");
  simulate->add_option("--end", sim_end, "End time");
  simulate->add_option("--step", sim_step, "Continuous step");
  simulate->add_option("--integrator", sim_integrator, "euler or rk4");
  simulate->add_option("--out", sim_out, "Trace file (TSV, or JSON with --json)");
  simulate->callback([&] {
    run = [&] { return cmd_simulate(g, sim_paths, sim_top, sim_end, sim_step, sim_integrator, sim_out); };
  });

  auto* extract = app.add_subcommand("extract", "Tag a design document and print its composition and corpora");
  std::string extract_doc;
  std::optional<std::string> extract_edits, extract_out;
  extract->add_option("document", extract_doc, "Design document")->required()->check(CLI::ExistingFile);
  extract->add_option("--edits", extract_edits, "Composition edits (JSON list)")->check(CLI::ExistingFile);
  extract->add_option("--out", extract_out, "Output JSON file");
  extract->callback([&] { run = [&] { return cmd_extract(g, extract_doc, extract_edits, extract_out); }; });

  auto* pipeline = app.add_subcommand("pipeline", "Generate a model set from a design document");
  std::string pipe_doc, pipe_out;
  std::optional<std::string> pipe_edits, pipe_record;
  std::vector<std::string> pipe_library;
  pipeline->add_option("document", pipe_doc, "Design document")->required()->check(CLI::ExistingFile);
  pipeline->add_option("--edits", pipe_edits, "Composition edits (JSON list)")->check(CLI::ExistingFile);
  pipeline->add_option("--library", pipe_library, "Few-shot example units (files or directories)");
  pipeline->add_option("--out", pipe_out, "Output directory")->required();
  pipeline->add_option("--record", pipe_record, "Store every exchange for later replay");
  pipeline->callback(
      [&] { run = [&] { return cmd_pipeline(g, pipe_doc, pipe_edits, pipe_library, pipe_out, pipe_record); }; });

  auto* dataset = app.add_subcommand("dataset", "Build masked completion samples from atomic units");
  std::vector<std::string> data_paths;
  std::string data_out;
  std::optional<std::string> data_pool;
  dataset->add_option("paths", data_paths, "Files or directories")->required();
  dataset->add_option("--out", data_out, "JSON lines output")->required();
  dataset->add_option("--instructions", data_pool, "Instruction pool, one per line")->check(CLI::ExistingFile);
  dataset->callback([&] { run = [&] { return cmd_dataset(g, data_paths, data_out, data_pool); }; });

  auto* evaluate = app.add_subcommand("evaluate", "Score generated model sets against a reference set");
  std::vector<std::string> eval_dirs;
  std::string eval_reference;
  std::optional<std::string> eval_notes, eval_out, eval_csv;
  evaluate->add_option("models", eval_dirs, "Generated model set directories")->required();
  evaluate->add_option("--reference", eval_reference, "Reference model set")->required();
  evaluate->add_option("--annotations", eval_notes, "Logic-error annotations {unit: {n, notes}}")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", eval_out, "Score tree JSON");
  evaluate->add_option("--csv", eval_csv, "Flat table, one row per unit");
  evaluate->callback(
      [&] { run = [&] { return cmd_evaluate(g, eval_dirs, eval_reference, eval_notes, eval_out, eval_csv); }; });

  auto* report = app.add_subcommand("report", "Tabulate evaluation JSON files");
  std::vector<std::string> report_inputs;
  std::optional<std::string> report_csv;
  report->add_option("evaluations", report_inputs, "Evaluation JSON files")->required()->check(CLI::ExistingFile);
  report->add_option("--csv", report_csv, "CSV output");
  report->callback([&] { run = [&] { return cmd_report(g, report_inputs, report_csv); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    return run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const doc::NoRelations& e) {
    std::cerr << "error: NoRelations: " << e.what() << "\n";
    return kFailed;
  } catch (const model::ParseError& e) {
    std::cerr << model::format_diagnostic(e.diagnostic()) << "\n";
    return kFailed;
  } catch (const eval::NoModels& e) {
    std::cerr << "error: NoModels: " << e.what() << "\n";
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
}
