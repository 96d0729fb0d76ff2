#include "xgen/gen/backend.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "xgen/model/names.hpp"
#include "xgen/model/printer.hpp"
#include "xgen/util/http.hpp"

namespace xgen::gen {

namespace {

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BackendFailure(fmt::format("cannot write {}", path.string()));
  out << text;
}

std::string fenced(std::string_view lead, std::string_view code) {
  return fmt::format("{}\n```\n{}```\n", lead, code);
}

}  // namespace

std::string HttpChatBackend::complete(const PromptBundle& bundle, const GenerationLimits& limits) {
  nlohmann::json request;
  request["messages"] = nlohmann::json::array();
  for (const auto& m : bundle.messages)
    request["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  request["max_tokens"] = limits.max_tokens;
  request["temperature"] = limits.temperature;
  request["seed"] = limits.seed;
  if (!options_.model.empty()) request["model"] = options_.model;
  std::map<std::string, std::string> headers;
  if (!options_.api_key.empty()) headers["Authorization"] = "Bearer " + options_.api_key;
  try {
    auto reply = util::post_json(options_.url, options_.path, request, options_.timeout, headers);
    if (!reply.contains("content") || !reply["content"].is_string())
      throw BackendFailure(fmt::format("reply from {} has no string 'content'", options_.url));
    return reply["content"].get<std::string>();
  } catch (const util::HttpError& e) {
    throw BackendFailure(e.what());
  }
}

std::string HttpChatBackend::identity() const {
  return options_.model.empty() ? "http:" + options_.url : fmt::format("http:{}#{}", options_.url, options_.model);
}

void ReplayBackend::add(std::string hash, std::string response) { entries_[std::move(hash)] = std::move(response); }

std::string ReplayBackend::complete(const PromptBundle& bundle, const GenerationLimits&) {
  auto hash = bundle.hash();
  if (auto it = entries_.find(hash); it != entries_.end()) return it->second;
  if (directory_) {
    std::ifstream in(*directory_ / (hash + ".txt"), std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
  }
  throw BackendFailure(fmt::format("no replay entry {} for {} prompt '{}'", hash, bundle.purpose, bundle.subject));
}

std::string ReplayBackend::identity() const {
  return directory_ ? "replay:" + directory_->filename().string() : std::string("replay");
}

RecordingBackend::RecordingBackend(GeneratorBackend& inner, std::filesystem::path directory)
    : inner_(inner), directory_(std::move(directory)) {
  std::filesystem::create_directories(directory_);
}

std::string RecordingBackend::complete(const PromptBundle& bundle, const GenerationLimits& limits) {
  auto response = inner_.complete(bundle, limits);
  auto hash = bundle.hash();
  std::lock_guard lock(mutex_);
  write_file(directory_ / (hash + ".txt"), response);
  write_file(directory_ / (hash + ".prompt.txt"), bundle.render());
  return response;
}

const model::ModelUnit* ReferenceBackend::find(std::string_view name) const {
  auto key = model::normalize_name(name);
  for (const auto& u : reference_)
    if (model::normalize_name(u.name) == key) return &u;
  return nullptr;
}

std::string ReferenceBackend::complete(const PromptBundle& bundle, const GenerationLimits&) {
  const auto* unit = find(bundle.subject);
  if (!unit) throw BackendFailure(fmt::format("reference has no unit for '{}'", bundle.subject));
  if (bundle.purpose == "state" || bundle.purpose == "equation") {
    auto behaviour = unit->kind == model::UnitKind::Discrete ? "state" : "equation";
    auto code = model::print_section(*unit, "parameter") + model::print_section(*unit, "value") +
                model::print_section(*unit, behaviour);
    return fenced(fmt::format("Here are the sections for {}.", unit->name), code);
  }
  if (bundle.purpose == "connections") {
    std::string lines;
    for (const auto& c : unit->connections) lines += fmt::format("connect({}, {})\n", c.from.str(), c.to.str());
    return fenced("The subsystems are connected as follows.", lines);
  }
  if (bundle.purpose == "function") return fenced("Here is the function.", model::print_unit(*unit));
  throw BackendFailure(fmt::format("reference backend cannot answer '{}' prompts", bundle.purpose));
}

}  // namespace xgen::gen
