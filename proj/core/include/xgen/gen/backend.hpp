#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xgen/gen/prompt.hpp"
#include "xgen/model/ast.hpp"

namespace xgen::gen {

struct GenerationLimits {
  std::size_t max_tokens = 2048;
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

class BackendFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  /// Must be safe to call from several threads at once.
  virtual std::string complete(const PromptBundle& bundle, const GenerationLimits& limits) = 0;
  virtual std::string identity() const = 0;
};

struct HttpChatOptions {
  std::string url;                 // "http://host:port[/prefix]"
  std::string path = "/complete";
  std::string model;               // sent when non-empty
  std::string api_key;             // sent as a bearer token when non-empty
  std::chrono::milliseconds timeout{60000};
};

/// POST {messages:[{role,content}], max_tokens, temperature, seed[, model]}
/// and read {content}.
class HttpChatBackend : public GeneratorBackend {
 public:
  explicit HttpChatBackend(HttpChatOptions options) : options_(std::move(options)) {}
  std::string complete(const PromptBundle& bundle, const GenerationLimits& limits) override;
  std::string identity() const override;

 private:
  HttpChatOptions options_;
};

/// Answers from `<hash>.txt` files keyed by PromptBundle::hash(), plus any
/// in-memory entries. A missing entry is a BackendFailure naming the hash.
class ReplayBackend : public GeneratorBackend {
 public:
  explicit ReplayBackend(std::optional<std::filesystem::path> directory = std::nullopt)
      : directory_(std::move(directory)) {}
  void add(std::string hash, std::string response);
  std::string complete(const PromptBundle& bundle, const GenerationLimits& limits) override;
  std::string identity() const override;

 private:
  std::optional<std::filesystem::path> directory_;
  std::map<std::string, std::string> entries_;
};

/// Passes prompts to `inner` and stores every exchange as `<hash>.txt` (the
/// response) and `<hash>.prompt.txt` (the rendered prompt) in `directory`.
class RecordingBackend : public GeneratorBackend {
 public:
  RecordingBackend(GeneratorBackend& inner, std::filesystem::path directory);
  std::string complete(const PromptBundle& bundle, const GenerationLimits& limits) override;
  std::string identity() const override { return "record(" + inner_.identity() + ")"; }

 private:
  GeneratorBackend& inner_;
  std::filesystem::path directory_;
  std::mutex mutex_;
};

/// Answers from a known model set: the sections of the named unit for state
/// and equation prompts, the couple's connections for connection prompts and
/// the function unit for function prompts. Replies are wrapped in a fenced
/// block after a line of prose, as chat models tend to answer.
class ReferenceBackend : public GeneratorBackend {
 public:
  explicit ReferenceBackend(std::vector<model::ModelUnit> reference) : reference_(std::move(reference)) {}
  std::string complete(const PromptBundle& bundle, const GenerationLimits& limits) override;
  std::string identity() const override { return "reference"; }

 private:
  const model::ModelUnit* find(std::string_view name) const;
  std::vector<model::ModelUnit> reference_;
};

}  // namespace xgen::gen
