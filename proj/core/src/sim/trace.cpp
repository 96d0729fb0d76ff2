#include "xgen/sim/trace.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "xgen/model/printer.hpp"

namespace xgen::sim {

namespace {

using Key = std::pair<std::string, std::string>;

std::map<Key, std::vector<const PortEvent*>> group(const SimulationTrace& trace) {
  std::map<Key, std::vector<const PortEvent*>> out;
  for (const auto& e : trace.events) out[{e.path, e.port}].push_back(&e);
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) out += (out.empty() ? "" : ", ") + item;
  return out;
}

bool values_match(const Value& a, const Value& b, double tol) {
  if (is_numeric(a) && is_numeric(b)) {
    double x = std::get<double>(a), y = std::get<double>(b);
    if (x == y) return true;  // also covers equal infinities
    return std::fabs(x - y) <= tol;
  }
  return a == b;
}

}  // namespace

std::string to_tsv(const SimulationTrace& trace) {
  std::string out;
  for (const auto& e : trace.events)
    out += fmt::format("{}\t{}\t{}\t{}\n", model::format_number(e.time), e.path, e.port,
                       format_value(e.value));
  return out;
}

SimulationTrace trace_from_tsv(std::string_view text) {
  SimulationTrace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
      auto tab = line.find('\t', start);
      if (tab == std::string::npos)
        throw std::runtime_error(fmt::format("trace line {}: expected 4 tab-separated fields", lineno));
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fields.push_back(line.substr(start));
    auto time = parse_value(fields[0]);
    if (!is_numeric(time))
      throw std::runtime_error(fmt::format("trace line {}: bad time '{}'", lineno, fields[0]));
    trace.events.push_back({std::get<double>(time), fields[1], fields[2], parse_value(fields[3])});
  }
  return trace;
}

std::string to_json(const SimulationTrace& trace) {
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const auto& e : trace.events) {
    nlohmann::ordered_json item;
    item["time"] = e.time;
    item["path"] = e.path;
    item["port"] = e.port;
    std::visit([&](const auto& v) { item["value"] = v; }, e.value);
    events.push_back(std::move(item));
  }
  nlohmann::ordered_json doc;
  doc["events"] = std::move(events);
  return doc.dump(2) + "\n";
}

SimulationTrace trace_from_json(std::string_view text) {
  auto doc = nlohmann::json::parse(text);
  SimulationTrace trace;
  for (const auto& item : doc.at("events")) {
    PortEvent e;
    e.time = item.at("time").get<double>();
    e.path = item.at("path").get<std::string>();
    e.port = item.at("port").get<std::string>();
    const auto& v = item.at("value");
    if (v.is_boolean())
      e.value = v.get<bool>();
    else if (v.is_number())
      e.value = v.get<double>();
    else
      e.value = v.get<std::string>();
    trace.events.push_back(std::move(e));
  }
  return trace;
}

bool TraceDiff::all_match() const {
  for (const auto& p : ports)
    if (!p.match) return false;
  return true;
}

const PortVerdict* TraceDiff::find(std::string_view path, std::string_view port) const {
  for (const auto& p : ports)
    if (p.path == path && p.port == port) return &p;
  return nullptr;
}

PortSetMismatch::PortSetMismatch(std::vector<std::string> missing, std::vector<std::string> extra)
    : std::runtime_error(fmt::format("PortSetMismatch: missing [{}], extra [{}]", join(missing),
                                     join(extra))),
      missing_(std::move(missing)),
      extra_(std::move(extra)) {}

TraceDiff compare_traces(const SimulationTrace& actual, const SimulationTrace& reference, double tol) {
  auto got = group(actual);
  auto want = group(reference);
  std::vector<std::string> missing, extra;
  for (const auto& [key, _] : want)
    if (!got.count(key)) missing.push_back(key.first + "." + key.second);
  for (const auto& [key, _] : got)
    if (!want.count(key)) extra.push_back(key.first + "." + key.second);
  if (!missing.empty() || !extra.empty()) throw PortSetMismatch(std::move(missing), std::move(extra));

  TraceDiff diff;
  for (const auto& [key, ref_events] : want) {
    const auto& act_events = got.at(key);
    PortVerdict verdict{key.first, key.second, true, act_events.size(), ref_events.size(), 0, {}};
    std::size_t common = std::min(act_events.size(), ref_events.size());
    for (std::size_t i = 0; i < common && verdict.match; ++i) {
      if (act_events[i]->time != ref_events[i]->time) {
        verdict.match = false;
        verdict.first_mismatch = i;
        verdict.reason = fmt::format("event {} at time {} vs {}", i,
                                     model::format_number(act_events[i]->time),
                                     model::format_number(ref_events[i]->time));
      } else if (!values_match(act_events[i]->value, ref_events[i]->value, tol)) {
        verdict.match = false;
        verdict.first_mismatch = i;
        verdict.reason = fmt::format("event {} value {} vs {}", i, format_value(act_events[i]->value),
                                     format_value(ref_events[i]->value));
      }
    }
    if (verdict.match && act_events.size() != ref_events.size()) {
      verdict.match = false;
      verdict.first_mismatch = common;
      verdict.reason = fmt::format("event count {} vs {}", act_events.size(), ref_events.size());
    }
    diff.ports.push_back(std::move(verdict));
  }
  return diff;
}

}  // namespace xgen::sim
