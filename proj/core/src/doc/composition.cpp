#include "xgen/doc/composition.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "xgen/model/names.hpp"

namespace xgen::doc {

namespace {

bool same_name(std::string_view a, std::string_view b) {
  return model::normalize_name(a) == model::normalize_name(b);
}

ComponentNode node_from_json(const nlohmann::json& j) {
  ComponentNode node;
  node.name = j.at("name").get<std::string>();
  if (j.contains("provenance")) node.provenance = j.at("provenance").get<std::vector<std::size_t>>();
  node.manual = j.value("manual", false);
  if (j.contains("aliases")) node.aliases = j.at("aliases").get<std::vector<std::string>>();
  if (j.contains("children"))
    for (const auto& c : j.at("children")) node.children.push_back(node_from_json(c));
  return node;
}

template <typename Node>
Node* walk(Node* node, std::string_view path) {
  while (node && !path.empty()) {
    auto slash = path.find('/');
    auto head = path.substr(0, slash);
    path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash + 1);
    node = node->find_child(head);
  }
  return node;
}

// Spelling with whitespace runs collapsed, case kept.
std::string spelling(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

void sort_children(ComponentNode& node) {
  std::sort(node.children.begin(), node.children.end(), [](const ComponentNode& a, const ComponentNode& b) {
    auto ka = model::normalize_name(a.name), kb = model::normalize_name(b.name);
    return ka != kb ? ka < kb : a.name < b.name;
  });
}

std::pair<std::string_view, std::string_view> split_last(std::string_view path) {
  auto slash = path.rfind('/');
  if (slash == std::string_view::npos) return {{}, path};
  return {path.substr(0, slash), path.substr(slash + 1)};
}

}  // namespace

CycleDetected::CycleDetected(std::vector<std::string> path)
    : std::runtime_error(fmt::format("containment cycle: {}", fmt::join(path, " -> "))), path_(std::move(path)) {}

SystemComposition build_composition(const std::vector<TaggedSentence>& tagged,
                                    std::vector<model::Diagnostic>* diagnostics) {
  struct Info {
    std::set<std::string> spellings;
    std::set<std::size_t> provenance;
  };
  std::map<std::string, Info> nodes;
  std::map<std::string, std::set<std::string>> edges;
  std::set<std::string> has_parent;

  auto note = [&](const std::string& text, std::size_t id) -> std::string {
    auto key = model::normalize_name(text);
    if (key.empty()) return key;
    nodes[key].spellings.insert(spelling(text));
    nodes[key].provenance.insert(id);
    return key;
  };
  for (std::size_t id = 0; id < tagged.size(); ++id) {
    auto parents = tagged[id].spans(EntityTag::Parent);
    auto children = tagged[id].spans(EntityTag::Subsystem);
    if (parents.empty() || children.empty()) continue;
    auto parent = note(parents.front(), id);
    if (parent.empty()) continue;
    for (const auto& c : children) {
      auto child = note(c, id);
      if (child.empty()) continue;
      edges[parent].insert(child);
      has_parent.insert(child);
    }
  }
  if (nodes.empty()) throw NoRelations();

  auto display = [&](const std::string& key) { return *nodes.at(key).spellings.begin(); };

  // Depth-first colouring; a grey successor closes a cycle.
  std::map<std::string, int> colour;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& key) {
    colour[key] = 1;
    stack.push_back(key);
    for (const auto& next : edges[key]) {
      if (colour[next] == 1) {
        std::vector<std::string> path;
        auto from = std::find(stack.begin(), stack.end(), next);
        for (auto it = from; it != stack.end(); ++it) path.push_back(display(*it));
        path.push_back(display(next));
        throw CycleDetected(std::move(path));
      }
      if (colour[next] == 0) visit(next);
    }
    stack.pop_back();
    colour[key] = 2;
  };
  for (const auto& [key, info] : nodes)
    if (colour[key] == 0) visit(key);

  std::function<ComponentNode(const std::string&)> build = [&](const std::string& key) {
    const auto& info = nodes.at(key);
    ComponentNode node;
    node.name = *info.spellings.begin();
    node.aliases.assign(std::next(info.spellings.begin()), info.spellings.end());
    node.provenance.assign(info.provenance.begin(), info.provenance.end());
    for (const auto& child : edges[key]) node.children.push_back(build(child));
    return node;
  };

  std::vector<std::string> roots;
  for (const auto& [key, info] : nodes)
    if (!has_parent.count(key)) roots.push_back(key);

  SystemComposition out;
  if (roots.size() == 1) {
    out.root = build(roots.front());
    return out;
  }
  out.synthetic_root = true;
  out.root.name = "system";
  std::set<std::size_t> provenance;
  std::vector<std::string> names;
  for (const auto& r : roots) {
    out.root.children.push_back(build(r));
    provenance.insert(nodes.at(r).provenance.begin(), nodes.at(r).provenance.end());
    names.push_back(display(r));
  }
  out.root.provenance.assign(provenance.begin(), provenance.end());
  if (diagnostics) {
    model::Diagnostic d;
    d.severity = model::Severity::Warning;
    d.code = model::DiagCode::Info;
    d.message = fmt::format("{} top-level systems joined under a synthetic root: {}", roots.size(),
                            fmt::join(names, ", "));
    diagnostics->push_back(std::move(d));
  }
  return out;
}

std::vector<CompositionEdit> parse_edits(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw EditError(fmt::format("edit file is not JSON: {}", e.what()));
  }
  if (!doc.is_array()) throw EditError("edit file must be a JSON list");
  std::vector<CompositionEdit> out;
  for (const auto& j : doc) {
    CompositionEdit e;
    auto op = j.value("op", std::string());
    if (op == "add")
      e.op = EditOp::Add;
    else if (op == "remove")
      e.op = EditOp::Remove;
    else if (op == "rename")
      e.op = EditOp::Rename;
    else
      throw EditError(fmt::format("unknown edit op '{}'", op));
    e.path = j.value("path", std::string());
    e.name = j.value("name", std::string());
    if (e.op != EditOp::Remove && e.name.empty()) throw EditError(fmt::format("edit '{}' needs a name", op));
    out.push_back(std::move(e));
  }
  return out;
}

void apply_edits(SystemComposition& composition, const std::vector<CompositionEdit>& edits) {
  for (const auto& e : edits) {
    switch (e.op) {
      case EditOp::Add: {
        auto* parent = composition.find(e.path);
        if (!parent) throw EditError(fmt::format("add: no node at '{}'", e.path));
        if (parent->find_child(e.name)) throw EditError(fmt::format("add: '{}' already under '{}'", e.name, e.path));
        ComponentNode node;
        node.name = e.name;
        node.manual = true;
        parent->children.push_back(std::move(node));
        sort_children(*parent);
        break;
      }
      case EditOp::Remove: {
        auto [head, last] = split_last(e.path);
        auto* parent = e.path.empty() ? nullptr : composition.find(head);
        auto* node = parent ? parent->find_child(last) : nullptr;
        if (!node) throw EditError(fmt::format("remove: no node at '{}'", e.path));
        parent->children.erase(parent->children.begin() + (node - parent->children.data()));
        break;
      }
      case EditOp::Rename: {
        auto* node = composition.find(e.path);
        if (!node) throw EditError(fmt::format("rename: no node at '{}'", e.path));
        ComponentNode* parent = nullptr;
        if (!e.path.empty()) {
          parent = composition.find(split_last(e.path).first);
          auto* clash = parent->find_child(e.name);
          if (clash && clash != node) throw EditError(fmt::format("rename: '{}' already exists", e.name));
        }
        if (node->name != e.name && std::find(node->aliases.begin(), node->aliases.end(), node->name) ==
                                        node->aliases.end())
          node->aliases.push_back(node->name);
        node->aliases.erase(std::remove(node->aliases.begin(), node->aliases.end(), e.name), node->aliases.end());
        node->name = e.name;
        node->manual = true;
        if (parent) sort_children(*parent);
        break;
      }
    }
  }
}

Lexicon lexicon_of(const SystemComposition& composition) {
  Lexicon out;
  std::function<void(const ComponentNode&)> walk_node = [&](const ComponentNode& node) {
    LexiconEntry entry{node.name, {node.name}};
    entry.names.insert(entry.names.end(), node.aliases.begin(), node.aliases.end());
    out.push_back(std::move(entry));
    for (const auto& c : node.children) walk_node(c);
  };
  if (composition.synthetic_root) {
    for (const auto& c : composition.root.children) walk_node(c);
  } else {
    walk_node(composition.root);
  }
  return out;
}

const ComponentNode* ComponentNode::find_child(std::string_view wanted) const {
  for (const auto& c : children)
    if (same_name(c.name, wanted)) return &c;
  return nullptr;
}

ComponentNode* ComponentNode::find_child(std::string_view wanted) {
  for (auto& c : children)
    if (same_name(c.name, wanted)) return &c;
  return nullptr;
}

const ComponentNode* SystemComposition::find(std::string_view path) const { return walk(&root, path); }
ComponentNode* SystemComposition::find(std::string_view path) { return walk(&root, path); }

nlohmann::ordered_json to_json(const ComponentNode& node) {
  nlohmann::ordered_json j;
  j["name"] = node.name;
  j["provenance"] = node.provenance;
  if (node.manual) j["manual"] = true;
  if (!node.aliases.empty()) j["aliases"] = node.aliases;
  j["children"] = nlohmann::ordered_json::array();
  for (const auto& c : node.children) j["children"].push_back(to_json(c));
  return j;
}

nlohmann::ordered_json to_json(const SystemComposition& composition) {
  nlohmann::ordered_json j;
  j["synthetic_root"] = composition.synthetic_root;
  j["root"] = to_json(composition.root);
  return j;
}

SystemComposition composition_from_json(const nlohmann::json& doc) {
  SystemComposition c;
  c.synthetic_root = doc.value("synthetic_root", false);
  c.root = node_from_json(doc.at("root"));
  return c;
}

}  // namespace xgen::doc
