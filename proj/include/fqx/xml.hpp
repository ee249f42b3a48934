// Copyright 2026 The fqx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Typed XML document tree (element nodes NE, text nodes NT) and the per-level
// node sets obtained by ascending traversal.

#pragma once

#include <expat.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fqx/error.hpp"

namespace fqx {

enum class NodeId : std::uint32_t {};

constexpr std::size_t index(NodeId id) noexcept { return static_cast<std::size_t>(id); }
constexpr NodeId node_id(std::size_t i) noexcept { return static_cast<NodeId>(i); }

enum class NodeKind { element, text };

/// Tag of the synthetic element wrapping a bare text run in mixed content.
inline constexpr std::string_view kTextWrapperTag = "#text";

struct XmlNode {
  NodeId id{};
  NodeKind kind = NodeKind::element;
  /// Tag name for elements, raw (entity-decoded) content for text.
  std::string label;
  /// Index among siblings sharing the same tag (text nodes: among text siblings).
  std::size_t ordinal = 0;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;

  bool is_text() const noexcept { return kind == NodeKind::text; }
  bool is_element() const noexcept { return kind == NodeKind::element; }
};

/// Immutable once built. Node ids are dense and assigned in document
/// (pre-)order, so a parent always has a smaller id than its descendants.
class DocumentTree {
 public:
  DocumentTree() = default;
  DocumentTree(std::vector<XmlNode> nodes, NodeId root) : nodes_(std::move(nodes)), root_(root) {}

  NodeId root() const noexcept { return root_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const XmlNode& node(NodeId id) const { return nodes_.at(index(id)); }
  const XmlNode& operator[](NodeId id) const { return nodes_[index(id)]; }
  const std::vector<XmlNode>& nodes() const noexcept { return nodes_; }

  /// `tag[ordinal]` for elements; used as a column label for structural nodes.
  std::string step_label(NodeId id) const {
    const auto& n = node(id);
    if (n.is_text()) return "text()[" + std::to_string(n.ordinal) + "]";
    return n.label + "[" + std::to_string(n.ordinal) + "]";
  }

  /// Absolute path, e.g. `/bib/book[1]/author[0]`; the root step carries no index.
  std::string path(NodeId id) const {
    std::vector<NodeId> chain;
    for (std::optional<NodeId> cur = id; cur; cur = node(*cur).parent) chain.push_back(*cur);
    std::string out;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      out += '/';
      out += (*it == root_) ? node(*it).label : step_label(*it);
    }
    return out;
  }

  /// Resolves an absolute path produced by path().
  std::optional<NodeId> find_path(std::string_view p) const {
    for (const auto& n : nodes_)
      if (n.is_element() && path(n.id) == p) return n.id;
    return std::nullopt;
  }

  /// All text content under `id`, in document order.
  std::vector<NodeId> text_descendants(NodeId id) const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
      NodeId cur = stack.back();
      stack.pop_back();
      const auto& n = node(cur);
      if (n.is_text()) out.push_back(cur);
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  /// Children before parents, siblings in document order.
  std::vector<NodeId> post_order() const {
    std::vector<NodeId> out;
    if (nodes_.empty()) return out;
    std::vector<std::pair<NodeId, bool>> stack{{root_, false}};
    while (!stack.empty()) {
      auto [cur, expanded] = stack.back();
      stack.pop_back();
      if (expanded) {
        out.push_back(cur);
        continue;
      }
      stack.emplace_back(cur, true);
      const auto& ch = node(cur).children;
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, false);
    }
    return out;
  }

 private:
  std::vector<XmlNode> nodes_;
  NodeId root_{};
};

namespace detail {

struct RawElement {
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attributes;
  // Either a text run or a nested element, in source order.
  struct Item {
    std::string text;
    std::unique_ptr<RawElement> element;
  };
  std::vector<Item> items;
};

struct SaxState {
  std::unique_ptr<RawElement> root;
  std::vector<RawElement*> stack;
  std::string pending;

  void flush() {
    if (pending.empty() || stack.empty()) {
      pending.clear();
      return;
    }
    stack.back()->items.push_back({std::move(pending), nullptr});
    pending.clear();
  }
};

inline void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* st = static_cast<SaxState*>(user);
  st->flush();
  auto el = std::make_unique<RawElement>();
  el->tag = name;
  for (std::size_t i = 0; attrs[i]; i += 2) el->attributes.emplace_back(attrs[i], attrs[i + 1]);
  RawElement* raw = el.get();
  if (st->stack.empty())
    st->root = std::move(el);
  else
    st->stack.back()->items.push_back({{}, std::move(el)});
  st->stack.push_back(raw);
}

inline void XMLCALL on_end(void* user, const XML_Char*) {
  auto* st = static_cast<SaxState*>(user);
  st->flush();
  st->stack.pop_back();
}

inline void XMLCALL on_text(void* user, const XML_Char* s, int len) {
  auto* st = static_cast<SaxState*>(user);
  if (!st->stack.empty()) st->pending.append(s, static_cast<std::size_t>(len));
}

inline bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

class TreeBuilder {
 public:
  std::vector<XmlNode> nodes;

  // Returns nullopt when the element carries no content at all.
  std::optional<NodeId> add(const RawElement& el, std::optional<NodeId> parent) {
    struct Child {
      bool text;
      std::string value;
      const RawElement* element;
    };
    std::vector<Child> children;
    for (const auto& [name, value] : el.attributes)
      if (!blank(value)) children.push_back({false, name + "\x1f" + value, nullptr});
    for (const auto& item : el.items) {
      if (item.element)
        children.push_back({false, {}, item.element.get()});
      else if (!blank(item.text))
        children.push_back({true, item.text, nullptr});
    }
    if (children.empty()) return std::nullopt;

    NodeId id = push(NodeKind::element, el.tag, parent);
    bool mixed = std::any_of(children.begin(), children.end(), [](const Child& c) { return c.text; }) &&
                 std::any_of(children.begin(), children.end(), [](const Child& c) { return !c.text; });
    for (const auto& c : children) {
      if (c.text) {
        if (mixed) {
          NodeId wrap = push(NodeKind::element, std::string(kTextWrapperTag), id);
          push(NodeKind::text, c.value, wrap);
        } else {
          push(NodeKind::text, c.value, id);
        }
      } else if (c.element) {
        add(*c.element, id);
      } else {
        // Flattened attribute: child element named after it with one text child.
        auto sep = c.value.find('\x1f');
        NodeId attr = push(NodeKind::element, c.value.substr(0, sep), id);
        push(NodeKind::text, c.value.substr(sep + 1), attr);
      }
    }
    return id;
  }


 private:
  NodeId push(NodeKind kind, std::string label, std::optional<NodeId> parent) {
    NodeId id = node_id(nodes.size());
    XmlNode n;
    n.id = id;
    n.kind = kind;
    n.label = std::move(label);
    n.parent = parent;
    nodes.push_back(std::move(n));
    if (parent) nodes[index(*parent)].children.push_back(id);
    return id;
  }
};

// Elements whose subtree held nothing but empty elements end up childless;
// drop them so every element keeps at least one child.
inline DocumentTree compact(std::vector<XmlNode> nodes, NodeId root) {
  std::vector<bool> keep(nodes.size(), false);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    auto& n = nodes[i];
    if (n.is_text()) {
      keep[i] = true;
      continue;
    }
    std::erase_if(n.children, [&](NodeId c) { return !keep[index(c)]; });
    keep[i] = !n.children.empty();
  }
  if (!keep[index(root)]) throw Error(ErrorKind::empty_input, "document has no text content");
  for (auto& n : nodes) {
    std::map<std::pair<NodeKind, std::string>, std::size_t> seen;
    for (NodeId c : n.children) {
      auto& child = nodes[index(c)];
      auto key = child.is_text() ? std::pair{NodeKind::text, std::string()}
                                 : std::pair{NodeKind::element, child.label};
      child.ordinal = seen[key]++;
    }
  }
  std::vector<std::size_t> remap(nodes.size(), 0);
  std::vector<XmlNode> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = out.size();
    out.push_back(std::move(nodes[i]));
  }
  for (auto& n : out) {
    n.id = node_id(remap[index(n.id)]);
    if (n.parent) n.parent = node_id(remap[index(*n.parent)]);
    for (auto& c : n.children) c = node_id(remap[index(c)]);
  }
  return DocumentTree(std::move(out), node_id(remap[index(root)]));
}

}  // namespace detail

/// Loads an XML document into a typed tree. Attributes become child elements
/// (tag = attribute name, one text child = value); comments, processing
/// instructions, whitespace-only text and empty elements are dropped; bare
/// text in mixed content is wrapped in a `#text` element.
inline DocumentTree parse_document(std::string_view source) {
  if (detail::blank(source)) throw Error(ErrorKind::empty_input, "document is empty");

  detail::SaxState state;
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw Error(ErrorKind::parse, "cannot allocate XML parser");
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), detail::on_start, detail::on_end);
  XML_SetCharacterDataHandler(parser.get(), detail::on_text);

  if (XML_Parse(parser.get(), source.data(), static_cast<int>(source.size()), 1) == XML_STATUS_ERROR) {
    throw ParseError(XML_ErrorString(XML_GetErrorCode(parser.get())),
                     static_cast<std::size_t>(XML_GetCurrentLineNumber(parser.get())),
                     static_cast<std::size_t>(XML_GetCurrentColumnNumber(parser.get())) + 1);
  }
  if (!state.root) throw Error(ErrorKind::empty_input, "document has no root element");

  detail::TreeBuilder builder;
  auto root = builder.add(*state.root, std::nullopt);
  if (!root) throw Error(ErrorKind::empty_input, "document has no text content");
  return detail::compact(std::move(builder.nodes), *root);
}

inline DocumentTree parse_document(std::istream& in) {
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_document(std::string_view(data));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Node sets by height: level 0 holds the text leaves, every element sits one
/// above its highest child, the last level is {root}.
struct LevelSets {
  std::vector<std::vector<NodeId>> levels;
  std::vector<std::size_t> level_of;  // indexed by node id

  std::size_t depth() const noexcept { return levels.size(); }
  const std::vector<NodeId>& operator[](std::size_t i) const { return levels.at(i); }
  std::size_t level(NodeId id) const { return level_of.at(index(id)); }
};

inline LevelSets extract_levels(const DocumentTree& tree) {
  LevelSets out;
  out.level_of.assign(tree.size(), 0);
  // Descendants have larger ids, so a reverse sweep sees children first.
  for (std::size_t i = tree.size(); i-- > 0;) {
    const auto& n = tree[node_id(i)];
    if (n.is_text()) continue;
    std::size_t top = 0;
    for (NodeId c : n.children) top = std::max(top, out.level_of[index(c)]);
    out.level_of[i] = top + 1;
  }
  if (tree.size() == 0) return out;
  out.levels.resize(out.level_of[index(tree.root())] + 1);
  for (std::size_t i = 0; i < tree.size(); ++i) out.levels[out.level_of[i]].push_back(node_id(i));
  return out;
}

inline const char* kind_code(NodeKind k) { return k == NodeKind::text ? "NT" : "NE"; }

/// Debug dump: `{"nodes": [{id, kind, label, ordinal, parent}], "levels": [[id...]...]}`.
inline nlohmann::ordered_json to_json(const DocumentTree& tree, const LevelSets& levels) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const auto& n : tree.nodes()) {
    nlohmann::ordered_json j;
    j["id"] = index(n.id);
    j["kind"] = kind_code(n.kind);
    j["label"] = n.label;
    j["ordinal"] = n.ordinal;
    j["parent"] = n.parent ? nlohmann::ordered_json(index(*n.parent)) : nlohmann::ordered_json(nullptr);
    nodes.push_back(std::move(j));
  }
  nlohmann::ordered_json lv = nlohmann::ordered_json::array();
  for (const auto& level : levels.levels) {
    nlohmann::ordered_json ids = nlohmann::ordered_json::array();
    for (NodeId id : level) ids.push_back(index(id));
    lv.push_back(std::move(ids));
  }
  nlohmann::ordered_json out;
  out["nodes"] = std::move(nodes);
  out["levels"] = std::move(lv);
  return out;
}

}  // namespace fqx
