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

// Fuzzy formal contexts (L-contexts), the sufficiency operators between
// L^O and L^P, and construction of one context per internal XML node.

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fqx/error.hpp"
#include "fqx/fuzzy.hpp"
#include "fqx/weighting.hpp"
#include "fqx/xml.hpp"

namespace fqx {

/// K = (L, O, P, R): objects x attributes with degrees in [0,1]. The truth
/// scale is the finite set of degrees used when enumerating concepts.
class LContext {
 public:
  LContext() : LContext(Labels{}, Labels{}, {}) {}

  LContext(Labels objects, Labels attributes, std::vector<double> degrees,
           std::optional<std::vector<double>> scale = std::nullopt, Labels descriptions = {})
      : LContext(make_labels(std::move(objects)), make_labels(std::move(attributes)), std::move(degrees),
                 std::move(scale), std::move(descriptions)) {}

  LContext(LabelsPtr objects, LabelsPtr attributes, std::vector<double> degrees,
           std::optional<std::vector<double>> scale = std::nullopt, Labels descriptions = {})
      : objects_(std::move(objects)),
        attributes_(std::move(attributes)),
        degrees_(std::move(degrees)),
        descriptions_(std::move(descriptions)) {
    check_unique(*objects_, "object");
    check_unique(*attributes_, "attribute");
    if (degrees_.size() != objects_->size() * attributes_->size())
      throw Error(ErrorKind::domain, "degree matrix is " + std::to_string(degrees_.size()) + " cells, expected " +
                                         std::to_string(objects_->size()) + "x" +
                                         std::to_string(attributes_->size()));
    for (double d : degrees_)
      if (!is_degree(d)) throw Error(ErrorKind::range, "context degree " + std::to_string(d) + " outside [0,1]");
    if (!descriptions_.empty() && descriptions_.size() != attributes_->size())
      throw Error(ErrorKind::domain, "attribute descriptions do not match attribute count");
    if (scale) {
      scale_ = std::move(*scale);
      if (!std::is_sorted(scale_.begin(), scale_.end()) ||
          std::adjacent_find(scale_.begin(), scale_.end()) != scale_.end())
        throw Error(ErrorKind::domain, "truth scale must be strictly ascending");
      if (scale_.empty() || scale_.front() != 0.0 || scale_.back() != 1.0)
        throw Error(ErrorKind::domain, "truth scale must contain 0 and 1");
      for (double d : scale_)
        if (!is_degree(d)) throw Error(ErrorKind::range, "scale degree outside [0,1]");
    } else {
      std::set<double> s(degrees_.begin(), degrees_.end());
      s.insert(0.0);
      s.insert(1.0);
      scale_.assign(s.begin(), s.end());
    }
  }

  std::size_t object_count() const noexcept { return objects_->size(); }
  std::size_t attribute_count() const noexcept { return attributes_->size(); }
  const LabelsPtr& objects() const noexcept { return objects_; }
  const LabelsPtr& attributes() const noexcept { return attributes_; }
  const std::vector<double>& scale() const noexcept { return scale_; }
  /// Optional human text per attribute (e.g. the leaf value behind `E3`).
  const Labels& descriptions() const noexcept { return descriptions_; }
  std::span<const double> degrees() const noexcept { return degrees_; }

  double operator()(std::size_t object, std::size_t attribute) const {
    return degrees_[object * attributes_->size() + attribute];
  }

  std::span<const double> row(std::size_t object) const {
    return std::span<const double>(degrees_).subspan(object * attributes_->size(), attributes_->size());
  }

  std::optional<std::size_t> object_index(std::string_view label) const { return find(*objects_, label); }
  std::optional<std::size_t> attribute_index(std::string_view label) const { return find(*attributes_, label); }

  /// A copy with one more object row appended. The truth scale is recomputed.
  LContext with_object(const std::string& label, std::span<const double> row_degrees) const {
    if (row_degrees.size() != attribute_count())
      throw Error(ErrorKind::domain, "new object row has the wrong width");
    Labels objs = *objects_;
    objs.push_back(label);
    std::vector<double> d = degrees_;
    d.insert(d.end(), row_degrees.begin(), row_degrees.end());
    return LContext(make_labels(std::move(objs)), attributes_, std::move(d), std::nullopt, descriptions_);
  }

  friend bool operator==(const LContext& a, const LContext& b) {
    return *a.objects_ == *b.objects_ && *a.attributes_ == *b.attributes_ && a.degrees_ == b.degrees_ &&
           a.scale_ == b.scale_ && a.descriptions_ == b.descriptions_;
  }

 private:
  static void check_unique(const Labels& labels, const char* what) {
    std::set<std::string_view> seen;
    for (const auto& l : labels)
      if (!seen.insert(l).second) throw Error(ErrorKind::domain, std::string("duplicate ") + what + " label '" + l + "'");
  }

  static std::optional<std::size_t> find(const Labels& labels, std::string_view label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels.begin());
  }

  LabelsPtr objects_;
  LabelsPtr attributes_;
  std::vector<double> degrees_;
  std::vector<double> scale_;
  Labels descriptions_;
};

/// X^(y) = inf_x (X(x) -> R(x,y)).
inline FuzzySet sufficiency_up(const FuzzySet& objects, const LContext& ctx, Implication imp = Implication::goedel) {
  if (!same_universe(objects.universe(), ctx.objects()))
    throw Error(ErrorKind::domain, "object set is not over the context's objects");
  std::vector<double> out(ctx.attribute_count(), 1.0);
  for (std::size_t x = 0; x < ctx.object_count(); ++x) {
    double a = objects[x];
    if (a == 0.0) continue;
    auto r = ctx.row(x);
    for (std::size_t y = 0; y < out.size(); ++y) out[y] = std::min(out[y], implies(imp, a, r[y]));
  }
  return FuzzySet(ctx.attributes(), std::move(out));
}

/// Y^(x) = inf_y (Y(y) -> R(x,y)).
inline FuzzySet sufficiency_down(const FuzzySet& attributes, const LContext& ctx,
                                 Implication imp = Implication::goedel) {
  if (!same_universe(attributes.universe(), ctx.attributes()))
    throw Error(ErrorKind::domain, "attribute set is not over the context's attributes");
  std::vector<double> out(ctx.object_count(), 1.0);
  for (std::size_t x = 0; x < out.size(); ++x) {
    auto r = ctx.row(x);
    double m = 1.0;
    for (std::size_t y = 0; y < r.size() && m > 0.0; ++y)
      if (attributes[y] > 0.0) m = std::min(m, implies(imp, attributes[y], r[y]));
    out[x] = m;
  }
  return FuzzySet(ctx.objects(), std::move(out));
}

/// Intent closure Y -> Y^^.
inline FuzzySet closure(const FuzzySet& attributes, const LContext& ctx, Implication imp = Implication::goedel) {
  return sufficiency_up(sufficiency_down(attributes, ctx, imp), ctx, imp);
}

/// Extent closure X -> X^^.
inline FuzzySet extent_closure(const FuzzySet& objects, const LContext& ctx, Implication imp = Implication::goedel) {
  return sufficiency_down(sufficiency_up(objects, ctx, imp), ctx, imp);
}

// ---------------------------------------------------------------------------
// Contexts from a document

/// One L-context per internal node, together with where it came from.
struct OriginContext {
  NodeId origin{};
  std::string origin_path;
  std::size_t seq = 0;  // 1-based, bottom-up document order
  LContext context;
};

/// Shared inputs for building every L-context of one document. Rows of all
/// contexts are the same: the labels of the text-bearing ("field") elements,
/// e.g. `level`, `title`, `author0`, `author1`.
class ContextBuilder {
 public:
  ContextBuilder(const DocumentTree& tree, const LevelSets& levels, const DocStats& stats)
      : tree_(tree), levels_(levels), stats_(stats) {
    collect_fields();
    for (std::size_t i = 0; i < stats_.vocabulary.size(); ++i) leaf_labels_.push_back("E" + std::to_string(i + 1));
  }

  const Labels& rows() const noexcept { return rows_; }
  const Labels& leaf_labels() const noexcept { return leaf_labels_; }
  const std::vector<std::string>& leaf_terms() const noexcept { return stats_.vocabulary; }

  std::string row_label(NodeId field) const { return row_of_.at(field); }

  /// Nodes that receive a context: every element with element children, in
  /// bottom-up document order; a document made of a single text-bearing root
  /// gets one context for the root.
  std::vector<NodeId> context_parents() const {
    std::vector<NodeId> out;
    for (NodeId id : tree_.post_order())
      if (tree_[id].is_element() && levels_.level(id) >= 2) out.push_back(id);
    if (out.empty() && tree_.size() > 0) out.push_back(tree_.root());
    return out;
  }

  LContext build(NodeId parent) const {
    const auto& p = tree_.node(parent);
    if (p.is_text()) throw Error(ErrorKind::wrong_kind, "cannot build a context for a text node");

    if (levels_.level(parent) == 1) {
      // Text-bearing parent: a single row for itself over the leaf terms.
      std::vector<double> d;
      for (const auto& term : stats_.vocabulary) d.push_back(node_weight(term, parent, tree_, stats_).value());
      return LContext({row_label(parent)}, leaf_labels_, std::move(d), std::nullopt, stats_.vocabulary);
    }

    std::vector<NodeId> fields, structural;
    for (NodeId c : p.children) {
      if (tree_[c].is_text()) continue;
      (levels_.level(c) == 1 ? fields : structural).push_back(c);
    }

    Labels attrs;
    Labels notes;
    if (!fields.empty()) {
      attrs = leaf_labels_;
      notes = stats_.vocabulary;
    }
    for (NodeId c : structural) {
      attrs.push_back(tree_.step_label(c));
      notes.push_back(tree_.path(c));
    }

    std::vector<double> d(rows_.size() * attrs.size(), 0.0);
    std::map<std::string, std::size_t> row_index;
    for (std::size_t r = 0; r < rows_.size(); ++r) row_index[rows_[r]] = r;

    for (NodeId f : fields) {
      std::size_t r = row_index.at(row_label(f));
      for (std::size_t v = 0; v < stats_.vocabulary.size(); ++v) {
        double w = node_weight(stats_.vocabulary[v], f, tree_, stats_).value();
        d[r * attrs.size() + v] = s_norm(stats_.config.s_norm, d[r * attrs.size() + v], w);
      }
    }
    std::size_t first_structural = fields.empty() ? 0 : leaf_labels_.size();
    for (std::size_t k = 0; k < structural.size(); ++k) {
      std::size_t col = first_structural + k;
      for (NodeId f : fields_in(structural[k])) {
        std::size_t r = row_index.at(row_label(f));
        d[r * attrs.size() + col] =
            s_norm(stats_.config.s_norm, d[r * attrs.size() + col], subtree_weight(f, tree_, stats_).value());
      }
    }
    return LContext(rows_, std::move(attrs), std::move(d), std::nullopt, std::move(notes));
  }

  std::vector<OriginContext> build_all() const {
    std::vector<OriginContext> out;
    for (NodeId id : context_parents())
      out.push_back(OriginContext{id, tree_.path(id), out.size() + 1, build(id)});
    return out;
  }

 private:
  std::vector<NodeId> fields_in(NodeId root) const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
      NodeId cur = stack.back();
      stack.pop_back();
      if (tree_[cur].is_text()) continue;
      if (levels_.level(cur) == 1) {
        out.push_back(cur);
        continue;
      }
      for (NodeId c : tree_[cur].children) stack.push_back(c);
    }
    return out;
  }

  // Row labels: a tag that ever repeats under one parent gets its ordinal as
  // suffix everywhere (author0, author1); row order merges every parent's
  // child order.
  void collect_fields() {
    if (levels_.depth() < 2) return;
    std::set<std::string> repeated;
    std::map<NodeId, std::vector<NodeId>> by_parent;
    for (NodeId f : levels_[1]) {
      const auto& n = tree_[f];
      if (n.ordinal > 0) repeated.insert(n.label);
      by_parent[n.parent ? *n.parent : f].push_back(f);
    }
    for (NodeId f : levels_[1]) {
      const auto& n = tree_[f];
      row_of_[f] = repeated.contains(n.label) ? n.label + std::to_string(n.ordinal) : n.label;
    }
    // Parents in document order, each with its fields in document order.
    auto position = [&](const std::string& label) -> std::optional<std::size_t> {
      auto it = std::find(rows_.begin(), rows_.end(), label);
      if (it == rows_.end()) return std::nullopt;
      return static_cast<std::size_t>(it - rows_.begin());
    };
    for (const auto& [parent, fields] : by_parent) {
      std::optional<std::size_t> prev;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto& label = row_of_[fields[i]];
        if (auto known = position(label)) {
          prev = known;
          continue;
        }
        // Unseen: right after the predecessor, else before the next known
        // sibling label, else at the end.
        std::size_t at = rows_.size();
        if (prev) {
          at = *prev + 1;
        } else {
          for (std::size_t k = i + 1; k < fields.size(); ++k)
            if (auto next = position(row_of_[fields[k]])) {
              at = *next;
              break;
            }
        }
        rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(at), label);
        prev = at;
      }
    }
  }

  const DocumentTree& tree_;
  const LevelSets& levels_;
  const DocStats& stats_;
  Labels rows_;
  std::map<NodeId, std::string> row_of_;
  Labels leaf_labels_;
};

inline LContext build_level_context(NodeId parent, const DocumentTree& tree, const LevelSets& levels,
                                    const DocStats& stats) {
  return ContextBuilder(tree, levels, stats).build(parent);
}

// ---------------------------------------------------------------------------
// Serialization

/// `{objects, attributes, degrees (row-major arrays), scale[, descriptions]}`.
inline nlohmann::ordered_json to_json(const LContext& ctx) {
  nlohmann::ordered_json j;
  j["objects"] = *ctx.objects();
  j["attributes"] = *ctx.attributes();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t x = 0; x < ctx.object_count(); ++x) {
    auto r = ctx.row(x);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["degrees"] = std::move(rows);
  j["scale"] = ctx.scale();
  if (!ctx.descriptions().empty()) j["descriptions"] = ctx.descriptions();
  return j;
}

template <typename Json>
LContext context_from_json(const Json& j) {
  try {
    Labels objects = j.at("objects").template get<Labels>();
    Labels attributes = j.at("attributes").template get<Labels>();
    std::vector<double> degrees;
    const auto& rows = j.at("degrees");
    if (rows.size() != objects.size()) throw Error(ErrorKind::domain, "degree rows do not match objects");
    for (const auto& r : rows) {
      if (r.size() != attributes.size()) throw Error(ErrorKind::domain, "degree row has the wrong width");
      for (const auto& v : r) degrees.push_back(v.template get<double>());
    }
    std::optional<std::vector<double>> scale;
    if (j.contains("scale")) scale = j.at("scale").template get<std::vector<double>>();
    Labels notes;
    if (j.contains("descriptions")) notes = j.at("descriptions").template get<Labels>();
    return LContext(std::move(objects), std::move(attributes), std::move(degrees), std::move(scale),
                    std::move(notes));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::domain, std::string("malformed context JSON: ") + e.what());
  }
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cur;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(cur));
      cur.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cur.empty()) {
        row.push_back(std::move(cur));
        rows.push_back(std::move(row));
      }
      row.clear();
      cur.clear();
      any = false;
    } else {
      cur += c;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorKind::parse, "unterminated quoted CSV field");
  if (any || !cur.empty()) {
    row.push_back(std::move(cur));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace detail

/// Header row = attributes (first cell is a corner label), first column = objects.
inline LContext context_from_csv(std::string_view text) {
  auto rows = detail::parse_csv(text);
  if (rows.empty()) throw Error(ErrorKind::empty_input, "CSV context has no header");
  Labels attrs(rows.front().begin() + 1, rows.front().end());
  Labels objs;
  std::vector<double> degrees;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != attrs.size() + 1)
      throw Error(ErrorKind::parse, "CSV row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                                        " fields, expected " + std::to_string(attrs.size() + 1));
    objs.push_back(row.front());
    for (std::size_t c = 1; c < row.size(); ++c) {
      try {
        std::size_t used = 0;
        double v = std::stod(row[c], &used);
        if (used != row[c].size()) throw std::invalid_argument("trailing characters");
        degrees.push_back(v);
      } catch (const std::exception&) {
        throw Error(ErrorKind::parse, "CSV cell '" + row[c] + "' at row " + std::to_string(r + 1) + " is not a number");
      }
    }
  }
  return LContext(std::move(objs), std::move(attrs), std::move(degrees));
}

/// Fixed four-decimal rendering; byte-stable for a given context.
inline std::string context_to_csv(const LContext& ctx, std::string_view corner = "R") {
  std::string out = detail::csv_field(std::string(corner));
  for (const auto& a : *ctx.attributes()) out += "," + detail::csv_field(a);
  out += "\n";
  for (std::size_t x = 0; x < ctx.object_count(); ++x) {
    out += detail::csv_field((*ctx.objects())[x]);
    for (double v : ctx.row(x)) out += "," + detail::fixed4(v);
    out += "\n";
  }
  return out;
}

}  // namespace fqx
