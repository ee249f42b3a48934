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

// Fuzzy term weights for text nodes (tf x log(n_t / nf)) and their s-norm
// merge up the element tree.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fqx/error.hpp"
#include "fqx/fuzzy.hpp"
#include "fqx/xml.hpp"

namespace fqx {

/// What counts as one term of a text node.
enum class TermUnit {
  value,  // the whole normalized text value of the leaf
  token,  // each token
};

/// Which nodes n_t and nf are counted over.
enum class Population {
  records,     // parents of the text-bearing elements (the sibling records)
  text_nodes,  // every text node of the document
};

enum class Stemmer { none, s_stemmer };

struct WeightingConfig {
  double log_base = 10.0;
  SNorm s_norm = SNorm::max;
  bool clamp = true;
  TermUnit term_unit = TermUnit::value;
  Population population = Population::records;
  Stemmer stemmer = Stemmer::none;
  std::set<std::string> stopwords;
};

/// Lowercases ASCII, removes punctuation and splits on whitespace.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else if (c < 0x80 && std::ispunct(c)) {
      continue;
    } else {
      cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Harman's S-stemmer: plural suffix folding only.
inline std::string s_stem(std::string w) {
  auto ends = [&](std::string_view suf) {
    return w.size() >= suf.size() && std::string_view(w).substr(w.size() - suf.size()) == suf;
  };
  if (ends("ies") && !ends("eies") && !ends("aies")) {
    w.replace(w.size() - 3, 3, "y");
  } else if (ends("es") && !ends("aes") && !ends("ees") && !ends("oes")) {
    w.erase(w.size() - 1);
  } else if (ends("s") && !ends("us") && !ends("ss")) {
    w.erase(w.size() - 1);
  }
  return w;
}

/// Tokens after stop-word removal and optional stemming.
inline std::vector<std::string> analyze(std::string_view text, const WeightingConfig& cfg) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(text)) {
    if (cfg.stopwords.contains(tok)) continue;
    out.push_back(cfg.stemmer == Stemmer::s_stemmer ? s_stem(std::move(tok)) : std::move(tok));
  }
  return out;
}

/// Terms of one text node according to the configured term unit; repeated
/// tokens are kept so callers can count occurrences.
inline std::vector<std::string> node_terms(std::string_view text, const WeightingConfig& cfg) {
  auto toks = analyze(text, cfg);
  if (cfg.term_unit == TermUnit::token) return toks;
  if (toks.empty()) return {};
  std::string joined = toks.front();
  for (std::size_t i = 1; i < toks.size(); ++i) joined += ' ' + toks[i];
  return {std::move(joined)};
}

/// Membership degree in [0,1].
class NodeWeight {
 public:
  constexpr NodeWeight() = default;
  explicit NodeWeight(double v) : value_(v) {
    if (!is_degree(v)) throw Error(ErrorKind::range, "weight " + std::to_string(v) + " outside [0,1]");
  }
  constexpr double value() const noexcept { return value_; }
  friend constexpr auto operator<=>(NodeWeight, NodeWeight) = default;

 private:
  double value_ = 0.0;
};

/// Per-document statistics behind the weights. Immutable after build_stats.
struct DocStats {
  std::size_t n_t = 0;
  std::map<std::string, std::size_t> nf;
  std::map<std::pair<std::string, NodeId>, std::size_t> tf;  // text nodes only
  /// Distinct terms in order of first occurrence.
  std::vector<std::string> vocabulary;
  /// Distinct terms of each text node, first-occurrence order.
  std::map<NodeId, std::vector<std::string>> terms_of;
  double max_raw = 0.0;
  WeightingConfig config;

  std::size_t term_frequency(const std::string& term, NodeId node) const {
    auto it = tf.find({term, node});
    return it == tf.end() ? 0 : it->second;
  }
};

namespace detail {

inline double raw_weight(std::size_t tf, std::size_t n_t, std::size_t nf, double base) {
  return static_cast<double>(tf) * (std::log(static_cast<double>(n_t) / static_cast<double>(nf)) / std::log(base));
}

inline NodeId population_unit(const DocumentTree& tree, NodeId text, Population pop) {
  if (pop == Population::text_nodes) return text;
  NodeId field = *tree[text].parent;
  const auto& up = tree[field].parent;
  return up ? *up : field;
}

}  // namespace detail

inline DocStats build_stats(const DocumentTree& tree, const WeightingConfig& cfg = {}) {
  if (!(cfg.log_base > 0.0) || cfg.log_base == 1.0)
    throw Error(ErrorKind::config, "log_base must be positive and different from 1");
  DocStats st;
  st.config = cfg;
  std::set<NodeId> units;
  std::map<std::string, std::set<NodeId>> holders;
  std::set<std::string> known;
  for (const auto& n : tree.nodes()) {
    if (!n.is_text()) continue;
    NodeId unit = detail::population_unit(tree, n.id, cfg.population);
    units.insert(unit);
    auto& distinct = st.terms_of[n.id];
    for (auto& term : node_terms(n.label, cfg)) {
      if (st.tf[{term, n.id}]++ == 0) distinct.push_back(term);
      holders[term].insert(unit);
      if (known.insert(term).second) st.vocabulary.push_back(term);
    }
  }
  st.n_t = units.size();
  for (auto& [term, who] : holders) st.nf[term] = who.size();
  for (auto& [key, count] : st.tf)
    st.max_raw = std::max(st.max_raw, detail::raw_weight(count, st.n_t, st.nf[key.first], cfg.log_base));
  return st;
}

/// tf x log_base(n_t / nf), clamped to [0,1] (or scaled by the document
/// maximum when clamping is off).
inline NodeWeight term_weight(const std::string& term, NodeId node, const DocStats& stats) {
  auto it = stats.tf.find({term, node});
  if (it == stats.tf.end())
    throw Error(ErrorKind::missing_statistics,
                "no statistics for term '" + term + "' in node " + std::to_string(index(node)));
  auto nf = stats.nf.at(term);
  double w = detail::raw_weight(it->second, stats.n_t, nf, stats.config.log_base);
  if (stats.config.clamp) return NodeWeight(std::clamp(w, 0.0, 1.0));
  return NodeWeight(stats.max_raw > 0.0 ? std::clamp(w / stats.max_raw, 0.0, 1.0) : 0.0);
}

/// Weight of `term` at an element: s-norm over its children, text children
/// contributing their term weight and element children recursing.
inline NodeWeight node_weight(const std::string& term, NodeId element, const DocumentTree& tree,
                              const DocStats& stats) {
  const auto& n = tree.node(element);
  if (n.is_text()) throw Error(ErrorKind::wrong_kind, "node " + std::to_string(index(element)) + " is a text node");
  double acc = 0.0;
  for (NodeId c : n.children) {
    double w = 0.0;
    if (tree[c].is_text())
      w = stats.term_frequency(term, c) ? term_weight(term, c, stats).value() : 0.0;
    else
      w = node_weight(term, c, tree, stats).value();
    acc = s_norm(stats.config.s_norm, acc, w);
  }
  return NodeWeight(acc);
}

/// s-norm over every (term, text node) weight below `element`.
inline NodeWeight subtree_weight(NodeId element, const DocumentTree& tree, const DocStats& stats) {
  double acc = 0.0;
  for (NodeId t : tree.text_descendants(element)) {
    auto it = stats.terms_of.find(t);
    if (it == stats.terms_of.end()) continue;
    for (const auto& term : it->second) acc = s_norm(stats.config.s_norm, acc, term_weight(term, t, stats).value());
  }
  return NodeWeight(acc);
}

}  // namespace fqx
