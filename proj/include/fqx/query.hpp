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

// Flexible queries against a concept lattice. A query is a fuzzy set of
// wanted attributes; it is inserted as a virtual object, its concept is
// located by an upward search that prunes non-matching super-concepts, and
// objects met on the way to the top concept are ranked by how much of the
// query they share.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fqx/context.hpp"
#include "fqx/error.hpp"
#include "fqx/fuzzy.hpp"
#include "fqx/lattice.hpp"
#include "fqx/weighting.hpp"

namespace fqx {

struct Query {
  FuzzySet wanted;
  std::string label = "?query";

  /// Sum of wanted degrees; upper bound of any relevance score.
  double mass() const noexcept { return wanted.cardinality(); }
};

class UnknownAttributeError : public Error {
 public:
  UnknownAttributeError(const std::string& name, std::vector<std::string> suggestions)
      : Error(ErrorKind::unknown_attribute, message(name, suggestions)), suggestions_(std::move(suggestions)) {}

  const std::vector<std::string>& suggestions() const noexcept { return suggestions_; }

 private:
  static std::string message(const std::string& name, const std::vector<std::string>& s) {
    std::string m = "'" + name + "' does not name an attribute";
    if (!s.empty()) {
      m += "; did you mean";
      for (std::size_t i = 0; i < s.size(); ++i) m += (i ? ", " : " ") + s[i];
      m += "?";
    }
    return m;
  }

  std::vector<std::string> suggestions_;
};

namespace detail {

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string normalized(std::string_view s) {
  std::string out;
  for (const auto& t : tokenize(s)) out += (out.empty() ? "" : " ") + t;
  return out;
}

inline std::vector<std::string> near_matches(const LContext& ctx, std::string_view name) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  std::string lname = normalized(name);
  for (const auto& a : *ctx.attributes()) {
    std::string_view tail = a;
    if (auto slash = tail.rfind('/'); slash != std::string_view::npos) tail = tail.substr(slash + 1);
    std::size_t d = std::min(edit_distance(name, a), edit_distance(name, tail));
    bool contains = !lname.empty() && normalized(a).find(lname) != std::string::npos;
    if (d <= 2 || contains) scored.emplace_back(contains ? 0 : d, a);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && out.size() < 5; ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace detail

/// Columns named by `name`: the exact label; else every column whose
/// description (leaf text) matches after normalization; else every column
/// whose label ends in `/name` (nested contexts prefix duplicates with their
/// origin path).
inline std::vector<std::size_t> resolve_attribute(const LContext& ctx, std::string_view name) {
  if (auto i = ctx.attribute_index(name)) return {*i};
  std::vector<std::size_t> out;
  std::string norm = detail::normalized(name);
  if (!norm.empty() && !ctx.descriptions().empty())
    for (std::size_t a = 0; a < ctx.attribute_count(); ++a)
      if (detail::normalized(ctx.descriptions()[a]) == norm) out.push_back(a);
  if (!out.empty()) return out;
  std::string suffix = "/" + std::string(name);
  for (std::size_t a = 0; a < ctx.attribute_count(); ++a) {
    const auto& l = (*ctx.attributes())[a];
    if (l.size() > suffix.size() && l.compare(l.size() - suffix.size(), suffix.size(), suffix) == 0) out.push_back(a);
  }
  return out;
}

/// Parses `attribute[:degree]` items; bare names get degree 1.
inline Query parse_query(std::span<const std::string> items, const LContext& ctx) {
  if (items.empty()) throw Error(ErrorKind::domain, "a query needs at least one attribute");
  Query q{FuzzySet(ctx.attributes())};
  for (const auto& item : items) {
    std::string name = item;
    double degree = 1.0;
    if (auto colon = item.rfind(':'); colon != std::string::npos) {
      std::string_view tail = std::string_view(item).substr(colon + 1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), v);
      if (ec == std::errc() && ptr == tail.data() + tail.size() && !tail.empty()) {
        name = item.substr(0, colon);
        degree = v;
      }
    }
    if (!(degree > 0.0 && degree <= 1.0))
      throw Error(ErrorKind::range, "degree of '" + name + "' must lie in (0,1], got " + std::to_string(degree));
    auto cols = resolve_attribute(ctx, name);
    if (cols.empty()) throw UnknownAttributeError(name, detail::near_matches(ctx, name));
    for (std::size_t c : cols) q.wanted.set(c, std::max(q.wanted[c], degree));
  }
  while (ctx.object_index(q.label)) q.label += "'";
  return q;
}

inline Query parse_query(std::initializer_list<std::string> items, const LContext& ctx) {
  std::vector<std::string> v(items);
  return parse_query(std::span<const std::string>(v), ctx);
}

/// The base lattice extended by the query object. The base is untouched.
struct QueryOverlay {
  ConceptLattice lattice;
  std::size_t query_object = 0;
  std::size_t query_concept = 0;
};

inline QueryOverlay insert_query(const ConceptLattice& base, const Query& q) {
  const LContext& ctx = base.context();
  if (!same_universe(q.wanted.universe(), ctx.attributes()))
    throw Error(ErrorKind::domain, "query was parsed against a different context");
  if (q.wanted.empty()) throw Error(ErrorKind::domain, "query has no wanted attribute");
  LContext extended = ctx.with_object(q.label, q.wanted.degrees());
  auto lattice = enumerate_concepts(extended, base.implication(), base.origin(), base.seq());
  auto intent = closure(FuzzySet(extended.attributes(), {q.wanted.degrees().begin(), q.wanted.degrees().end()}),
                        extended, base.implication());
  auto id = lattice.find_intent(intent.degrees());
  if (!id) throw Error(ErrorKind::domain, "query concept missing from the overlay lattice");
  return QueryOverlay{std::move(lattice), ctx.object_count(), *id};
}

struct Localization {
  std::size_t concept_id = 0;
  std::size_t visited = 0;  // concepts whose intent was tested
  std::size_t pruned = 0;   // super-concepts rejected by the containment test
};

/// Upward search from the bottom concept. A concept whose intent does not
/// contain the query is dropped together with everything above it; the
/// answer is the containing concept none of whose super-concepts contains
/// the query.
inline Localization locate_query_concept(const ConceptLattice& lat, const FuzzySet& wanted) {
  auto contains = [&](std::size_t id) { return wanted.subset_of(lat.concept_at(id).intent); };
  Localization loc;
  std::set<std::size_t> tested, found;
  std::deque<std::size_t> queue{lat.bottom()};
  tested.insert(lat.bottom());
  ++loc.visited;
  if (!contains(lat.bottom())) throw Error(ErrorKind::domain, "no concept contains the query");
  while (!queue.empty()) {
    std::size_t c = queue.front();
    queue.pop_front();
    bool extended = false;
    for (std::size_t u : lat.upper_covers(c)) {
      bool fresh = tested.insert(u).second;
      if (fresh) ++loc.visited;
      if (!contains(u)) {
        if (fresh) ++loc.pruned;
        continue;
      }
      extended = true;
      if (fresh) queue.push_back(u);
    }
    if (!extended) found.insert(c);
  }
  if (found.size() != 1) throw Error(ErrorKind::domain, "query localization is not unique");
  loc.concept_id = *found.begin();
  return loc;
}

inline Localization locate_query_concept(const ConceptLattice& lat, std::size_t query_concept) {
  return locate_query_concept(lat, lat.concept_at(query_concept).intent);
}

struct RankedEntry {
  std::string object;
  double score = 0.0;
  std::size_t provenance = 0;  // concept where the object was first met

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

struct RankedResult {
  std::string query_label;
  FuzzySet wanted;
  std::size_t query_concept = 0;
  std::vector<RankedEntry> entries;
};

/// Sigma-count of min(wanted, row): the number of shared attributes in the
/// crisp case.
inline double relevance(const FuzzySet& wanted, std::span<const double> row) {
  double s = 0.0;
  for (std::size_t y = 0; y < row.size(); ++y) s += std::min(wanted[y], row[y]);
  return s;
}

struct RankOptions {
  std::size_t limit = 10;
  /// Also collect objects from sub-concepts of the query concept.
  bool widen_neighborhood = false;
};

/// Objects found in the extents of the query concept and all of its
/// super-concepts up to the top, scored by relevance; zero scores and the
/// virtual query object are dropped. Sorted by score, then label.
inline RankedResult rank_results(const QueryOverlay& overlay, const Query& q, const RankOptions& opts = {}) {
  const auto& lat = overlay.lattice;
  const auto& ctx = lat.context();
  std::map<std::size_t, std::size_t> provenance;  // object -> concept

  auto sweep = [&](bool upward) {
    std::deque<std::size_t> queue{overlay.query_concept};
    std::set<std::size_t> seen{overlay.query_concept};
    while (!queue.empty()) {
      std::size_t c = queue.front();
      queue.pop_front();
      const auto& ext = lat.concept_at(c).extent;
      for (std::size_t x = 0; x < ext.size(); ++x)
        if (x != overlay.query_object && ext[x] > 0.0) provenance.emplace(x, c);
      for (std::size_t n : upward ? lat.upper_covers(c) : lat.lower_covers(c))
        if (seen.insert(n).second) queue.push_back(n);
    }
  };
  sweep(true);
  if (opts.widen_neighborhood) sweep(false);

  RankedResult out{q.label, q.wanted, overlay.query_concept, {}};
  for (const auto& [x, concept_id] : provenance) {
    double s = relevance(q.wanted, ctx.row(x));
    if (s > 0.0) out.entries.push_back({(*ctx.objects())[x], s, concept_id});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.object < b.object;
  });
  if (out.entries.size() > opts.limit) out.entries.resize(opts.limit);
  return out;
}

/// Parse, overlay, localize and rank in one call.
inline RankedResult run_query(const ConceptLattice& base, std::span<const std::string> items,
                              const RankOptions& opts = {}) {
  Query q = parse_query(items, base.context());
  QueryOverlay overlay = insert_query(base, q);
  overlay.query_concept = locate_query_concept(overlay.lattice, q.wanted).concept_id;
  return rank_results(overlay, q, opts);
}

/// `{query: {label, wanted}, concept, results: [{object, score, provenance}]}`.
inline nlohmann::ordered_json to_json(const RankedResult& r) {
  nlohmann::ordered_json wanted = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < r.wanted.size(); ++i)
    if (r.wanted[i] > 0.0) wanted[(*r.wanted.universe())[i]] = detail::round4(r.wanted[i]);
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (const auto& e : r.entries)
    results.push_back({{"object", e.object}, {"score", detail::round4(e.score)}, {"provenance", e.provenance}});
  nlohmann::ordered_json j;
  j["query"] = {{"label", r.query_label}, {"wanted", std::move(wanted)}};
  j["concept"] = r.query_concept;
  j["results"] = std::move(results);
  return j;
}

inline std::string to_table(const RankedResult& r) {
  std::size_t width = 6;
  for (const auto& e : r.entries) width = std::max(width, e.object.size());
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size() + 2, ' '); };
  std::string out = "query concept: #" + std::to_string(r.query_concept) + "\n";
  out += "rank  " + pad("object") + "score   concept\n";
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    std::string rank = std::to_string(i + 1);
    out += rank + std::string(6 - std::min<std::size_t>(rank.size(), 5), ' ') + pad(r.entries[i].object) +
           detail::fixed4(r.entries[i].score) + "  #" + std::to_string(r.entries[i].provenance) + "\n";
  }
  if (r.entries.empty()) out += "(no matching objects)\n";
  return out;
}

}  // namespace fqx
