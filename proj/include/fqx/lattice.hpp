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

// Fuzzy concept lattices: enumeration of all concepts of an L-context over
// its truth scale, the order with its cover relation, meet/join, and nesting
// of several per-node contexts into one lattice.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fqx/context.hpp"
#include "fqx/error.hpp"
#include "fqx/fuzzy.hpp"

namespace fqx {

struct FuzzyConcept {
  std::size_t id = 0;
  FuzzySet extent;
  FuzzySet intent;
  std::uint64_t lattice_uid = 0;
};

enum class Order { less, greater, equal, incomparable };

constexpr std::string_view to_string(Order o) noexcept {
  switch (o) {
    case Order::less: return "less";
    case Order::greater: return "greater";
    case Order::equal: return "equal";
    case Order::incomparable: return "incomparable";
  }
  return "incomparable";
}

namespace detail {

inline std::uint64_t next_lattice_uid() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

inline std::vector<double> close_intent(const LContext& ctx, Implication imp, std::vector<double> y) {
  auto c = closure(FuzzySet(ctx.attributes(), std::move(y)), ctx, imp);
  return {c.degrees().begin(), c.degrees().end()};
}

}  // namespace detail

/// All closed intents in lectic order (lexicographic, first attribute most
/// significant) via fuzzy NextClosure. Requires every closure of a
/// scale-valued set to be scale-valued, which holds for the Gödel residuum
/// whenever the scale contains all context degrees.
inline std::vector<std::vector<double>> next_closure_intents(const LContext& ctx, Implication imp) {
  const auto& scale = ctx.scale();
  const std::size_t n = ctx.attribute_count();
  std::vector<std::vector<double>> out;
  std::vector<double> current = detail::close_intent(ctx, imp, std::vector<double>(n, 0.0));
  out.push_back(current);
  for (;;) {
    bool advanced = false;
    for (std::size_t i = n; i-- > 0 && !advanced;) {
      for (double a : scale) {
        if (a <= current[i]) continue;
        std::vector<double> seed(current.begin(), current.begin() + static_cast<std::ptrdiff_t>(i));
        seed.push_back(a);
        seed.resize(n, 0.0);
        auto next = detail::close_intent(ctx, imp, std::move(seed));
        if (next[i] == a && std::equal(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(i), current.begin())) {
          current = std::move(next);
          out.push_back(current);
          advanced = true;
          break;
        }
      }
    }
    if (!advanced) break;
  }
  return out;
}

/// All distinct closures of scale-valued attribute sets, found by closing
/// upward one (attribute, degree) step at a time; returned in lectic order.
/// Works for any residuum, including ones whose closures leave the scale.
inline std::vector<std::vector<double>> closure_system_intents(const LContext& ctx, Implication imp) {
  const std::size_t n = ctx.attribute_count();
  std::set<std::vector<double>> seen;
  std::deque<std::vector<double>> work;
  auto first = detail::close_intent(ctx, imp, std::vector<double>(n, 0.0));
  seen.insert(first);
  work.push_back(std::move(first));
  while (!work.empty()) {
    auto cur = std::move(work.front());
    work.pop_front();
    for (std::size_t y = 0; y < n; ++y) {
      for (double a : ctx.scale()) {
        if (a <= cur[y]) continue;
        auto seed = cur;
        seed[y] = a;
        auto next = detail::close_intent(ctx, imp, std::move(seed));
        if (seen.insert(next).second) work.push_back(std::move(next));
      }
    }
  }
  return {seen.begin(), seen.end()};
}

/// B(K): every concept of one context, its cover relation and extremes.
/// Immutable after construction; ids follow lectic order of intents.
class ConceptLattice {
 public:
  ConceptLattice() : ConceptLattice(LContext(), Implication::goedel, {std::vector<double>{}}) {}

  ConceptLattice(LContext ctx, Implication imp, const std::vector<std::vector<double>>& intents,
                 std::string origin = {}, std::size_t seq = 0)
      : context_(std::move(ctx)), implication_(imp), origin_(std::move(origin)), seq_(seq),
        uid_(detail::next_lattice_uid()) {
    if (intents.empty()) throw Error(ErrorKind::domain, "a lattice needs at least one concept");
    for (const auto& y : intents) {
      FuzzySet intent(context_.attributes(), y);
      FuzzySet extent = sufficiency_down(intent, context_, imp);
      std::size_t id = concepts_.size();
      if (!by_intent_.emplace(y, id).second) throw Error(ErrorKind::domain, "duplicate intent in concept list");
      concepts_.push_back(FuzzyConcept{id, std::move(extent), std::move(intent), uid_});
    }
    compute_covers();
  }

  const LContext& context() const noexcept { return context_; }
  Implication implication() const noexcept { return implication_; }
  const std::string& origin() const noexcept { return origin_; }
  std::size_t seq() const noexcept { return seq_; }
  std::uint64_t uid() const noexcept { return uid_; }

  std::size_t size() const noexcept { return concepts_.size(); }
  const std::vector<FuzzyConcept>& concepts() const noexcept { return concepts_; }
  const FuzzyConcept& concept_at(std::size_t id) const {
    if (id >= concepts_.size()) throw Error(ErrorKind::domain, "concept id " + std::to_string(id) + " out of range");
    return concepts_[id];
  }

  std::size_t top() const noexcept { return top_; }
  std::size_t bottom() const noexcept { return bottom_; }
  /// (sub-id, super-id) pairs of the cover relation, sorted.
  const std::vector<std::pair<std::size_t, std::size_t>>& covers() const noexcept { return covers_; }
  const std::vector<std::size_t>& upper_covers(std::size_t id) const { return upper_.at(id); }
  const std::vector<std::size_t>& lower_covers(std::size_t id) const { return lower_.at(id); }

  std::optional<std::size_t> find_intent(std::span<const double> intent) const {
    auto it = by_intent_.find(std::vector<double>(intent.begin(), intent.end()));
    if (it == by_intent_.end()) return std::nullopt;
    return it->second;
  }

  /// c1 <= c2 iff extent(c1) is pointwise included in extent(c2).
  Order compare(const FuzzyConcept& c1, const FuzzyConcept& c2) const {
    if (c1.lattice_uid != uid_ || c2.lattice_uid != uid_)
      throw Error(ErrorKind::domain, "concepts belong to a different lattice");
    bool le = c1.extent.subset_of(c2.extent);
    bool ge = c2.extent.subset_of(c1.extent);
    if (le && ge) return Order::equal;
    if (le) return Order::less;
    if (ge) return Order::greater;
    return Order::incomparable;
  }
  Order compare(std::size_t a, std::size_t b) const { return compare(concept_at(a), concept_at(b)); }

  /// Greatest lower bound: intent = closure of the union of intents.
  const FuzzyConcept& meet(const FuzzyConcept& c1, const FuzzyConcept& c2) const {
    check_member(c1, c2);
    auto intent = closure(c1.intent.unite(c2.intent), context_, implication_);
    return lookup(intent.degrees(), "meet");
  }

  /// Least upper bound: extent = closure of the union of extents.
  const FuzzyConcept& join(const FuzzyConcept& c1, const FuzzyConcept& c2) const {
    check_member(c1, c2);
    auto extent = extent_closure(c1.extent.unite(c2.extent), context_, implication_);
    auto intent = sufficiency_up(extent, context_, implication_);
    return lookup(intent.degrees(), "join");
  }

 private:
  void check_member(const FuzzyConcept& a, const FuzzyConcept& b) const {
    if (a.lattice_uid != uid_ || b.lattice_uid != uid_)
      throw Error(ErrorKind::domain, "concepts belong to a different lattice");
  }

  const FuzzyConcept& lookup(std::span<const double> intent, const char* what) const {
    auto id = find_intent(intent);
    if (!id) throw Error(ErrorKind::domain, std::string(what) + " is not an enumerated concept");
    return concepts_[*id];
  }

  // Upper covers of c are the minimal elements of {d : c < d}. Visiting
  // candidates by increasing extent mass, d is minimal unless it lies above a
  // cover already found.
  void compute_covers() {
    const std::size_t n = concepts_.size();
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) mass[i] = concepts_[i].extent.cardinality();
    std::vector<std::size_t> by_mass(n);
    std::iota(by_mass.begin(), by_mass.end(), 0);
    std::stable_sort(by_mass.begin(), by_mass.end(), [&](std::size_t a, std::size_t b) { return mass[a] < mass[b]; });

    upper_.assign(n, {});
    lower_.assign(n, {});
    for (std::size_t c = 0; c < n; ++c) {
      const auto& ext = concepts_[c].extent;
      for (std::size_t d : by_mass) {
        if (d == c || !ext.subset_of(concepts_[d].extent) || concepts_[d].extent == ext) continue;
        bool above_cover = std::any_of(upper_[c].begin(), upper_[c].end(),
                                       [&](std::size_t u) { return concepts_[u].extent.subset_of(concepts_[d].extent); });
        if (!above_cover) upper_[c].push_back(d);
      }
      std::sort(upper_[c].begin(), upper_[c].end());
      for (std::size_t u : upper_[c]) {
        lower_[u].push_back(c);
        covers_.emplace_back(c, u);
      }
    }
    for (auto& l : lower_) std::sort(l.begin(), l.end());
    std::sort(covers_.begin(), covers_.end());

    std::vector<std::size_t> tops, bottoms;
    for (std::size_t i = 0; i < n; ++i) {
      if (upper_[i].empty()) tops.push_back(i);
      if (lower_[i].empty()) bottoms.push_back(i);
    }
    if (tops.size() != 1 || bottoms.size() != 1)
      throw Error(ErrorKind::domain, "concept set does not form a lattice (no unique top/bottom)");
    top_ = tops.front();
    bottom_ = bottoms.front();
  }

  LContext context_;
  Implication implication_;
  std::string origin_;
  std::size_t seq_ = 0;
  std::uint64_t uid_ = 0;
  std::vector<FuzzyConcept> concepts_;
  std::map<std::vector<double>, std::size_t> by_intent_;
  std::vector<std::pair<std::size_t, std::size_t>> covers_;
  std::vector<std::vector<std::size_t>> upper_, lower_;
  std::size_t top_ = 0, bottom_ = 0;
};

namespace detail {

inline bool scale_covers_degrees(const LContext& ctx) {
  const auto& s = ctx.scale();
  for (double d : ctx.degrees())
    if (!std::binary_search(s.begin(), s.end(), d)) return false;
  return true;
}

}  // namespace detail

/// Every concept whose intent is the closure of a truth-scale-valued set.
inline ConceptLattice enumerate_concepts(const LContext& ctx, Implication imp = Implication::goedel,
                                         std::string origin = {}, std::size_t seq = 0) {
  auto intents = (imp == Implication::goedel && detail::scale_covers_degrees(ctx)) ? next_closure_intents(ctx, imp)
                                                                                   : closure_system_intents(ctx, imp);
  return ConceptLattice(ctx, imp, intents, std::move(origin), seq);
}

// ---------------------------------------------------------------------------
// Nesting

struct NestMember {
  std::string origin;
  std::size_t begin = 0;  // first attribute column in the combined context
  std::size_t end = 0;    // one past the last

  friend bool operator==(const NestMember&, const NestMember&) = default;
};

struct NestedLattice {
  LContext combined_context;
  ConceptLattice lattice;
  std::vector<NestMember> members;
};

/// Column-wise concatenation over a shared object list. Attribute labels
/// that occur in more than one member are prefixed with `origin/`.
inline std::pair<LContext, std::vector<NestMember>> concatenate_contexts(
    const std::vector<std::pair<std::string, const LContext*>>& parts) {
  if (parts.empty()) throw Error(ErrorKind::incompatible_contexts, "nothing to nest");
  const LContext& first = *parts.front().second;
  std::map<std::string, std::size_t> occurrences;
  for (const auto& [origin, ctx] : parts) {
    if (*ctx->objects() != *first.objects())
      throw Error(ErrorKind::incompatible_contexts, "context of '" + origin + "' has a different object list");
    for (const auto& a : *ctx->attributes()) ++occurrences[a];
  }
  bool any_notes = std::any_of(parts.begin(), parts.end(), [](const auto& p) { return !p.second->descriptions().empty(); });

  Labels attrs, notes;
  std::vector<NestMember> members;
  for (const auto& [origin, ctx] : parts) {
    NestMember m{origin, attrs.size(), 0};
    for (std::size_t a = 0; a < ctx->attribute_count(); ++a) {
      const auto& label = (*ctx->attributes())[a];
      attrs.push_back(occurrences[label] > 1 ? origin + "/" + label : label);
      if (any_notes) notes.push_back(ctx->descriptions().empty() ? label : ctx->descriptions()[a]);
    }
    m.end = attrs.size();
    members.push_back(std::move(m));
  }
  std::vector<double> d;
  d.reserve(first.object_count() * attrs.size());
  for (std::size_t x = 0; x < first.object_count(); ++x)
    for (const auto& [origin, ctx] : parts) {
      auto r = ctx->row(x);
      d.insert(d.end(), r.begin(), r.end());
    }
  return {LContext(*first.objects(), std::move(attrs), std::move(d), std::nullopt, std::move(notes)),
          std::move(members)};
}

/// Combines per-node lattices (in document order) into one lattice over the
/// concatenated context.
inline NestedLattice nest(std::span<const ConceptLattice> lattices) {
  if (lattices.empty()) throw Error(ErrorKind::incompatible_contexts, "nothing to nest");
  std::vector<std::pair<std::string, const LContext*>> parts;
  for (const auto& l : lattices) {
    if (l.implication() != lattices.front().implication())
      throw Error(ErrorKind::incompatible_contexts, "member lattices use different implications");
    parts.emplace_back(l.origin(), &l.context());
  }
  auto [combined, members] = concatenate_contexts(parts);
  auto lattice = enumerate_concepts(combined, lattices.front().implication(), "nested", 0);
  return NestedLattice{std::move(combined), std::move(lattice), std::move(members)};
}

// ---------------------------------------------------------------------------
// Export

namespace detail {

inline double round4(double v) { return std::nearbyint(v * 1e4) / 1e4; }

inline nlohmann::ordered_json degree_map(const FuzzySet& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] > 0.0) j[(*s.universe())[i]] = round4(s[i]);
  return j;
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

/// Human-facing lattice JSON: concepts with sparse degree maps at four
/// decimals, cover edges and (for nested lattices) member column ranges. The
/// full-precision context is embedded so the file can be re-imported.
inline nlohmann::ordered_json lattice_to_json(const ConceptLattice& lat, const std::vector<NestMember>& members = {}) {
  nlohmann::ordered_json j;
  j["origin"] = lat.origin();
  j["seq"] = lat.seq();
  j["implication"] = std::string(to_string(lat.implication()));
  j["context"] = to_json(lat.context());
  if (!members.empty()) {
    nlohmann::ordered_json ms = nlohmann::ordered_json::array();
    for (const auto& m : members) ms.push_back({{"origin", m.origin}, {"begin", m.begin}, {"end", m.end}});
    j["members"] = std::move(ms);
  }
  j["top"] = lat.top();
  j["bottom"] = lat.bottom();
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const auto& c : lat.concepts()) {
    nlohmann::ordered_json cj;
    cj["id"] = c.id;
    cj["extent"] = detail::degree_map(c.extent);
    cj["intent"] = detail::degree_map(c.intent);
    cs.push_back(std::move(cj));
  }
  j["concepts"] = std::move(cs);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& [sub, sup] : lat.covers()) edges.push_back({sub, sup});
  j["covers"] = std::move(edges);
  return j;
}

struct ImportedLattice {
  ConceptLattice lattice;
  std::vector<NestMember> members;
};

/// Inverse of lattice_to_json. The concept set is re-derived from the
/// embedded context and must agree with the file.
inline ImportedLattice lattice_from_json(const nlohmann::ordered_json& j) {
  try {
    auto imp = parse_implication(j.at("implication").get<std::string>());
    if (!imp) throw Error(ErrorKind::domain, "unknown implication");
    LContext ctx = context_from_json(j.at("context"));
    auto lat = enumerate_concepts(ctx, *imp, j.at("origin").get<std::string>(), j.at("seq").get<std::size_t>());
    std::vector<NestMember> members;
    if (j.contains("members"))
      for (const auto& m : j.at("members"))
        members.push_back({m.at("origin").get<std::string>(), m.at("begin").get<std::size_t>(),
                           m.at("end").get<std::size_t>()});
    auto again = lattice_to_json(lat, members);
    if (again["concepts"] != j.at("concepts") || again["covers"] != j.at("covers"))
      throw Error(ErrorKind::corrupt_index, "lattice file does not match its embedded context");
    return {std::move(lat), std::move(members)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::corrupt_index, std::string("malformed lattice JSON: ") + e.what());
  }
}

/// Graphviz rendering: one box per concept labelled with its intent support,
/// edges along the cover relation (sub -> super, drawn bottom-up). For nested
/// lattices a node's class lists the members whose columns it carries;
/// nodes spanning several members are drawn with a double border.
inline std::string lattice_to_dot(const ConceptLattice& lat, const std::vector<NestMember>& members = {}) {
  static constexpr const char* palette[] = {"#cfe2f3", "#d9ead3", "#fff2cc", "#f4cccc", "#ead1dc", "#d0e0e3"};
  std::string out = "digraph lattice {\n  rankdir=BT;\n  node [shape=box, style=filled, fillcolor=\"#ffffff\"];\n";
  const auto& attrs = *lat.context().attributes();
  for (const auto& c : lat.concepts()) {
    std::string label = "#" + std::to_string(c.id);
    std::vector<std::size_t> carried;
    for (std::size_t a = 0; a < c.intent.size(); ++a) {
      if (c.intent[a] <= 0.0) continue;
      label += "\\n" + detail::dot_escape(attrs[a]) + ":" + detail::fixed4(c.intent[a]);
      for (std::size_t m = 0; m < members.size(); ++m)
        if (a >= members[m].begin && a < members[m].end &&
            std::find(carried.begin(), carried.end(), m) == carried.end())
          carried.push_back(m);
    }
    std::sort(carried.begin(), carried.end());
    out += "  c" + std::to_string(c.id) + " [label=\"" + label + "\"";
    if (!carried.empty()) {
      std::string cls;
      for (std::size_t m : carried) cls += (cls.empty() ? "m" : " m") + std::to_string(m);
      out += ", class=\"" + cls + "\", fillcolor=\"" + palette[carried.front() % std::size(palette)] + "\"";
      if (carried.size() > 1) out += ", peripheries=2";
    }
    out += "];\n";
  }
  for (const auto& [sub, sup] : lat.covers())
    out += "  c" + std::to_string(sub) + " -> c" + std::to_string(sup) + ";\n";
  out += "}\n";
  return out;
}

}  // namespace fqx
