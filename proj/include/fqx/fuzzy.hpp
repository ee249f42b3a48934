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

// Truth-value primitives on L = [0,1]: residuated implications, s-norms and
// degree-valued sets over a labelled finite universe.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fqx/error.hpp"

namespace fqx {

enum class Implication { goedel, lukasiewicz, goguen };

enum class SNorm { max, probabilistic_sum, bounded_sum };

inline constexpr Implication kAllImplications[] = {Implication::goedel, Implication::lukasiewicz,
                                                   Implication::goguen};

constexpr std::string_view to_string(Implication imp) noexcept {
  switch (imp) {
    case Implication::goedel: return "goedel";
    case Implication::lukasiewicz: return "lukasiewicz";
    case Implication::goguen: return "goguen";
  }
  return "goedel";
}

constexpr std::string_view to_string(SNorm s) noexcept {
  switch (s) {
    case SNorm::max: return "max";
    case SNorm::probabilistic_sum: return "probabilistic_sum";
    case SNorm::bounded_sum: return "bounded_sum";
  }
  return "max";
}

inline std::optional<Implication> parse_implication(std::string_view name) {
  if (name == "goedel" || name == "godel" || name == "gödel") return Implication::goedel;
  if (name == "lukasiewicz" || name == "łukasiewicz") return Implication::lukasiewicz;
  if (name == "goguen" || name == "product") return Implication::goguen;
  return std::nullopt;
}

inline std::optional<SNorm> parse_snorm(std::string_view name) {
  if (name == "max") return SNorm::max;
  if (name == "probabilistic_sum" || name == "probsum") return SNorm::probabilistic_sum;
  if (name == "bounded_sum" || name == "lukasiewicz") return SNorm::bounded_sum;
  return std::nullopt;
}

/// The t-norm paired with each implication, evaluated in floating point.
/// Every variant is commutative, monotone and has 1 as neutral element.
inline double t_norm(Implication imp, double a, double c) noexcept {
  if (a == 1.0) return c;
  if (c == 1.0) return a;
  switch (imp) {
    case Implication::goedel: return std::min(a, c);
    case Implication::lukasiewicz: return std::max(0.0, std::min(a - (1.0 - c), c - (1.0 - a)));
    case Implication::goguen:
      // A product of positive degrees never underflows to zero.
      return a > 0.0 && c > 0.0 ? std::max(a * c, std::numeric_limits<double>::denorm_min()) : 0.0;
  }
  return std::min(a, c);
}

/// Residuum: the largest double c in [0,1] with t_norm(a, c) <= b. Taking
/// the adjoint of the rounded t-norm, rather than the textbook formula,
/// keeps the closure laws exact under rounding.
inline double implies(Implication imp, double a, double b) noexcept {
  if (a <= b) return 1.0;
  if (imp == Implication::goedel) return b;
  auto fits = [&](double c) { return t_norm(imp, a, c) <= b; };
  double guess = std::clamp(imp == Implication::lukasiewicz ? 1.0 - a + b : b / a, 0.0, 1.0);
  if (fits(guess) && !fits(std::nextafter(guess, 2.0))) return guess;
  // Non-negative doubles order like their bit patterns.
  std::uint64_t lo = 0, hi = std::bit_cast<std::uint64_t>(1.0);
  while (lo < hi) {
    std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (fits(std::bit_cast<double>(mid)))
      lo = mid;
    else
      hi = mid - 1;
  }
  return std::bit_cast<double>(lo);
}

inline double s_norm(SNorm s, double a, double b) noexcept {
  switch (s) {
    case SNorm::max: return std::max(a, b);
    case SNorm::probabilistic_sum: return std::min(1.0, a + b - a * b);
    case SNorm::bounded_sum: return std::min(1.0, a + b);
  }
  return std::max(a, b);
}

inline bool is_degree(double v) noexcept { return v >= 0.0 && v <= 1.0; }

using Labels = std::vector<std::string>;
using LabelsPtr = std::shared_ptr<const Labels>;

inline LabelsPtr make_labels(Labels labels) {
  return std::make_shared<const Labels>(std::move(labels));
}

inline bool same_universe(const LabelsPtr& a, const LabelsPtr& b) {
  return a == b || (a && b && *a == *b);
}

/// Degree-valued subset of a finite labelled universe. Storage is dense and
/// aligned with the universe's label order; absent elements have degree 0.
class FuzzySet {
 public:
  FuzzySet() : universe_(make_labels({})) {}

  explicit FuzzySet(LabelsPtr universe)
      : universe_(std::move(universe)), degrees_(universe_->size(), 0.0) {}

  FuzzySet(LabelsPtr universe, std::vector<double> degrees)
      : universe_(std::move(universe)), degrees_(std::move(degrees)) {
    if (degrees_.size() != universe_->size())
      throw Error(ErrorKind::domain, "fuzzy set size does not match its universe");
    for (double d : degrees_)
      if (!is_degree(d)) throw Error(ErrorKind::range, "degree " + std::to_string(d) + " outside [0,1]");
  }

  static FuzzySet filled(LabelsPtr universe, double degree) {
    std::vector<double> d(universe->size(), degree);
    return FuzzySet(std::move(universe), std::move(d));
  }

  const LabelsPtr& universe() const noexcept { return universe_; }
  std::size_t size() const noexcept { return degrees_.size(); }
  std::span<const double> degrees() const noexcept { return degrees_; }
  double operator[](std::size_t i) const { return degrees_[i]; }

  void set(std::size_t i, double degree) {
    if (!is_degree(degree))
      throw Error(ErrorKind::range, "degree " + std::to_string(degree) + " outside [0,1]");
    degrees_.at(i) = degree;
  }

  std::optional<std::size_t> index_of(std::string_view label) const {
    auto it = std::find(universe_->begin(), universe_->end(), label);
    if (it == universe_->end()) return std::nullopt;
    return static_cast<std::size_t>(it - universe_->begin());
  }

  double at(std::string_view label) const {
    auto i = index_of(label);
    if (!i) throw Error(ErrorKind::domain, "'" + std::string(label) + "' is not in the universe");
    return degrees_[*i];
  }

  /// Sigma-count.
  double cardinality() const noexcept {
    double s = 0.0;
    for (double d : degrees_) s += d;
    return s;
  }

  bool empty() const noexcept {
    return std::all_of(degrees_.begin(), degrees_.end(), [](double d) { return d == 0.0; });
  }

  /// Pointwise inclusion.
  bool subset_of(const FuzzySet& other) const {
    require_same_universe(other);
    for (std::size_t i = 0; i < degrees_.size(); ++i)
      if (degrees_[i] > other.degrees_[i]) return false;
    return true;
  }

  FuzzySet intersect(const FuzzySet& other) const {
    require_same_universe(other);
    FuzzySet r(universe_);
    for (std::size_t i = 0; i < degrees_.size(); ++i)
      r.degrees_[i] = std::min(degrees_[i], other.degrees_[i]);
    return r;
  }

  FuzzySet unite(const FuzzySet& other) const {
    require_same_universe(other);
    FuzzySet r(universe_);
    for (std::size_t i = 0; i < degrees_.size(); ++i)
      r.degrees_[i] = std::max(degrees_[i], other.degrees_[i]);
    return r;
  }

  friend bool operator==(const FuzzySet& a, const FuzzySet& b) {
    return same_universe(a.universe_, b.universe_) && a.degrees_ == b.degrees_;
  }

  void require_same_universe(const FuzzySet& other) const {
    if (!same_universe(universe_, other.universe_))
      throw Error(ErrorKind::domain, "fuzzy sets are over different universes");
  }

 private:
  LabelsPtr universe_;
  std::vector<double> degrees_;
};

}  // namespace fqx
