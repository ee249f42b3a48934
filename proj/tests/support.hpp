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

// Shared helpers for the test programs: fixture access, random contexts and
// conversions between library and oracle representations.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fqx/fqx.hpp"
#include "oracles.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(FQX_FIXTURE_DIR) / name; }
inline std::filesystem::path sample(const std::string& name) { return std::filesystem::path(FQX_SAMPLE_DIR) / name; }

inline fqx::LContext load_csv(const std::string& name) { return fqx::context_from_csv(fqx::read_file(fixture(name).string())); }

inline fqx::IndexBundle sample_bundle() { return fqx::build_index(fqx::read_file(sample("bib.xml").string())); }

inline fqx::Labels numbered(const char* prefix, int n) {
  fqx::Labels out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline fqx::LContext to_lcontext(const oracle::CrispContext& k) {
  std::vector<double> d;
  for (int x = 0; x < k.objects; ++x)
    for (int y = 0; y < k.attributes; ++y) d.push_back(k.has(x, y) ? 1.0 : 0.0);
  return fqx::LContext(numbered("g", k.objects), numbered("m", k.attributes), std::move(d));
}

inline fqx::LContext to_lcontext(const oracle::FuzzyContext& k) {
  return fqx::LContext(numbered("g", k.objects), numbered("m", k.attributes), k.r);
}

inline oracle::FuzzyContext to_oracle(const fqx::LContext& c) {
  return {static_cast<int>(c.object_count()), static_cast<int>(c.attribute_count()),
          std::vector<double>(c.degrees().begin(), c.degrees().end())};
}

inline oracle::Imp to_oracle(fqx::Implication imp) {
  switch (imp) {
    case fqx::Implication::goedel: return oracle::Imp::goedel;
    case fqx::Implication::lukasiewicz: return oracle::Imp::lukasiewicz;
    case fqx::Implication::goguen: return oracle::Imp::goguen;
  }
  return oracle::Imp::goedel;
}

inline std::uint32_t to_mask(const fqx::FuzzySet& s) {
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] == 1.0) m |= 1u << i;
  return m;
}

inline fqx::FuzzySet from_mask(const fqx::LabelsPtr& universe, std::uint32_t mask) {
  fqx::FuzzySet s(universe);
  for (std::size_t i = 0; i < universe->size(); ++i)
    if ((mask >> i) & 1u) s.set(i, 1.0);
  return s;
}

inline oracle::CrispContext random_crisp(std::mt19937& rng, int max_objects, int max_attributes) {
  std::uniform_int_distribution<int> no(1, max_objects), na(1, max_attributes);
  oracle::CrispContext k;
  k.objects = no(rng);
  k.attributes = na(rng);
  std::uniform_int_distribution<int> bits(0, (1 << k.attributes) - 1);
  for (int x = 0; x < k.objects; ++x) k.rows.push_back(static_cast<std::uint16_t>(bits(rng)));
  return k;
}

inline oracle::FuzzyContext random_fuzzy(std::mt19937& rng, int objects, int attributes,
                                         const std::vector<double>& values) {
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  oracle::FuzzyContext k{objects, attributes, {}};
  for (int i = 0; i < objects * attributes; ++i) k.r.push_back(values[pick(rng)]);
  return k;
}

/// Degrees on a 0.1 grid, so the arithmetic implications stay well defined.
inline std::vector<double> tenths() {
  std::vector<double> v;
  for (int i = 0; i <= 10; ++i) v.push_back(i / 10.0);
  return v;
}

inline fqx::FuzzySet random_set(std::mt19937& rng, const fqx::LabelsPtr& universe, const std::vector<double>& values) {
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  fqx::FuzzySet s(universe);
  for (std::size_t i = 0; i < universe->size(); ++i) s.set(i, values[pick(rng)]);
  return s;
}

inline std::set<std::vector<double>> intents_of(const fqx::ConceptLattice& lat) {
  std::set<std::vector<double>> out;
  for (const auto& c : lat.concepts()) out.insert({c.intent.degrees().begin(), c.intent.degrees().end()});
  return out;
}

}  // namespace testing_support
