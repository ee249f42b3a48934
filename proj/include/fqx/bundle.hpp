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

// The persisted index: every per-node context and lattice of one document,
// their nesting, and the configuration that produced them.

#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fqx/context.hpp"
#include "fqx/error.hpp"
#include "fqx/fuzzy.hpp"
#include "fqx/lattice.hpp"
#include "fqx/weighting.hpp"
#include "fqx/xml.hpp"

namespace fqx {

inline constexpr int kBundleVersion = 1;
inline constexpr std::string_view kBundleFormat = "fqx-index";

struct IndexConfig {
  WeightingConfig weighting;
  Implication implication = Implication::goedel;
  bool widen_neighborhood = false;
};

inline nlohmann::ordered_json to_json(const IndexConfig& c) {
  const auto& w = c.weighting;
  nlohmann::ordered_json j;
  j["log_base"] = w.log_base;
  j["s_norm"] = std::string(to_string(w.s_norm));
  j["clamp"] = w.clamp;
  j["term_unit"] = w.term_unit == TermUnit::value ? "value" : "token";
  j["population"] = w.population == Population::records ? "records" : "text_nodes";
  j["stem"] = w.stemmer == Stemmer::none ? "none" : "s";
  j["stopwords"] = std::vector<std::string>(w.stopwords.begin(), w.stopwords.end());
  j["implication"] = std::string(to_string(c.implication));
  j["widen_neighborhood"] = c.widen_neighborhood;
  return j;
}

namespace detail {

inline std::set<std::string> read_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot read stopword file '" + path.string() + "'");
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line))
    for (auto& t : tokenize(line)) out.insert(std::move(t));
  return out;
}

inline std::string config_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw Error(ErrorKind::config, "'" + key + "' must be a string");
  return v.get<std::string>();
}

// Flat `key = value` TOML: strings, numbers, booleans, string arrays.
inline nlohmann::json parse_flat_toml(std::string_view text) {
  nlohmann::json out = nlohmann::json::object();
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.erase(i);
        break;
      }
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos)
      throw Error(ErrorKind::config, "tables are not supported (line " + std::to_string(lineno) + ")");
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, "expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      if (value == "true" || value == "false")
        out[key] = value == "true";
      else
        out[key] = nlohmann::json::parse(value);  // quoted strings, numbers, arrays share JSON syntax
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::config, "bad value for '" + key + "' at line " + std::to_string(lineno));
    }
  }
  return out;
}

}  // namespace detail

/// Applies recognised keys; unknown keys are rejected. `stopwords` in a file
/// names a word list relative to `base_dir`; in a snapshot it is the list.
inline IndexConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  IndexConfig c;
  auto& w = c.weighting;
  if (!j.is_object()) throw Error(ErrorKind::config, "configuration must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "log_base") {
      if (!v.is_number()) throw Error(ErrorKind::config, "'log_base' must be a number");
      w.log_base = v.get<double>();
      if (!(w.log_base > 0.0) || w.log_base == 1.0) throw Error(ErrorKind::config, "'log_base' must be > 0 and != 1");
    } else if (key == "s_norm") {
      auto s = parse_snorm(detail::config_string(v, key));
      if (!s) throw Error(ErrorKind::config, "unknown s_norm '" + v.get<std::string>() + "'");
      w.s_norm = *s;
    } else if (key == "clamp") {
      if (!v.is_boolean()) throw Error(ErrorKind::config, "'clamp' must be a boolean");
      w.clamp = v.get<bool>();
    } else if (key == "term_unit") {
      auto s = detail::config_string(v, key);
      if (s != "value" && s != "token") throw Error(ErrorKind::config, "term_unit must be 'value' or 'token'");
      w.term_unit = s == "value" ? TermUnit::value : TermUnit::token;
    } else if (key == "population") {
      auto s = detail::config_string(v, key);
      if (s != "records" && s != "text_nodes") throw Error(ErrorKind::config, "population must be 'records' or 'text_nodes'");
      w.population = s == "records" ? Population::records : Population::text_nodes;
    } else if (key == "stem") {
      auto s = detail::config_string(v, key);
      if (s != "none" && s != "s") throw Error(ErrorKind::config, "stem must be 'none' or 's'");
      w.stemmer = s == "none" ? Stemmer::none : Stemmer::s_stemmer;
    } else if (key == "stopwords") {
      if (v.is_string())
        w.stopwords = detail::read_stopwords(base_dir / v.get<std::string>());
      else if (v.is_array())
        for (const auto& s : v) w.stopwords.insert(detail::config_string(s, key));
      else
        throw Error(ErrorKind::config, "'stopwords' must be a file name or a list");
    } else if (key == "implication") {
      auto imp = parse_implication(detail::config_string(v, key));
      if (!imp) throw Error(ErrorKind::config, "unknown implication '" + v.get<std::string>() + "'");
      c.implication = *imp;
    } else if (key == "widen_neighborhood") {
      if (!v.is_boolean()) throw Error(ErrorKind::config, "'widen_neighborhood' must be a boolean");
      c.widen_neighborhood = v.get<bool>();
    } else {
      throw Error(ErrorKind::config, "unknown configuration key '" + key + "'");
    }
  }
  return c;
}

/// Reads a `.json` or flat `.toml` configuration file.
inline IndexConfig load_config(const std::filesystem::path& path) {
  std::string text = read_file(path.string());
  nlohmann::json j;
  if (path.extension() == ".toml") {
    j = detail::parse_flat_toml(text);
  } else {
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::config, "'" + path.string() + "': " + e.what());
    }
  }
  return config_from_json(j, path.parent_path());
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::io, "SHA-256 digest failed");
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

struct IndexBundle {
  std::string digest;  // "sha256:<hex>" of the source bytes
  IndexConfig config;
  std::vector<OriginContext> contexts;
  std::vector<ConceptLattice> lattices;  // aligned with contexts
  NestedLattice nested;
  std::size_t node_count = 0;
  std::size_t text_node_count = 0;
};

/// Ingest, weight, contextualize, enumerate and nest one document.
inline IndexBundle build_index(std::string_view xml, const IndexConfig& config = {}) {
  DocumentTree tree = parse_document(xml);
  LevelSets levels = extract_levels(tree);
  DocStats stats = build_stats(tree, config.weighting);
  ContextBuilder builder(tree, levels, stats);

  IndexBundle b;
  b.digest = "sha256:" + sha256_hex(xml);
  b.config = config;
  b.node_count = tree.size();
  b.text_node_count = levels[0].size();
  b.contexts = builder.build_all();
  for (const auto& oc : b.contexts)
    b.lattices.push_back(enumerate_concepts(oc.context, config.implication, oc.origin_path, oc.seq));
  b.nested = nest(b.lattices);
  return b;
}

namespace detail {

inline nlohmann::ordered_json dense_lattice(const ConceptLattice& lat) {
  nlohmann::ordered_json j;
  j["top"] = lat.top();
  j["bottom"] = lat.bottom();
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const auto& c : lat.concepts()) {
    nlohmann::ordered_json cj;
    cj["id"] = c.id;
    cj["extent"] = std::vector<double>(c.extent.degrees().begin(), c.extent.degrees().end());
    cj["intent"] = std::vector<double>(c.intent.degrees().begin(), c.intent.degrees().end());
    cs.push_back(std::move(cj));
  }
  j["concepts"] = std::move(cs);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& [sub, sup] : lat.covers()) edges.push_back({sub, sup});
  j["covers"] = std::move(edges);
  return j;
}

// Rebuilds a lattice from stored intents and checks the stored extents and
// covers against it.
inline ConceptLattice load_dense_lattice(const nlohmann::ordered_json& j, const LContext& ctx, Implication imp,
                                         std::string origin, std::size_t seq) {
  std::vector<std::vector<double>> intents;
  for (const auto& c : j.at("concepts")) intents.push_back(c.at("intent").get<std::vector<double>>());
  ConceptLattice lat(ctx, imp, intents, std::move(origin), seq);
  if (dense_lattice(lat) != j) throw Error(ErrorKind::corrupt_index, "stored lattice does not match its context");
  return lat;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const IndexBundle& b) {
  nlohmann::ordered_json j;
  j["format"] = kBundleFormat;
  j["version"] = kBundleVersion;
  j["digest"] = b.digest;
  j["config"] = to_json(b.config);
  j["node_count"] = b.node_count;
  j["text_node_count"] = b.text_node_count;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < b.contexts.size(); ++i) {
    const auto& oc = b.contexts[i];
    nlohmann::ordered_json cj;
    cj["seq"] = oc.seq;
    cj["origin"] = oc.origin_path;
    cj["node"] = index(oc.origin);
    cj["context"] = to_json(oc.context);
    cj["lattice"] = detail::dense_lattice(b.lattices.at(i));
    cs.push_back(std::move(cj));
  }
  j["contexts"] = std::move(cs);
  nlohmann::ordered_json nj;
  nlohmann::ordered_json ms = nlohmann::ordered_json::array();
  for (const auto& m : b.nested.members) ms.push_back({{"origin", m.origin}, {"begin", m.begin}, {"end", m.end}});
  nj["members"] = std::move(ms);
  nj["context"] = to_json(b.nested.combined_context);
  nj["lattice"] = detail::dense_lattice(b.nested.lattice);
  j["nested"] = std::move(nj);
  j["checksum"] = "sha256:" + sha256_hex(j.dump());
  return j;
}

inline std::string serialize(const IndexBundle& b) { return to_json(b).dump(1) + "\n"; }

/// Loads and validates a bundle; anything inconsistent is a corrupt index.
inline IndexBundle bundle_from_json(const nlohmann::ordered_json& j) {
  try {
    if (!j.is_object() || j.value("format", std::string()) != kBundleFormat)
      throw Error(ErrorKind::corrupt_index, "not an fqx index");
    if (!j.contains("version") || !j.at("version").is_number_integer())
      throw Error(ErrorKind::corrupt_index, "missing bundle version");
    if (j.at("version").get<int>() != kBundleVersion)
      throw Error(ErrorKind::corrupt_index, "unsupported bundle version " + j.at("version").dump());
    auto body = j;
    body.erase("checksum");
    if (j.value("checksum", std::string()) != "sha256:" + sha256_hex(body.dump()))
      throw Error(ErrorKind::corrupt_index, "checksum mismatch");
    IndexBundle b;
    b.digest = j.at("digest").get<std::string>();
    try {
      b.config = config_from_json(nlohmann::json::parse(j.at("config").dump()));
    } catch (const Error& e) {
      throw Error(ErrorKind::corrupt_index, std::string("bad config snapshot: ") + e.what());
    }
    b.node_count = j.at("node_count").get<std::size_t>();
    b.text_node_count = j.at("text_node_count").get<std::size_t>();
    for (const auto& cj : j.at("contexts")) {
      OriginContext oc{node_id(cj.at("node").get<std::size_t>()), cj.at("origin").get<std::string>(),
                       cj.at("seq").get<std::size_t>(), context_from_json(cj.at("context"))};
      if (oc.seq != b.contexts.size() + 1) throw Error(ErrorKind::corrupt_index, "lattice numbers are not consecutive");
      b.lattices.push_back(
          detail::load_dense_lattice(cj.at("lattice"), oc.context, b.config.implication, oc.origin_path, oc.seq));
      b.contexts.push_back(std::move(oc));
    }
    const auto& nj = j.at("nested");
    std::vector<NestMember> members;
    for (const auto& m : nj.at("members"))
      members.push_back({m.at("origin").get<std::string>(), m.at("begin").get<std::size_t>(),
                         m.at("end").get<std::size_t>()});
    LContext combined = context_from_json(nj.at("context"));
    std::vector<std::pair<std::string, const LContext*>> parts;
    for (const auto& oc : b.contexts) parts.emplace_back(oc.origin_path, &oc.context);
    if (parts.empty()) throw Error(ErrorKind::corrupt_index, "index holds no context");
    auto expected = concatenate_contexts(parts);
    if (!(expected.first == combined) || expected.second != members)
      throw Error(ErrorKind::corrupt_index, "nested context does not match its members");
    auto lat = detail::load_dense_lattice(nj.at("lattice"), combined, b.config.implication, "nested", 0);
    b.nested = NestedLattice{std::move(combined), std::move(lat), std::move(members)};
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::corrupt_index, std::string("malformed index: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::corrupt_index) throw;
    throw Error(ErrorKind::corrupt_index, e.what());
  }
}

inline IndexBundle load_bundle(const std::filesystem::path& path) {
  std::string text = read_file(path.string());
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::corrupt_index, "'" + path.string() + "' is not valid JSON");
  }
  return bundle_from_json(j);
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::io, "failed writing '" + path.string() + "'");
}

/// What a selector names inside a bundle.
struct Selection {
  const LContext* context = nullptr;
  const ConceptLattice* lattice = nullptr;
  const std::vector<NestMember>* members = nullptr;  // nested only
};

/// `nested`, a sequence number, an origin path, or an origin's last step
/// (e.g. `book[0]`) when that is unambiguous.
inline Selection select(const IndexBundle& b, const std::string& selector) {
  if (selector == "nested") return {&b.nested.combined_context, &b.nested.lattice, &b.nested.members};
  std::vector<std::size_t> hits;
  bool numeric = !selector.empty() && std::all_of(selector.begin(), selector.end(), [](unsigned char c) { return std::isdigit(c); });
  for (std::size_t i = 0; i < b.contexts.size(); ++i) {
    const auto& oc = b.contexts[i];
    std::string_view path = oc.origin_path;
    std::string_view last = path.substr(path.rfind('/') + 1);
    if ((numeric && std::to_string(oc.seq) == selector) || path == selector || last == selector) hits.push_back(i);
  }
  if (hits.size() != 1)
    throw Error(ErrorKind::bad_selector, hits.empty() ? "nothing matches '" + selector + "'"
                                                      : "'" + selector + "' is ambiguous; use the full origin path");
  return {&b.contexts[hits.front()].context, &b.lattices[hits.front()], nullptr};
}

}  // namespace fqx
