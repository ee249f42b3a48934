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

// fqx: index an XML document as fuzzy concept lattices, query it, export it.
//
// Exit status: 0 success, 1 i/o failure, 2 input parse error,
// 3 user error (bad query, selector or config), 4 corrupt index.

#include <cstdlib>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fqx/fqx.hpp"

namespace {

int exit_code(fqx::ErrorKind kind) {
  using fqx::ErrorKind;
  switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::empty_input: return 2;
    case ErrorKind::unknown_attribute:
    case ErrorKind::range:
    case ErrorKind::bad_selector:
    case ErrorKind::config:
    case ErrorKind::domain: return 3;
    case ErrorKind::corrupt_index: return 4;
    default: return 1;
  }
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("fqx");
  logger->set_pattern("%^[%l]%$ %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("FQX_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  return fqx::read_file(path);
}

std::string shape(const fqx::LContext& c) {
  return std::to_string(c.object_count()) + "x" + std::to_string(c.attribute_count());
}

int cmd_index(const std::string& xml_path, const std::string& config_path, const std::string& out_path,
              const std::string& dump_path) {
  fqx::IndexConfig config;
  if (!config_path.empty()) config = fqx::load_config(config_path);
  std::string xml = read_input(xml_path);
  spdlog::debug("read {} bytes from {}", xml.size(), xml_path);

  fqx::IndexBundle bundle;
  try {
    bundle = fqx::build_index(xml, config);
  } catch (const fqx::Error& e) {
    if (e.kind() == fqx::ErrorKind::parse || e.kind() == fqx::ErrorKind::empty_input)
      throw fqx::Error(e.kind(), xml_path + ": " + e.detail());
    throw;
  }
  if (!dump_path.empty()) {
    auto tree = fqx::parse_document(xml);
    fqx::write_file(dump_path, fqx::to_json(tree, fqx::extract_levels(tree)).dump(1) + "\n");
  }
  fqx::write_file(out_path, fqx::serialize(bundle));

  std::cout << "indexed " << xml_path << ": " << bundle.node_count << " nodes, " << bundle.text_node_count
            << " text nodes\n";
  for (std::size_t i = 0; i < bundle.contexts.size(); ++i) {
    const auto& oc = bundle.contexts[i];
    std::cout << "  lattice " << oc.seq << "  " << oc.origin_path << "  context " << shape(oc.context) << "  "
              << bundle.lattices[i].size() << " concepts\n";
  }
  std::cout << "  nested  " << bundle.nested.members.size() << " members  context "
            << shape(bundle.nested.combined_context) << "  " << bundle.nested.lattice.size() << " concepts\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_query(const std::string& bundle_path, const std::vector<std::string>& items, std::size_t limit, bool json,
              bool widen) {
  auto bundle = fqx::load_bundle(bundle_path);
  fqx::RankOptions opts;
  opts.limit = limit;
  opts.widen_neighborhood = widen || bundle.config.widen_neighborhood;
  auto result = fqx::run_query(bundle.nested.lattice, items, opts);
  spdlog::debug("query concept #{}, {} results", result.query_concept, result.entries.size());
  if (json)
    std::cout << fqx::to_json(result).dump(1) << "\n";
  else
    std::cout << fqx::to_table(result);
  return 0;
}

int cmd_export(const std::string& bundle_path, const std::string& what, const std::string& selector,
               const std::string& out_path) {
  auto bundle = fqx::load_bundle(bundle_path);
  auto sel = fqx::select(bundle, selector);
  std::string data;
  if (what == "context-csv" || what == "csv") {
    data = fqx::context_to_csv(*sel.context);
  } else if (what == "lattice-dot" || what == "dot") {
    data = fqx::lattice_to_dot(*sel.lattice, sel.members ? *sel.members : std::vector<fqx::NestMember>{});
  } else if (what == "lattice-json" || what == "json") {
    data = fqx::lattice_to_json(*sel.lattice, sel.members ? *sel.members : std::vector<fqx::NestMember>{}).dump(1) +
           "\n";
  } else {
    throw fqx::Error(fqx::ErrorKind::bad_selector, "unknown export kind '" + what + "'");
  }
  if (out_path == "-")
    std::cout << data;
  else
    fqx::write_file(out_path, data);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Fuzzy concept lattice indexing and flexible querying of XML documents"};
  app.require_subcommand(1);

  std::string xml_path, config_path, out_path, dump_path;
  auto* index = app.add_subcommand("index", "Build an index bundle from an XML document");
  index->add_option("xml", xml_path, "XML document ('-' for standard input)")->required();
  index->add_option("--config", config_path, "Configuration file (.json or .toml)");
  index->add_option("-o,--output", out_path, "Bundle to write")->required();
  index->add_option("--dump-tree", dump_path, "Also write the typed tree and level sets as JSON");

  std::string bundle_path;
  std::vector<std::string> items;
  std::size_t limit = 10;
  bool json = false, widen = false;
  auto* query = app.add_subcommand("query", "Rank objects against attribute[:degree] items");
  query->add_option("bundle", bundle_path, "Index bundle")->required();
  query->add_option("items", items, "Wanted attributes, e.g. E2 E4:0.5")->required();
  query->add_option("--limit", limit, "Maximum number of results");
  query->add_flag("--json", json, "Emit JSON instead of a table");
  query->add_flag("--widen", widen, "Also collect objects from sub-concepts of the query concept");

  std::string what, selector, export_out;
  auto* exp = app.add_subcommand("export", "Export a context or lattice from a bundle");
  exp->add_option("bundle", bundle_path, "Index bundle")->required();
  exp->add_option("--what", what, "context-csv | lattice-dot | lattice-json")->required();
  exp->add_option("--select", selector, "Lattice sequence number, origin path or 'nested'")->required();
  exp->add_option("-o,--output", export_out, "Output file ('-' for standard output)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }

  try {
    if (*index) return cmd_index(xml_path, config_path, out_path, dump_path);
    if (*query) return cmd_query(bundle_path, items, limit, json, widen);
    if (*exp) return cmd_export(bundle_path, what, selector, export_out);
  } catch (const fqx::Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
