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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fqx/fqx.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace {

namespace ts = testing_support;
using Clock = std::chrono::steady_clock;

// Tolerances and budgets.
constexpr double kTableTolerance = 0.005;
constexpr double kExact = 1e-12;
constexpr double kBudgetFast = 1.0;       // seconds
constexpr double kBudgetCrisp = 10.0;     // seconds
constexpr double kBudgetFuzzy = 60.0;     // seconds
constexpr int kCrispInstances = 100;
constexpr int kFuzzyInstances = 250;
constexpr int kGaloisTriples = 1200;
constexpr int kQueryInstances = 200;
constexpr std::size_t kMaxLocalizationConcepts = 50;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double truncate2(double v) { return std::floor(v * 100.0 + 1e-9) / 100.0; }

// Criterion 1: term weights for tf=1, n_t=3.
Outcome weights() {
  Outcome o;
  auto xml = fqx::read_file(ts::sample("bib.xml").string());
  auto tree = fqx::parse_document(xml);
  auto stats = fqx::build_stats(tree);
  if (stats.n_t != 3) o.fail("population is " + std::to_string(stats.n_t) + ", expected 3");

  const double rare = std::log10(3.0), shared = std::log10(1.5);
  struct Probe {
    std::string term;
    std::size_t nf;
    double oracle, table;
  };
  std::vector<Probe> probes{{"css 2", 1, rare, 0.47}, {"eyrolles", 1, rare, 0.47},
                            {"beginner", 2, shared, 0.17}, {"daniel glazman", 2, shared, 0.17},
                            {"microsoft press", 2, shared, 0.17}};
  for (const auto& p : probes) {
    if (stats.nf.at(p.term) != p.nf) o.fail("nf(" + p.term + ") = " + std::to_string(stats.nf.at(p.term)));
    for (const auto& n : tree.nodes()) {
      if (!n.is_text() || stats.term_frequency(p.term, n.id) == 0) continue;
      double w = fqx::term_weight(p.term, n.id, stats).value();
      if (std::abs(w - p.oracle) > kExact) o.fail(p.term + ": weight differs from log10 oracle");
      double expected4 = p.nf == 1 ? 0.4771 : 0.1761;
      if (std::abs(w - expected4) > kTableTolerance) o.fail(p.term + ": weight outside tolerance");
      if (std::abs(truncate2(w) - p.table) > kExact) o.fail(p.term + ": two-decimal value differs from table");
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "nf=1 -> %.4f, nf=2 -> %.4f", rare, shared);
  if (o.pass) o.detail = buf;
  return o;
}

// Criterion 2: shapes and support patterns of the four document contexts.
Outcome fixture_contexts() {
  Outcome o;
  auto bundle = ts::sample_bundle();
  const std::vector<std::pair<std::string, std::string>> expected{{"/bib/book[0]", "book0_context.csv"},
                                                                  {"/bib/book[1]", "book1_context.csv"},
                                                                  {"/bib/book[2]", "book2_context.csv"},
                                                                  {"/bib", "bib_context.csv"}};
  if (bundle.contexts.size() != expected.size()) {
    o.fail("expected 4 contexts, got " + std::to_string(bundle.contexts.size()));
    return o;
  }
  std::size_t compared = 0, excluded = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& got = bundle.contexts[i];
    auto want = ts::load_csv(expected[i].second);
    if (got.origin_path != expected[i].first) o.fail("context " + std::to_string(i + 1) + " is " + got.origin_path);
    if (got.seq != i + 1) o.fail("unexpected sequence number for " + got.origin_path);
    const auto& c = got.context;
    if (*c.objects() != *want.objects() || *c.attributes() != *want.attributes()) {
      o.fail(got.origin_path + ": labels or shape differ (" + std::to_string(c.object_count()) + "x" +
             std::to_string(c.attribute_count()) + ")");
      continue;
    }
    for (std::size_t x = 0; x < want.object_count(); ++x)
      for (std::size_t y = 0; y < want.attribute_count(); ++y) {
        double t = want(x, y);
        if (t == 1.0 || t == 0.92) {
          ++excluded;
          continue;
        }
        ++compared;
        if ((c(x, y) != 0.0) != (t != 0.0))
          o.fail(got.origin_path + ": support differs at (" + (*c.objects())[x] + ", " + (*c.attributes())[y] + ")");
      }
  }
  if (o.pass)
    o.detail = "3 x 6x11 + 6x3, " + std::to_string(compared) + " cells compared, " + std::to_string(excluded) +
               " non-derivable cells excluded";
  return o;
}

// Criterion 3: column-wise concatenation of the book[1] and root fixtures
// against the combined fixture.
Outcome nesting_witness() {
  Outcome o;
  auto book1 = ts::load_csv("book1_context.csv");
  auto bib = ts::load_csv("bib_context.csv");
  auto combined = ts::load_csv("book1_bib_nested.csv");
  auto [cat, members] = fqx::concatenate_contexts({{"/bib/book[1]", &book1}, {"/bib", &bib}});
  if (cat.object_count() != 6 || cat.attribute_count() != 14) o.fail("concatenation is not 6x14");
  if (*cat.attributes() != *combined.attributes() || *cat.objects() != *combined.objects()) {
    o.fail("labels differ from the combined fixture");
    return o;
  }
  if (members.size() != 2 || members[0].end != 11 || members[1].begin != 11 || members[1].end != 14)
    o.fail("member column ranges are wrong");

  // Cells where the source fixtures and the combined fixture disagree.
  const std::set<std::pair<std::string, std::string>> known{
      {"level", "E1"}, {"lang", "E1"}, {"publisher", "book[1]"}, {"publisher", "book[2]"}};
  std::set<std::pair<std::string, std::string>> differing;
  std::set<std::size_t> bad_columns;
  for (std::size_t x = 0; x < 6; ++x)
    for (std::size_t y = 0; y < 14; ++y)
      if (cat(x, y) != combined(x, y)) {
        differing.insert({(*cat.objects())[x], (*cat.attributes())[y]});
        bad_columns.insert(y);
      }
  for (const auto& d : differing)
    std::cout << "  note: discrepant cell (" << d.first << ", " << d.second << ") logged, not matched\n";
  if (differing != known) o.fail(std::to_string(differing.size()) + " discrepant cells, expected the 4 known ones");
  if (o.pass)
    o.detail = "6x14, " + std::to_string(14 - bad_columns.size()) + "/14 columns fully agree, " +
               std::to_string(6 * 14 - differing.size()) + "/84 cells exact";
  return o;
}

// Criterion 4: crisp contexts against classical FCA by brute force.
Outcome crisp_reduction() {
  Outcome o;
  std::mt19937 rng(4004);
  std::size_t concepts = 0;
  for (int n = 0; n < kCrispInstances && o.pass; ++n) {
    auto k = ts::random_crisp(rng, 6, 6);
    auto ctx = ts::to_lcontext(k);
    for (std::uint32_t a = 0; a < (1u << k.objects); ++a) {
      auto up = fqx::sufficiency_up(ts::from_mask(ctx.objects(), a), ctx);
      if (ts::to_mask(up) != oracle::common_attributes(k, a) || up.cardinality() != __builtin_popcount(ts::to_mask(up)))
        o.fail("up operator differs on instance " + std::to_string(n));
    }
    for (std::uint32_t b = 0; b < (1u << k.attributes); ++b) {
      auto down = fqx::sufficiency_down(ts::from_mask(ctx.attributes(), b), ctx);
      if (ts::to_mask(down) != oracle::common_objects(k, b) ||
          down.cardinality() != __builtin_popcount(ts::to_mask(down)))
        o.fail("down operator differs on instance " + std::to_string(n));
    }
    auto lat = fqx::enumerate_concepts(ctx);
    std::set<std::pair<std::uint32_t, std::uint32_t>> got;
    for (const auto& c : lat.concepts()) got.insert({ts::to_mask(c.extent), ts::to_mask(c.intent)});
    auto want = oracle::crisp_concepts(k);
    if (got != want || lat.size() != want.size()) o.fail("concept set differs on instance " + std::to_string(n));
    concepts += want.size();
  }
  if (o.pass) o.detail = std::to_string(kCrispInstances) + " contexts, " + std::to_string(concepts) + " concepts";
  return o;
}

// Criterion 5: contexts up to 4x4 over {0, 0.5, 1} against exhaustive
// closure of every candidate intent.
Outcome fuzzy_concepts() {
  Outcome o;
  std::mt19937 rng(5005);
  const std::vector<double> values{0.0, 0.5, 1.0};
  std::uniform_int_distribution<int> dim(1, 4);
  std::size_t concepts = 0, runs = 0;
  for (int n = 0; n < kFuzzyInstances && o.pass; ++n) {
    auto k = ts::random_fuzzy(rng, dim(rng), dim(rng), values);
    auto ctx = fqx::LContext(ts::numbered("g", k.objects), ts::numbered("m", k.attributes), k.r, values);
    for (auto imp : fqx::kAllImplications) {
      auto lat = fqx::enumerate_concepts(ctx, imp);
      auto want = oracle::fuzzy_intents(k, values, ts::to_oracle(imp));
      if (ts::intents_of(lat) != want || lat.size() != want.size()) {
        o.fail(std::string(fqx::to_string(imp)) + " concept set differs on instance " + std::to_string(n));
        break;
      }
      for (const auto& c : lat.concepts()) {
        auto ext = oracle::down(k, {c.intent.degrees().begin(), c.intent.degrees().end()}, ts::to_oracle(imp));
        if (!std::equal(ext.begin(), ext.end(), c.extent.degrees().begin()))
          o.fail("extent differs on instance " + std::to_string(n));
      }
      concepts += want.size();
      ++runs;
    }
  }
  if (o.pass)
    o.detail = std::to_string(kFuzzyInstances) + " contexts x 3 implications, " + std::to_string(concepts) +
               " concepts";
  return o;
}

// Criterion 6: closure-operator laws on random triples.
Outcome galois() {
  Outcome o;
  std::mt19937 rng(6006);
  const auto values = ts::tenths();
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_int_distribution<std::size_t> which(0, 2);
  std::size_t checked = 0;
  for (int n = 0; n < kGaloisTriples && o.pass; ++n) {
    auto imp = fqx::kAllImplications[which(rng)];
    auto ctx = ts::to_lcontext(ts::random_fuzzy(rng, dim(rng), dim(rng), values));
    auto x = ts::random_set(rng, ctx.objects(), values);
    auto y = ts::random_set(rng, ctx.attributes(), values);
    auto x_small = x.intersect(ts::random_set(rng, ctx.objects(), values));
    auto y_small = y.intersect(ts::random_set(rng, ctx.attributes(), values));
    auto name = std::string(fqx::to_string(imp)) + " triple " + std::to_string(n);

    auto xu = fqx::sufficiency_up(x, ctx, imp);
    auto yd = fqx::sufficiency_down(y, ctx, imp);
    if (!x.subset_of(fqx::sufficiency_down(xu, ctx, imp))) o.fail(name + ": extent closure not extensive");
    if (!y.subset_of(fqx::sufficiency_up(yd, ctx, imp))) o.fail(name + ": intent closure not extensive");
    auto cy = fqx::closure(y, ctx, imp);
    if (fqx::closure(cy, ctx, imp) != cy) o.fail(name + ": intent closure not idempotent");
    auto cx = fqx::extent_closure(x, ctx, imp);
    if (fqx::extent_closure(cx, ctx, imp) != cx) o.fail(name + ": extent closure not idempotent");
    if (!xu.subset_of(fqx::sufficiency_up(x_small, ctx, imp))) o.fail(name + ": up not antitone");
    if (!yd.subset_of(fqx::sufficiency_down(y_small, ctx, imp))) o.fail(name + ": down not antitone");
    if (fqx::sufficiency_up(fqx::sufficiency_down(xu, ctx, imp), ctx, imp) != xu) o.fail(name + ": up not triple-stable");
    if (fqx::sufficiency_down(fqx::sufficiency_up(yd, ctx, imp), ctx, imp) != yd)
      o.fail(name + ": down not triple-stable");
    ++checked;
  }
  if (o.pass) o.detail = std::to_string(checked) + " triples, 8 laws each";
  return o;
}

// Criterion 7: ranking against a full scan and localization against an
// exhaustive search over all concepts.
Outcome query_semantics() {
  Outcome o;
  std::mt19937 rng(7007);
  std::size_t localized = 0, scored = 0;
  for (int n = 0; n < kQueryInstances && o.pass; ++n) {
    auto k = ts::random_crisp(rng, 6, 6);
    auto ctx = ts::to_lcontext(k);
    auto base = fqx::enumerate_concepts(ctx);
    std::uniform_int_distribution<std::uint32_t> qd(1, (1u << k.attributes) - 1);
    std::uint32_t mask = qd(rng);
    fqx::Query q{ts::from_mask(ctx.attributes(), mask)};

    auto overlay = fqx::insert_query(base, q);
    fqx::RankOptions opts;
    opts.limit = 1000;
    auto result = fqx::rank_results(overlay, q, opts);
    auto counts = oracle::shared_counts(k, mask);
    std::map<std::string, double> got;
    for (const auto& e : result.entries) got[e.object] = e.score;
    std::map<std::string, double> want;
    for (int x = 0; x < k.objects; ++x)
      if (counts[x] > 0) want["g" + std::to_string(x)] = counts[x];
    if (got != want) o.fail("scores differ from the full scan on instance " + std::to_string(n));
    scored += want.size();

    for (const auto* lat : {&base, &overlay.lattice}) {
      if (lat->size() > kMaxLocalizationConcepts) continue;
      std::vector<std::vector<double>> intents;
      for (const auto& c : lat->concepts()) intents.push_back({c.intent.degrees().begin(), c.intent.degrees().end()});
      int want_id = oracle::minimal_containing(intents, {q.wanted.degrees().begin(), q.wanted.degrees().end()});
      auto loc = fqx::locate_query_concept(*lat, q.wanted);
      if (want_id < 0 || loc.concept_id != static_cast<std::size_t>(want_id))
        o.fail("localization differs on instance " + std::to_string(n));
      ++localized;
    }
    if (overlay.query_concept != fqx::locate_query_concept(overlay.lattice, q.wanted).concept_id)
      o.fail("overlay query concept is not the localized concept on instance " + std::to_string(n));
  }
  if (o.pass)
    o.detail = std::to_string(scored) + " scores checked, " + std::to_string(localized) + " localizations checked";
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

// Criterion 8: repeated CLI runs give identical bytes.
Outcome determinism() {
  Outcome o;
  auto dir = std::filesystem::temp_directory_path() / ("fqx-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string cli = FQX_CLI_PATH, xml = ts::sample("bib.xml").string();
  auto a = dir / "a.json", b = dir / "b.json";
  if (run(cli + " index " + xml + " -o " + a.string() + " > /dev/null") != 0 ||
      run(cli + " index " + xml + " -o " + b.string() + " > /dev/null") != 0)
    o.fail("index failed");
  else if (slurp(a) != slurp(b) || slurp(a).empty())
    o.fail("bundles differ");
  for (const char* items : {"E2", "beginner", "E7:0.5 book[1]", "'Daniel Glazman'"}) {
    std::string q = cli + " query " + a.string() + " " + items + " --json > ";
    if (run(q + (dir / "q1").string()) != 0 || run(q + (dir / "q2").string()) != 0) {
      o.fail(std::string("query failed for ") + items);
      continue;
    }
    if (slurp(dir / "q1") != slurp(dir / "q2")) o.fail(std::string("query output differs for ") + items);
  }
  if (fqx::serialize(ts::sample_bundle()) != slurp(a)) o.fail("library and CLI bundles differ");
  std::filesystem::remove_all(dir);
  if (o.pass) o.detail = "bundle and 4 queries byte-identical";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* title;
    std::function<Outcome()> check;
    double budget;  // seconds, 0 for none
  };
  const std::vector<Criterion> criteria{
      {1, "term weights", weights, kBudgetFast},
      {2, "fixture contexts", fixture_contexts, kBudgetFast},
      {3, "nesting witness", nesting_witness, 0},
      {4, "crisp reduction", crisp_reduction, kBudgetCrisp},
      {5, "fuzzy concepts", fuzzy_concepts, kBudgetFuzzy},
      {6, "closure laws", galois, 0},
      {7, "query semantics", query_semantics, 0},
      {8, "determinism", determinism, 0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = Clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.budget > 0 && secs >= c.budget) o.fail("took " + std::to_string(secs) + " s");
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.number << " (" << c.title << "): " << o.detail
              << " [" << timing << "]\n";
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
