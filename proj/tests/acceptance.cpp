// Acceptance suite: one PASS/FAIL line per criterion, with the tolerance and
// time limit of each check pinned below. Exits non-zero if any check fails.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "sqlgen/adaptation/icl.hpp"
#include "sqlgen/dialect/parser.hpp"
#include "sqlgen/generation/candidate.hpp"
#include "sqlgen/generation/dataset.hpp"
#include "sqlgen/llm/client.hpp"
#include "sqlgen/templates/template.hpp"
#include "test_support.hpp"

using namespace sqlgen;
using namespace sqlgen::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances ---------------------------------------------------------------

constexpr double kLimitCatalogS = 1.0;
constexpr double kLimitAggregationS = 1.0;
constexpr double kLimitEditDistanceS = 30.0;
constexpr double kLimitTemplateS = 10.0;
constexpr double kLimitDeterminismS = 60.0;
constexpr double kLimitAuditS = 30.0;
constexpr double kLimitMismatchS = 10.0;
constexpr double kLimitIclS = 10.0;
constexpr double kLimitGuardS = 1.0;
constexpr double kLimitSeedScaleS = 300.0;

constexpr std::size_t kEditAlphabet = 3;
constexpr std::size_t kEditMaxLen = 8;
constexpr double kTemplateRoundTripMin = 0.95;
constexpr int kDeterminismRuns = 3;
constexpr std::size_t kDeterminismTheta = 20;
constexpr std::size_t kDeterminismBeta = 10;
constexpr double kMismatchBeta1 = 2.0;
constexpr double kMismatchBeta2 = 0.6;
constexpr std::size_t kIclIndexSize = 200;
constexpr std::size_t kIclDims = 64;
constexpr int kIclQueriesPerK = 50;
constexpr std::size_t kSeedTemplatesExpected = 1458;
constexpr double kSeedTemplatesTolerance = 0.05;
constexpr const char* kSpiderEnv = "SQLGEN_SPIDER_TRAIN";

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kPass;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::kFail, std::move(d)}; }

// ---- 1: keyword catalog -------------------------------------------------------------------

Outcome check_catalog() {
  struct Row {
    const char* kw;
    bool sqlite, postgres, bigquery;
    const char* probe;
  };
  // Reference table of non-portable keywords, with one probe statement each.
  const Row rows[] = {
      {"CREATE MODEL", 0, 0, 1, "CREATE MODEL m AS SELECT 1"},
      {"ML.TRANSLATE", 0, 0, 1, "SELECT * FROM ML.TRANSLATE(MODEL m, TABLE t)"},
      {"ML.GENERATE_TEXT", 0, 0, 1, "SELECT * FROM ML.GENERATE_TEXT(MODEL m, TABLE t)"},
      {"ML.ANNOTATE_IMAGE", 0, 0, 1, "SELECT * FROM ML.ANNOTATE_IMAGE(MODEL m, TABLE t)"},
      {"SAFE", 0, 0, 1, "SELECT SAFE.DIVIDE(a, b) FROM t"},
      {"QUALIFY", 0, 0, 1, "SELECT a FROM t QUALIFY ROW_NUMBER() OVER (PARTITION BY a ORDER BY b) = 1"},
      {"WITH OFFSET", 0, 0, 1, "SELECT a, off FROM t, t.arr AS a WITH OFFSET AS off"},
      {"ARRAY_AGG", 0, 1, 1, "SELECT ARRAY_AGG(a) FROM t"},
      {"STRUCT", 0, 0, 1, "SELECT STRUCT(1 AS x, 'a' AS y)"},
      {"ILIKE", 0, 1, 0, "SELECT a FROM t WHERE a ILIKE 'x%'"},
      {"LATERAL", 0, 1, 0, "SELECT * FROM t, LATERAL (SELECT b FROM u WHERE u.id = t.id) AS s"},
      {"SERIAL", 0, 1, 0, "CREATE TABLE t (id SERIAL)"},
      {"CTID", 0, 1, 0, "SELECT ctid FROM t"},
      {"PRAGMA", 1, 0, 0, "PRAGMA table_info(t)"},
      {"REGEXP_CONTAINS", 0, 0, 1, "SELECT REGEXP_CONTAINS(a, 'x') FROM t"},
      {"REGEXP_MATCHES", 0, 1, 0, "SELECT REGEXP_MATCHES(a, 'x') FROM t"},
      {"GLOB", 1, 0, 0, "SELECT a FROM t WHERE a GLOB 'x*'"},
      {"JULIANDAY", 1, 0, 0, "SELECT JULIANDAY(d) FROM t"},
      {"DATE_TRUNC", 0, 1, 0, "SELECT DATE_TRUNC('month', d) FROM t"},
      {"TIMESTAMP_TRUNC", 0, 0, 1, "SELECT TIMESTAMP_TRUNC(ts, MONTH) FROM t"},
  };
  const auto& cat = KeywordCatalog::builtin();
  if (cat.size() < std::size(rows)) return fail("catalog has fewer than 20 rows");
  int cells = 0;
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < std::size(rows); ++i) {
    const Row& r = rows[i];
    const auto& e = cat.entries()[i];
    if (e.keyword != r.kw) errors.push_back("row " + std::to_string(i + 1) + " is " + e.keyword);
    const bool expected[] = {r.sqlite, r.postgres, r.bigquery};
    const Dialect dialects[] = {Dialect::kSqlite, Dialect::kPostgres, Dialect::kBigQuery};
    for (int d = 0; d < 3; ++d) {
      ++cells;
      const std::string cell = std::string(r.kw) + "/" + std::string(to_string(dialects[d]));
      if (e.supports(dialects[d]) != expected[d]) errors.push_back(cell + ": catalog flag differs");
      try {
        parse_sql(r.probe, dialects[d]);
        if (!expected[d]) errors.push_back(cell + ": accepted");
      } catch (const SqlError& err) {
        if (expected[d]) {
          // Supported DDL probes are valid statements but not queries.
          if (err.kind() != SqlErrorKind::kNonSelect) errors.push_back(cell + ": rejected (" + err.what() + ")");
        } else {
          const auto& kws = err.keywords();
          if (err.kind() != SqlErrorKind::kUnsupportedKeyword ||
              std::find(kws.begin(), kws.end(), std::string(r.kw)) == kws.end()) {
            errors.push_back(cell + ": wrong rejection (" + err.what() + ")");
          }
        }
      }
    }
  }
  if (!errors.empty()) return fail(std::to_string(errors.size()) + " cell errors, first: " + errors.front());
  return pass("20 rows, " + std::to_string(cells) + " support cells");
}

// ---- 2: aggregation filter -----------------------------------------------------------------

Outcome check_aggregation() {
  bool redundant = has_redundant_aggregation(parse_sql("SELECT AVG(average_age) FROM singer", Dialect::kSqlite));
  bool plain = has_redundant_aggregation(parse_sql("SELECT AVG(age) FROM singer", Dialect::kSqlite));
  if (!redundant) return fail("AVG(average_age) was not flagged");
  if (plain) return fail("AVG(age) was flagged");
  return pass("AVG(average_age) FAIL, AVG(age) PASS");
}

// ---- 3: edit distance ---------------------------------------------------------------------

// The naive recursion
//   lev(a, "") = |a|, lev("", b) = |b|,
//   lev(a, b) = lev(a', b')                                if a[0] == b[0]
//             = 1 + min(lev(a', b), lev(a, b'), lev(a', b')) otherwise
// (x' = x without its first character) evaluated for every pair of strings
// up to kEditMaxLen characters. The set of such strings is closed under
// dropping the first character, so each recursive call lands on a pair that
// was already evaluated when strings are enumerated by length; the table
// holds exactly the values the recursion returns.
Outcome check_edit_distance() {
  std::vector<std::string> strs = {""};
  std::vector<std::uint32_t> tail = {0};
  std::size_t level_begin = 0, level_end = 1;
  for (std::size_t len = 1; len <= kEditMaxLen; ++len) {
    for (std::size_t c = 0; c < kEditAlphabet; ++c) {
      for (std::size_t i = level_begin; i < level_end; ++i) {
        strs.push_back(std::string(1, static_cast<char>('a' + c)) + strs[i]);
        tail.push_back(static_cast<std::uint32_t>(i));
      }
    }
    level_begin = level_end;
    level_end = strs.size();
  }
  const std::size_t n = strs.size();
  std::vector<std::uint8_t> table(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::uint8_t v;
      if (strs[i].empty()) {
        v = static_cast<std::uint8_t>(strs[j].size());
      } else if (strs[j].empty()) {
        v = static_cast<std::uint8_t>(strs[i].size());
      } else if (strs[i][0] == strs[j][0]) {
        v = table[tail[i] * n + tail[j]];
      } else {
        v = 1 + std::min({table[tail[i] * n + j], table[i * n + tail[j]], table[tail[i] * n + tail[j]]});
      }
      table[i * n + j] = v;
    }
  }
  // The table must agree with the literal (exponential) recursion wherever
  // that is cheap to run.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && strs[i].size() + strs[j].size() <= 8; ++j) {
      if (levenshtein_naive(strs[i], strs[j]) != table[i * n + j]) {
        return fail("table disagrees with the literal recursion on '" + strs[i] + "', '" + strs[j] + "'");
      }
    }
  }
  std::size_t checked = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (levenshtein(strs[i], strs[j]) != table[i * n + j]) {
        return fail("levenshtein('" + strs[i] + "', '" + strs[j] + "') = " +
                    std::to_string(levenshtein(strs[i], strs[j])) + ", recursion gives " +
                    std::to_string(table[i * n + j]));
      }
      ++checked;
    }
  }
  return pass(std::to_string(checked) + " pairs over " + std::to_string(n) + " strings");
}

// ---- 4: template round trip -------------------------------------------------------------------

Outcome check_templates() {
  std::istringstream in(read_file(fixtures_dir() / "templates" / "corpus50.jsonl"));
  std::string line;
  std::size_t total = 0, dummy_ok = 0, rebuilt_ok = 0;
  std::vector<std::string> misses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string sql = json::parse(line).at("sql").get<std::string>();
    ++total;
    try {
      auto ex = extract_template_with_slots(sql, Dialect::kSqlite);
      parse_sql(instantiate_dummies(ex.tmpl.body, Dialect::kSqlite), Dialect::kSqlite);
      ++dummy_ok;
      if (parse_sql(instantiate(ex.tmpl.body, Dialect::kSqlite, ex.slots), Dialect::kSqlite) ==
          parse_sql(sql, Dialect::kSqlite)) {
        ++rebuilt_ok;
      } else {
        misses.push_back(sql);
      }
    } catch (const std::exception& e) {
      misses.push_back(sql + " (" + e.what() + ")");
    }
  }
  std::string detail = std::to_string(dummy_ok) + "/" + std::to_string(total) + " dummy instances parse, " +
                       std::to_string(rebuilt_ok) + "/" + std::to_string(total) + " rebuilt equivalent";
  if (total != 50) return fail("corpus has " + std::to_string(total) + " queries");
  if (dummy_ok != total) return fail(detail);
  if (static_cast<double>(rebuilt_ok) < kTemplateRoundTripMin * static_cast<double>(total)) return fail(detail);
  return pass(detail);
}

// ---- 5 and 6: end-to-end run and audit ------------------------------------------------------------

struct FixtureRun {
  TempDir dir;
  std::string db_url;
  std::string corpus;
  std::vector<fs::path> runs;
};

FixtureRun& fixture_run() {
  static FixtureRun f;
  return f;
}

Outcome check_determinism() {
  FixtureRun& f = fixture_run();
  build_fixture_db(f.dir / "concerts.sqlite");
  f.db_url = "sqlite:" + (f.dir / "concerts.sqlite").string();
  f.corpus = (fixtures_dir() / "templates" / "corpus50.jsonl").string();
  // Seed with a subset so expansion to theta actually runs.
  {
    std::istringstream in(read_file(f.corpus));
    std::string line, subset;
    for (int i = 0; i < 8 && std::getline(in, line); ++i) subset += line + "\n";
    write_file(f.dir / "seed_corpus.jsonl", subset);
  }
  const std::vector<std::string> outputs = {"dataset.jsonl", "report.json", "report.txt", "manifest.json",
                                            "pool.jsonl", "expansion_log.jsonl", "quality_log.jsonl"};
  std::vector<std::vector<std::string>> contents;
  for (int i = 0; i < kDeterminismRuns; ++i) {
    fs::path out = f.dir / ("run" + std::to_string(i));
    auto r = run_cli({"run", "--corpus", (f.dir / "seed_corpus.jsonl").string(), "--tutorials",
                      (fixtures_dir() / "tutorials").string(), "--db", f.db_url, "--theta",
                      std::to_string(kDeterminismTheta), "--beta", std::to_string(kDeterminismBeta), "--seed", "42",
                      "--workers", "2", "-o", out.string(), "-q"});
    if (r.exit_code != 0) return fail("run " + std::to_string(i) + " exited " + std::to_string(r.exit_code) + ": " + r.output);
    f.runs.push_back(out);
    std::vector<std::string> files;
    for (const auto& name : outputs) files.push_back(read_file(out / name));
    contents.push_back(std::move(files));
  }
  for (int i = 1; i < kDeterminismRuns; ++i) {
    for (std::size_t k = 0; k < outputs.size(); ++k) {
      if (contents[i][k] != contents[0][k]) return fail(outputs[k] + " differs between run 0 and run " + std::to_string(i));
    }
  }
  auto pairs = load_dataset(f.runs[0] / "dataset.jsonl");
  if (pairs.size() != kDeterminismBeta) return fail("dataset has " + std::to_string(pairs.size()) + " pairs");
  json report = json::parse(contents[0][1]);
  if (report["funnel"].size() != funnel_stage_names().size()) return fail("funnel report is incomplete");
  return pass(std::to_string(kDeterminismRuns) + " runs byte-identical (dataset, reports, manifest, logs), " +
              std::to_string(pairs.size()) + " pairs");
}

Outcome check_audit() {
  FixtureRun& f = fixture_run();
  if (f.runs.empty()) return fail("no fixture run to audit");
  auto r = run_cli({"audit", "--dataset", (f.runs[0] / "dataset.jsonl").string(), "--db", f.db_url});
  if (r.exit_code != 0) return fail("audit exited " + std::to_string(r.exit_code) + ": " + r.output);
  std::string summary = r.output.substr(0, r.output.find('\n'));
  return pass(summary);
}

// ---- 7: mismatch filter ----------------------------------------------------------------------

Outcome check_mismatch() {
  TrigramEmbedder emb;
  std::istringstream in(read_file(fixtures_dir() / "generation" / "mismatch_pairs.jsonl"));
  std::string line;
  std::size_t total = 0, agree = 0;
  std::string first_miss;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json c = json::parse(line);
    ++total;
    auto conds = extract_value_conditions(parse_sql(c["sql"].get<std::string>(), Dialect::kSqlite));
    auto r = mismatch_check(c["question"].get<std::string>(), conds, emb, kMismatchBeta1, kMismatchBeta2);
    if ((r.passed ? "PASS" : "FAIL") == c["label"].get<std::string>()) {
      ++agree;
    } else if (first_miss.empty()) {
      first_miss = c["question"].get<std::string>();
    }
  }
  std::string detail = std::to_string(agree) + "/" + std::to_string(total) + " labels match";
  if (total != 20 || agree != total) return fail(detail + (first_miss.empty() ? "" : ", first miss: " + first_miss));
  return pass(detail);
}

// ---- 8: ICL selection -----------------------------------------------------------------------

Outcome check_icl() {
  std::mt19937_64 rng(1729);
  std::normal_distribution<double> nd;
  auto random_unit = [&] {
    std::vector<double> v(kIclDims);
    double norm = 0;
    for (double& x : v) {
      x = nd(rng);
      norm += x * x;
    }
    for (double& x : v) x /= std::sqrt(norm);
    return v;
  };
  std::vector<IclEntry> entries;
  for (std::size_t i = 0; i < kIclIndexSize; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "q-%03zu", i);
    entries.push_back({id, random_unit()});
  }
  IclIndex index(entries);
  std::size_t checked = 0;
  for (std::size_t k : {1u, 5u, 10u}) {
    for (int t = 0; t < kIclQueriesPerK; ++t) {
      auto q = random_unit();
      std::vector<std::pair<double, std::string>> all;
      for (const auto& e : entries) {
        double dot = 0;
        for (std::size_t d = 0; d < kIclDims; ++d) dot += q[d] * e.vector[d];
        all.push_back({dot, e.pair_id});
      }
      std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      auto hits = select_icl(q, index, k);
      if (hits.size() != k) return fail("select_icl returned " + std::to_string(hits.size()) + " hits for k=" + std::to_string(k));
      for (std::size_t i = 0; i < k; ++i) {
        if (hits[i].pair_id != all[i].second) return fail("k=" + std::to_string(k) + " rank " + std::to_string(i + 1) + " differs");
      }
      ++checked;
    }
  }
  return pass(std::to_string(checked) + " queries on a " + std::to_string(kIclIndexSize) + "-entry index, k in {1,5,10}");
}

// ---- 9: judge separation guard ----------------------------------------------------------------

Outcome check_guard() {
  // A local endpoint that counts every request it receives.
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post(R"(.*)", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 401;
    res.set_content(R"({"error": "unauthorized"})", "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/v1";

  TempDir dir;
  build_fixture_db(dir / "concerts.sqlite");
  auto seeds = run_cli({"extract-seeds", "--corpus", (fixtures_dir() / "templates" / "corpus50.jsonl").string(), "-o",
                        (dir / "seeds.jsonl").string(), "-q"});
  auto model_args = [&](const std::string& judge_model) {
    return std::vector<std::string>{"generate", "--pool", (dir / "seeds.jsonl").string(), "--db",
                                    "sqlite:" + (dir / "concerts.sqlite").string(), "-o", (dir / "out").string(),
                                    "--beta", "1", "--max-attempts", "1",
                                    "--generator-provider", "openai", "--generator-url", url, "--generator-model", "m",
                                    "--judge-provider", "openai", "--judge-url", url, "--judge-model", judge_model,
                                    "-q"};
  };
  auto start = std::chrono::steady_clock::now();
  auto same = run_cli(model_args("m"));
  double guard_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const int hits_after_guard = hits.load();
  // Control: with distinct models the same endpoint is contacted.
  auto distinct = run_cli(model_args("other"));
  const int hits_after_control = hits.load();
  server.stop();
  th.join();

  if (seeds.exit_code != 0) return fail("seed extraction failed: " + seeds.output);
  if (same.exit_code != 2) return fail("identical models exited " + std::to_string(same.exit_code));
  if (hits_after_guard != 0) return fail(std::to_string(hits_after_guard) + " provider requests before the abort");
  if (hits_after_control == 0) return fail("control run never reached the endpoint");
  if (guard_s > kLimitGuardS) return fail("guard took " + std::to_string(guard_s) + " s");
  (void)distinct;
  return pass("exit 2 with 0 provider requests (control run: " + std::to_string(hits_after_control) + " requests)");
}

// ---- 10: seed scale ---------------------------------------------------------------------------

Outcome check_seed_scale() {
  const char* path = std::getenv(kSpiderEnv);
  if (!path || !*path) return {Outcome::kSkip, std::string(kSpiderEnv) + " not set (path to Spider train_spider.json)"};
  fs::path corpus(path);
  if (fs::is_directory(corpus)) corpus /= "train_spider.json";
  TempDir dir;
  auto r = run_cli({"extract-seeds", "--corpus", corpus.string(), "-o", (dir / "seeds.jsonl").string()});
  if (r.exit_code != 0) return fail("extract-seeds exited " + std::to_string(r.exit_code) + ": " + r.output);
  std::smatch m;
  if (!std::regex_search(r.output, m, std::regex(R"(seed templates: (\d+))"))) return fail("no summary: " + r.output);
  const double n = std::stod(m[1]);
  const double lo = kSeedTemplatesExpected * (1 - kSeedTemplatesTolerance);
  const double hi = kSeedTemplatesExpected * (1 + kSeedTemplatesTolerance);
  std::string detail = m[1].str() + " templates (expected " + std::to_string(kSeedTemplatesExpected) + " +/- 5%)";
  return (n >= lo && n <= hi) ? pass(detail) : fail(detail);
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "keyword catalog conformance", kLimitCatalogS, check_catalog},
      {2, "aggregation filter example", kLimitAggregationS, check_aggregation},
      {3, "edit distance equals naive recursion", kLimitEditDistanceS, check_edit_distance},
      {4, "template round trip", kLimitTemplateS, check_templates},
      {5, "end-to-end determinism", kLimitDeterminismS, check_determinism},
      {6, "execution filter soundness (audit)", kLimitAuditS, check_audit},
      {7, "mismatch filter labels", kLimitMismatchS, check_mismatch},
      {8, "ICL selection equals brute force", kLimitIclS, check_icl},
      {9, "judge separation guard", kLimitGuardS + 5.0, check_guard},
      {10, "seed-scale template count", kLimitSeedScaleS, check_seed_scale},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Outcome::kPass && secs > c.limit_s) {
      o = fail(o.detail + "; took " + std::to_string(secs) + " s, limit " + std::to_string(c.limit_s) + " s");
    }
    const char* label = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kFail ? "FAIL" : "SKIP";
    if (o.status == Outcome::kFail) ++failures;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << "criterion " << c.number << " " << label << " " << c.name << ": " << o.detail << " [" << timing
              << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
