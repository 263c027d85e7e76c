#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "json.hpp"
#include "sqlgen/expansion/expansion.hpp"
#include "test_models.hpp"
#include "test_support.hpp"

using namespace sqlgen;
using nlohmann::json;
using sqlgen::testing::FnModel;
using sqlgen::testing::fixtures_dir;
using sqlgen::testing::read_file;
using sqlgen::testing::TempDir;
using sqlgen::testing::write_file;

namespace {

std::unique_ptr<LlmClient> client_with(std::unique_ptr<TextModel> gen) {
  return std::make_unique<LlmClient>(std::move(gen), std::make_unique<MockModel>("mock:judge", "", true),
                                     std::make_unique<TrigramEmbedder>());
}

std::unique_ptr<LlmClient> synthesizing_client() {
  return client_with(std::make_unique<MockModel>("mock:gen", "", true));
}

std::string template_reply(const std::string& body) {
  return json{{"reasoning", "because"}, {"query_template", body}}.dump();
}

TemplatePool pool_of(Dialect d, const std::vector<std::string>& sqls) {
  std::vector<CorpusEntry> corpus;
  for (const auto& s : sqls) corpus.push_back({s, d});
  return build_seed_pool(corpus, d);
}

std::vector<TutorialDoc> tutorials(const std::string& sub, Dialect d) {
  return ingest_tutorials(fixtures_dir() / "tutorials" / sub, d).docs;
}

// Template body inside an expansion prompt.
std::string prompt_template(const std::string& prompt) {
  auto a = prompt.find("\nQuery template:\n") + 17;
  return prompt.substr(a, prompt.find("\n\nYour response should be") - a);
}

}  // namespace

TEST(Expansion, VerbatimReplyIsDuplicate) {
  auto pool = pool_of(Dialect::kSqlite, {"SELECT name FROM singer"});
  auto llm = client_with(std::make_unique<FnModel>([](const std::string& p) { return template_reply(prompt_template(p)); }));
  std::mt19937_64 rng(1);
  auto rec = expand_once(pool, tutorials("sqlite", Dialect::kSqlite), *llm, rng);
  EXPECT_FALSE(rec.accepted);
  EXPECT_EQ(rec.reason, RejectReason::kDuplicate);
  EXPECT_EQ(pool.size(), 1u);
}

TEST(Expansion, ConcreteTableNameIsPlaceholderViolation) {
  auto pool = pool_of(Dialect::kSqlite, {"SELECT name FROM singer"});
  auto llm = client_with(std::make_unique<FnModel>(
      [](const std::string&) { return template_reply("SELECT column FROM singers WHERE column GLOB literal"); }));
  std::mt19937_64 rng(1);
  auto rec = expand_once(pool, tutorials("sqlite", Dialect::kSqlite), *llm, rng);
  EXPECT_FALSE(rec.accepted);
  EXPECT_EQ(rec.reason, RejectReason::kPlaceholderViolation);
}

TEST(Expansion, OtherRejectReasons) {
  auto pool = pool_of(Dialect::kSqlite, {"SELECT name FROM singer"});
  auto docs = tutorials("sqlite", Dialect::kSqlite);
  std::mt19937_64 rng(1);
  auto no_json = client_with(std::make_unique<FnModel>([](const std::string&) { return "I cannot do that."; }));
  EXPECT_EQ(expand_once(pool, docs, *no_json, rng).reason, RejectReason::kJsonError);
  auto bad_sql = client_with(std::make_unique<FnModel>([](const std::string&) { return template_reply("SELEC column FROM table"); }));
  EXPECT_EQ(expand_once(pool, docs, *bad_sql, rng).reason, RejectReason::kParseError);
  auto wrong_dialect = client_with(std::make_unique<FnModel>(
      [](const std::string&) { return template_reply("SELECT column FROM table WHERE column ILIKE literal"); }));
  EXPECT_EQ(expand_once(pool, docs, *wrong_dialect, rng).reason, RejectReason::kParseError);
  auto offline = client_with(std::make_unique<MockModel>("mock:none", "", false));
  auto rec = expand_once(pool, docs, *offline, rng);
  EXPECT_EQ(rec.reason, RejectReason::kLlmError);
  EXPECT_EQ(pool.size(), 1u);
}

TEST(Expansion, QualifyTutorialCannedReply) {
  auto pool = pool_of(Dialect::kBigQuery, {"SELECT name FROM singer"});
  ASSERT_EQ(pool.templates()[0].body, "SELECT column FROM table");
  auto docs = tutorials("bigquery", Dialect::kBigQuery);
  const TutorialDoc* qualify = nullptr;
  for (const auto& d : docs) {
    if (d.subject == "QUALIFY") qualify = &d;
  }
  ASSERT_NE(qualify, nullptr);
  TempDir mock;
  write_file(mock / (prompt_key(expansion_prompt(pool.templates()[0], *qualify)) + ".txt"),
             read_file(fixtures_dir() / "expansion" / "qualify_reply.txt"));
  auto llm = client_with(std::make_unique<MockModel>("mock:gen", mock.path().string(), false));
  SqlTemplate made;
  auto rec = propose_expansion(pool.templates()[0], *qualify, *llm, &made);
  ASSERT_TRUE(rec.accepted) << rec.detail;
  ASSERT_TRUE(pool.insert(made));
  EXPECT_EQ(made.body,
            "SELECT column FROM table QUALIFY ROW_NUMBER() OVER (PARTITION BY column ORDER BY column DESC) <= literal");
  EXPECT_EQ(made.origin, TemplateOrigin::expanded(qualify->id, pool.templates()[0].id));
  EXPECT_TRUE(made.keywords.count("QUALIFY"));
  EXPECT_NO_THROW(parse_sql(instantiate_dummies(made.body, Dialect::kBigQuery), Dialect::kBigQuery));
  EXPECT_THROW(parse_sql(instantiate_dummies(made.body, Dialect::kSqlite), Dialect::kSqlite), SqlError);
}

TEST(Expansion, TargetAlreadyReached) {
  auto pool = pool_of(Dialect::kSqlite, {"SELECT name FROM singer", "SELECT COUNT(*) FROM singer"});
  auto llm = synthesizing_client();
  std::mt19937_64 rng(1);
  auto r = expand_pool(pool, tutorials("sqlite", Dialect::kSqlite), *llm, pool.size(), 100, 1, rng);
  EXPECT_TRUE(r.reached_target);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(llm->requests(RoleKind::kGenerator), 0);
}

TEST(Expansion, BudgetExhausted) {
  auto pool = pool_of(Dialect::kSqlite, {"SELECT name FROM singer"});
  auto llm = client_with(std::make_unique<FnModel>([](const std::string&) { return "{\"reasoning\": \"none\"}"; }));
  std::mt19937_64 rng(1);
  auto r = expand_pool(pool, tutorials("sqlite", Dialect::kSqlite), *llm, 5, 17, 3, rng);
  EXPECT_FALSE(r.reached_target);
  EXPECT_EQ(r.records.size(), 17u);
  for (const auto& rec : r.records) EXPECT_EQ(rec.reason, RejectReason::kJsonError);
  EXPECT_EQ(pool.size(), 1u);
}

TEST(Expansion, CooperativeMockAddsExactlyFive) {
  auto pool = pool_of(Dialect::kSqlite, {"SELECT name FROM singer", "SELECT age FROM singer WHERE country = 'France'"});
  const std::size_t start = pool.size();
  auto llm = synthesizing_client();
  std::mt19937_64 rng(42);
  std::size_t last_size = pool.size();
  auto r = expand_pool(pool, tutorials("sqlite", Dialect::kSqlite), *llm, start + 5, 200, 2, rng,
                       [&](const ExpansionRecord&) {
                         EXPECT_GE(pool.size(), last_size);  // monotone
                         last_size = pool.size();
                       });
  EXPECT_TRUE(r.reached_target);
  EXPECT_EQ(pool.size(), start + 5);
  std::size_t accepted = 0;
  for (const auto& rec : r.records) accepted += rec.accepted;
  EXPECT_EQ(accepted, 5u);
}

TEST(Expansion, PoolInvariantsAndProvenance) {
  auto pool = pool_of(Dialect::kBigQuery, {"SELECT name FROM singer", "SELECT COUNT(*) FROM concert GROUP BY year"});
  auto llm = synthesizing_client();
  std::mt19937_64 rng(5);
  auto r = expand_pool(pool, tutorials("bigquery", Dialect::kBigQuery), *llm, 12, 120, 4, rng);
  ASSERT_TRUE(r.reached_target);
  std::set<std::string> ids;
  for (const auto& t : pool.templates()) {
    EXPECT_TRUE(ids.insert(t.id).second);
    EXPECT_NO_THROW(parse_sql(instantiate_dummies(t.body, Dialect::kBigQuery), Dialect::kBigQuery)) << t.body;
    EXPECT_EQ(canonicalize_template(t.body, Dialect::kBigQuery).body, t.body);
    // Every chain of parents ends at a seed.
    const SqlTemplate* cur = &t;
    int hops = 0;
    while (cur->origin.kind == TemplateOrigin::Kind::kExpanded) {
      cur = pool.find(cur->origin.parent_id);
      ASSERT_NE(cur, nullptr);
      ASSERT_LT(++hops, 100);
    }
  }
}

TEST(Expansion, WorkerCountDoesNotChangeOutcome) {
  auto run = [](std::size_t workers) {
    auto pool = pool_of(Dialect::kSqlite, {"SELECT name FROM singer", "SELECT age FROM singer WHERE age > 30"});
    auto llm = synthesizing_client();
    std::mt19937_64 rng(99);
    auto r = expand_pool(pool, tutorials("sqlite", Dialect::kSqlite), *llm, 10, 100, workers, rng);
    std::string log;
    for (const auto& rec : r.records) log += rec.to_json() + "\n";
    return pool.to_jsonl() + log;
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(Expansion, RecordJson) {
  ExpansionRecord rec;
  rec.attempt = 3;
  rec.parent_template_id = "p";
  rec.tutorial_id = "t";
  rec.raw_llm_text = "x";
  rec.reason = RejectReason::kDuplicate;
  json j = json::parse(rec.to_json());
  EXPECT_EQ(j["outcome"]["status"], "REJECTED");
  EXPECT_EQ(j["outcome"]["reason"], "Duplicate");
  rec.accepted = true;
  rec.new_template_id = "n";
  j = json::parse(rec.to_json());
  EXPECT_EQ(j["outcome"]["template_id"], "n");
}
