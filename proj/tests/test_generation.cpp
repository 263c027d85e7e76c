#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "json.hpp"
#include "sqlgen/generation/candidate.hpp"
#include "sqlgen/generation/dataset.hpp"
#include "sqlgen/llm/json_extract.hpp"
#include "sqlgen/quality/quality.hpp"
#include "test_models.hpp"
#include "test_support.hpp"

using namespace sqlgen;
using nlohmann::json;
using sqlgen::testing::build_fixture_db;
using sqlgen::testing::build_sqlite_db;
using sqlgen::testing::fixtures_dir;
using sqlgen::testing::FnModel;
using sqlgen::testing::read_file;
using sqlgen::testing::TempDir;
using sqlgen::testing::write_file;

namespace {

std::unique_ptr<LlmClient> client(std::unique_ptr<TextModel> gen, std::unique_ptr<TextModel> judge = nullptr) {
  if (!judge) judge = sqlgen::testing::synthesizing_mock("mock:judge");
  return std::make_unique<LlmClient>(std::move(gen), std::move(judge), std::make_unique<TrigramEmbedder>());
}

std::unique_ptr<LlmClient> reply_with(const std::string& question, const std::string& sql) {
  return client(std::make_unique<FnModel>(
      [=](const std::string&) { return json{{"question", question}, {"sql_query", sql}}.dump(); }));
}

std::vector<json> read_jsonl(const std::filesystem::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

class GenTest : public ::testing::Test {
 protected:
  void SetUp() override {
    path_ = dir_ / "concerts.sqlite";
    build_fixture_db(path_);
    url_ = "sqlite:" + path_.string();
    db_ = open_database(url_);
    profile_ = db_->introspect();
    std::mt19937_64 rng(3);
    sampled_ = with_sample_rows(profile_, *db_, rng);
  }

  SqlTemplate tmpl(const std::string& sql) { return extract_template(sql, Dialect::kSqlite); }

  CandidatePair pair(const std::string& question, const std::string& sql) {
    CandidatePair p;
    p.db_id = "concerts";
    p.question = question;
    p.sql = sql;
    return p;
  }

  TempDir dir_;
  std::filesystem::path path_;
  std::string url_;
  std::unique_ptr<Database> db_;
  DatabaseProfile profile_;
  DatabaseProfile sampled_;
};

TemplatePool seed_pool() {
  std::vector<CorpusEntry> corpus = {{"SELECT name FROM singer WHERE country = 'France'", Dialect::kSqlite},
                                     {"SELECT COUNT(*) FROM concert WHERE year = 2014", Dialect::kSqlite},
                                     {"SELECT name, capacity FROM stadium ORDER BY capacity DESC LIMIT 3",
                                      Dialect::kSqlite}};
  return build_seed_pool(corpus, Dialect::kSqlite);
}

}  // namespace

// ---- generate_candidate ----------------------------------------------------------------

TEST_F(GenTest, ValidReplyGivesPairWithEmptyTrail) {
  auto llm = reply_with("Which singers are from France?", "SELECT name FROM singer WHERE country = 'France';");
  auto p = generate_candidate(tmpl("SELECT name FROM singer WHERE country = 'x'"), sampled_, *llm);
  EXPECT_TRUE(p.filter_trail.empty());
  EXPECT_EQ(p.sql, "SELECT name FROM singer WHERE country = 'France'");
  EXPECT_EQ(p.db_id, "concerts");
  EXPECT_EQ(p.complexity, Complexity::kSimple);
  EXPECT_EQ(p.id, pair_id(p.db_id, p.template_id, p.question, p.sql));
}

TEST_F(GenTest, GenerationErrors) {
  auto t = tmpl("SELECT name FROM singer WHERE age > 3");
  auto kind_of = [&](LlmClient& llm) {
    try {
      generate_candidate(t, sampled_, llm);
    } catch (const GenError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no GenError";
    return GenError::Kind::kLlmError;
  };
  EXPECT_EQ(kind_of(*reply_with("Older singers?", "SELECT name FROM singer WHERE age > literal")),
            GenError::Kind::kParseError);
  EXPECT_EQ(kind_of(*reply_with("Older singers?", "SELECT name FROM table WHERE age > 3")),
            GenError::Kind::kParseError);
  EXPECT_EQ(kind_of(*reply_with("Older singers?", "SELEC name FROM singer")), GenError::Kind::kParseError);
  EXPECT_EQ(kind_of(*reply_with("", "SELECT 1")), GenError::Kind::kJsonError);
  auto prose = client(std::make_unique<FnModel>([](const std::string&) { return "no idea"; }));
  EXPECT_EQ(kind_of(*prose), GenError::Kind::kJsonError);
  auto offline = client(std::make_unique<MockModel>("mock:none", "", false));
  EXPECT_EQ(kind_of(*offline), GenError::Kind::kLlmError);

  auto llm = reply_with("q", "SELECT 1");
  EXPECT_THROW(generate_candidate(extract_template("SELECT a FROM b", Dialect::kBigQuery), sampled_, *llm),
               std::invalid_argument);
}

TEST(Generation, SchoolsGolden) {
  TempDir dir;
  build_sqlite_db(dir / "schools.sqlite", read_file(fixtures_dir() / "generation" / "schools.sql"));
  auto db = open_database("sqlite:" + (dir / "schools.sqlite").string());
  DatabaseProfile profile = db->introspect();
  std::mt19937_64 rng(0);
  profile = with_sample_rows(profile, *db, rng);
  auto t = extract_template("SELECT school FROM schools WHERE county = 'x'", Dialect::kSqlite);
  ASSERT_EQ(t.body, "SELECT column FROM table WHERE column = literal");

  TempDir mock;
  write_file(mock / (prompt_key(generation_prompt(t, profile)) + ".txt"),
             read_file(fixtures_dir() / "generation" / "schools_reply.txt"));
  LlmClient llm(std::make_unique<MockModel>("mock:gen", mock.path().string(), false),
                sqlgen::testing::synthesizing_mock("mock:judge"), std::make_unique<TrigramEmbedder>());
  CandidatePair p = generate_candidate(t, profile, llm);
  json golden = json::parse(read_file(fixtures_dir() / "generation" / "schools_golden.json"));
  EXPECT_EQ(std::string(to_string(p.dialect)), golden["dialect"]);
  EXPECT_EQ(p.db_id, golden["db_id"]);
  EXPECT_EQ(p.question, golden["question"]);
  EXPECT_EQ(p.sql, golden["sql"]);
  EXPECT_EQ(std::string(to_string(p.complexity)), golden["complexity"]);
  FilterConfig cfg;
  auto rs = filter_execution(p, *db, cfg);
  ASSERT_TRUE(rs.has_value());
  EXPECT_EQ(p.exec_digest->row_count, golden["rows"].get<std::size_t>());
  EXPECT_TRUE(filter_mismatch(p, llm.embedder(), cfg));
}

TEST_F(GenTest, PromptCarriesSchemaAndTemplate) {
  auto t = tmpl("SELECT name FROM singer");
  std::string prompt = generation_prompt(t, sampled_);
  EXPECT_NE(prompt.find(render_schema_prompt(sampled_)), std::string::npos);
  EXPECT_NE(prompt.find("SQLite SQL template to get inspired by:\nSELECT column FROM table"), std::string::npos);
}

// ---- execution filter ----------------------------------------------------------------

TEST_F(GenTest, ExecutionFilter) {
  FilterConfig cfg;
  auto one = pair("one", "SELECT 1");
  ASSERT_TRUE(filter_execution(one, *db_, cfg).has_value());
  EXPECT_EQ(one.exec_digest->row_count, 1u);
  EXPECT_EQ(one.filter_trail.back().filter, "execution");
  EXPECT_EQ(one.filter_trail.back().status, StepStatus::kPass);

  auto missing = pair("q", "SELECT nope FROM singer");
  EXPECT_FALSE(filter_execution(missing, *db_, cfg).has_value());
  EXPECT_EQ(missing.filter_trail.back().status, StepStatus::kFail);
  EXPECT_EQ(missing.filter_trail.back().detail.rfind("runtime", 0), 0u);
  EXPECT_FALSE(missing.exec_digest.has_value());

  auto empty = pair("q", "SELECT name FROM singer WHERE age > 1000");
  auto rs = filter_execution(empty, *db_, cfg);
  ASSERT_TRUE(rs.has_value());
  EXPECT_EQ(empty.exec_digest->row_count, 0u);
  EXPECT_EQ(empty.filter_trail.back().status, StepStatus::kPass);
}

TEST_F(GenTest, DigestHashesOnlyFirstKRows) {
  FilterConfig cfg;
  cfg.k_rows = 2;
  auto a = pair("q", "SELECT singer_id FROM singer ORDER BY singer_id");
  auto b = pair("q", "SELECT singer_id FROM singer ORDER BY singer_id LIMIT 2");
  filter_execution(a, *db_, cfg);
  filter_execution(b, *db_, cfg);
  EXPECT_EQ(a.exec_digest->first_k_hash, b.exec_digest->first_k_hash);
  EXPECT_NE(a.exec_digest->row_count, b.exec_digest->row_count);
  EXPECT_EQ(a.exec_digest->columns, std::vector<std::string>{"singer_id"});
}

// ---- value conditions ----------------------------------------------------------------

TEST(ValueConditions, Examples) {
  EXPECT_EQ(extract_value_conditions("SELECT name FROM city WHERE city = 'Berlin' AND pop > 5", Dialect::kSqlite),
            (std::vector<std::string>{"Berlin", "5"}));
  EXPECT_TRUE(extract_value_conditions("SELECT name FROM city", Dialect::kSqlite).empty());
  EXPECT_EQ(extract_value_conditions("SELECT x FROM t WHERE y IN ('a','b')", Dialect::kSqlite),
            (std::vector<std::string>{"a", "b"}));
  auto conds = extract_value_conditions(parse_sql("SELECT x FROM t WHERE y = 'a' AND z < -2.5", Dialect::kSqlite));
  ASSERT_EQ(conds.size(), 2u);
  EXPECT_FALSE(conds[0].numeric);
  EXPECT_TRUE(conds[1].numeric);
  EXPECT_EQ(conds[1].text, "-2.5");
}

TEST(ValueConditions, OracleFixtures) {
  auto cases = read_jsonl(fixtures_dir() / "generation" / "value_conditions.jsonl");
  ASSERT_EQ(cases.size(), 30u);
  for (const auto& c : cases) {
    Dialect d = dialect_from_string(c["dialect"].get<std::string>());
    EXPECT_EQ(extract_value_conditions(c["sql"].get<std::string>(), d), c["expected"].get<std::vector<std::string>>())
        << c["sql"];
  }
}

// ---- edit distance ----------------------------------------------------------------

TEST(EditDistance, KnownValues) {
  EXPECT_EQ(levenshtein("Munich", "Berlin"), 6u);
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("abc", "abc"), 0u);
  EXPECT_EQ(levenshtein("Müller", "Muller"), 1u);  // code points, not bytes
  std::string long_a(100, 'a'), long_b(98, 'a');
  EXPECT_EQ(levenshtein(long_a, long_b), 2u);
}

TEST(EditDistance, MatchesNaiveRecursionUpToLength5) {
  std::vector<std::string> all = {""};
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].size() == 5) continue;
    for (char c : {'a', 'b', 'c'}) all.push_back(all[i] + c);
  }
  ASSERT_EQ(all.size(), 364u);
  for (const auto& a : all) {
    for (const auto& b : all) {
      if (a.size() + b.size() > 8) continue;  // the naive recursion is exponential
      ASSERT_EQ(levenshtein(a, b), levenshtein_naive(a, b)) << a << " / " << b;
    }
  }
}

// ---- mismatch filter ----------------------------------------------------------------

TEST(Mismatch, SpecExamples) {
  TrigramEmbedder emb;
  auto r = mismatch_check("customers in Berlin", {{"Berlin", false}}, emb, 2, 0.6);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.scores[0].distance, 0u);
  r = mismatch_check("customers in Berlin", {{"Munich", false}}, emb, 2, 0.6);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.scores[0].distance, 2u);
  r = mismatch_check("schools in Alameda County", {{"Alameda", false}}, emb, 2, 0.6);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.scores[0].best_gram, "Alameda");
}

TEST(Mismatch, NumericLiteralsNeedExactToken) {
  TrigramEmbedder emb;
  EXPECT_TRUE(mismatch_check("Singers older than 30.", {{"30", true}}, emb, 2, 0.6).passed);
  EXPECT_FALSE(mismatch_check("Singers older than 31", {{"30", true}}, emb, 2, 0.6).passed);
  EXPECT_TRUE(mismatch_check("Temperatures below -5 degrees", {{"-5", true}}, emb, 2, 0.6).passed);
  EXPECT_TRUE(mismatch_check("Anything", {}, emb, 2, 0.6).passed);
  EXPECT_TRUE(mismatch_check("Blank names", {{"", false}}, emb, 2, 0.6).passed);
}

TEST(Mismatch, OracleLabels) {
  TrigramEmbedder emb;
  auto cases = read_jsonl(fixtures_dir() / "generation" / "mismatch_pairs.jsonl");
  ASSERT_EQ(cases.size(), 20u);
  for (const auto& c : cases) {
    auto conds = extract_value_conditions(parse_sql(c["sql"].get<std::string>(), Dialect::kSqlite));
    auto r = mismatch_check(c["question"].get<std::string>(), conds, emb, 2, 0.6);
    EXPECT_EQ(r.passed ? "PASS" : "FAIL", c["label"].get<std::string>()) << c["question"] << "\n" << r.detail();
    ASSERT_EQ(r.scores.size(), c["conditions"].size());
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
      const auto& exp = c["conditions"][i];
      if (exp["d"].is_null()) {
        EXPECT_EQ(r.scores[i].distance, std::numeric_limits<std::size_t>::max());
      } else {
        EXPECT_EQ(r.scores[i].distance, exp["d"].get<std::size_t>());
      }
      EXPECT_NEAR(r.scores[i].similarity, exp["s"].get<double>(), 1e-6);
    }
  }
}

TEST(Mismatch, PassIsReCheckable) {
  TrigramEmbedder emb;
  std::mt19937_64 rng(11);
  const std::vector<std::string> vocab = {"Berlin", "Paris", "paris", "Pariss", "New", "York", "old", "singer"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string q;
    for (int i = 0; i < 5; ++i) q += vocab[rng() % vocab.size()] + " ";
    std::vector<ValueCondition> conds = {{vocab[rng() % vocab.size()], false}};
    auto r = mismatch_check(q, conds, emb, 2, 0.6);
    if (!r.passed) continue;
    for (const auto& s : r.scores) EXPECT_TRUE(s.distance <= 2 && s.similarity >= 0.6);
  }
}

TEST(Mismatch, QuestionWords) {
  EXPECT_EQ(question_words("Who's from \"Paris\"? (and -5, 3.5.)"),
            (std::vector<std::string>{"Who's", "from", "Paris", "and", "-5", "3.5"}));
}

// ---- aggregation filter ----------------------------------------------------------------

TEST(Aggregation, Examples) {
  auto check = [](const std::string& sql) {
    CandidatePair p;
    p.sql = sql;
    return filter_aggregation(p);
  };
  EXPECT_FALSE(check("SELECT AVG(average_age) FROM singer"));
  EXPECT_TRUE(check("SELECT AVG(age) FROM singer"));
  EXPECT_FALSE(check("SELECT MAX(max_speed) FROM car"));
  EXPECT_FALSE(check("SELECT SUM(T1.total_points) FROM team AS T1"));
  EXPECT_FALSE(check("SELECT name FROM t WHERE x > (SELECT MIN(minAge) FROM t)"));
  EXPECT_TRUE(check("SELECT COUNT(*) FROM singer"));
  EXPECT_TRUE(check("SELECT MAX(maximal) FROM t"));     // no whole-word match
  EXPECT_TRUE(check("SELECT AVG(accounts) FROM t"));    // "count" inside a word
  EXPECT_TRUE(check("SELECT average_age FROM singer"));  // no aggregate call
}

// ---- finalize ----------------------------------------------------------------

TEST(Finalize, NormalizeSql) {
  EXPECT_EQ(normalize_sql("select  name\n from singer -- c\n where x = 'It'", Dialect::kSqlite),
            "SELECT name FROM singer WHERE x = 'It'");
  EXPECT_NE(normalize_sql("SELECT a FROM t WHERE x = 'a'", Dialect::kSqlite),
            normalize_sql("SELECT a FROM t WHERE x = 'b'", Dialect::kSqlite));
}

TEST(Finalize, DedupAndLength) {
  auto mk = [](std::string q, std::string sql) {
    CandidatePair p;
    p.question = std::move(q);
    p.sql = std::move(sql);
    return p;
  };
  auto out = finalize_batch({mk("a", "SELECT 1"), mk("b", "select   1")}, 60);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].question, "a");

  std::string long_q;
  for (int i = 0; i < 61; ++i) long_q += "w ";
  std::string ok_q;
  for (int i = 0; i < 60; ++i) ok_q += "w ";
  EXPECT_TRUE(finalize_batch({mk(long_q, "SELECT 2")}, 60).empty());
  EXPECT_EQ(finalize_batch({mk(ok_q, "SELECT 2")}, 60).size(), 1u);
}

TEST(Finalize, OrderIndependentAndIdempotent) {
  std::mt19937_64 rng(2);
  std::vector<CandidatePair> pairs;
  for (int i = 0; i < 60; ++i) {
    CandidatePair p;
    std::size_t words = 2 + rng() % 4 * 30;
    p.question.clear();
    for (std::size_t k = 0; k < words; ++k) p.question += "w ";
    p.sql = "SELECT " + std::to_string(rng() % 15) + (rng() % 2 ? "" : "  ");
    pairs.push_back(p);
  }
  auto sql_set = [](const std::vector<CandidatePair>& ps) {
    std::set<std::string> s;
    for (const auto& p : ps) s.insert(normalize_sql(p.sql, p.dialect));
    return s;
  };
  auto base = finalize_batch(pairs, 60);
  for (int t = 0; t < 20; ++t) {
    auto shuffled = pairs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(sql_set(finalize_batch(shuffled, 60)), sql_set(base));
  }
  auto again = finalize_batch(base, 60);
  ASSERT_EQ(again.size(), base.size());
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(again[i].sql, base[i].sql);
}

TEST(CandidatePairJson, RoundTrip) {
  CandidatePair p;
  p.id = "q-1";
  p.db_id = "concerts";
  p.template_id = "t-1";
  p.question = "Q?";
  p.sql = "SELECT 1";
  p.complexity = Complexity::kModerate;
  p.filter_trail = {{"parse", StepStatus::kPass, ""}, {"quality", StepStatus::kFixed, "sql fixed"}};
  json j = json::parse(p.to_json());
  std::set<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.insert(it.key());
  EXPECT_EQ(keys, (std::set<std::string>{"id", "dialect", "db_id", "question", "sql", "template_id", "complexity",
                                         "filter_trail"}));
  auto back = CandidatePair::from_json(p.to_json());
  EXPECT_EQ(back.to_json(), p.to_json());
}

// ---- quality ----------------------------------------------------------------

TEST(Quality, ResultRendering) {
  ResultSet empty;
  empty.columns = {"name", "age"};
  EXPECT_EQ(render_result_prompt(empty, 5), "name | age\n(0 rows)\n");

  ResultSet ten;
  ten.columns = {"n"};
  for (int i = 0; i < 10; ++i) ten.rows.push_back({SqlValue::integer(i)});
  EXPECT_EQ(render_result_prompt(ten, 5), "n\n0\n1\n2\n3\n4\n(truncated)\n");

  ResultSet mixed;
  mixed.columns = {"a", "b", "c", "d"};
  mixed.rows.push_back({SqlValue::str("x\ny"), SqlValue::null(), SqlValue::real("2.5"), SqlValue::integer(-1)});
  EXPECT_EQ(render_result_prompt(mixed, 5), read_file(fixtures_dir() / "generation" / "result_prompt_golden.txt"));
}

TEST(Quality, VerdictParsing) {
  auto v = parse_quality_verdict(R"({"reasoning": "fine", "fixing_needed": "no"})");
  EXPECT_FALSE(v.fixing_needed);
  v = parse_quality_verdict(R"({"reasoning": "r", "fixing_needed": true, "fixed_question": "Better?"})");
  EXPECT_TRUE(v.fixing_needed);
  EXPECT_EQ(*v.fixed_question, "Better?");
  EXPECT_FALSE(v.fixed_sql_query.has_value());
  EXPECT_THROW(parse_quality_verdict(R"({"reasoning": "r", "fixing_needed": "maybe"})"), JsonError);
  EXPECT_THROW(parse_quality_verdict(R"({"reasoning": "r", "fixing_needed": "YES", "fixed_question": ""})"),
               JsonError);
  EXPECT_THROW(parse_quality_verdict(R"({"reasoning": "r"})"), JsonError);
}

TEST_F(GenTest, QualityPassLeavesPairUnchanged) {
  auto llm = client(sqlgen::testing::synthesizing_mock("mock:gen"));
  FilterConfig cfg;
  auto p = pair("Which singers are from France?", "SELECT name FROM singer WHERE country = 'France'");
  auto rs = filter_execution(p, *db_, cfg);
  auto before = p;
  auto q = quality_check(p, *rs, sampled_, *db_, *llm, cfg);
  EXPECT_EQ(q.outcome, QualityOutcome::kPass);
  EXPECT_EQ(p.question, before.question);
  EXPECT_EQ(p.sql, before.sql);
  EXPECT_EQ(p.filter_trail.back().filter, "quality");
  EXPECT_EQ(p.filter_trail.back().status, StepStatus::kPass);
  EXPECT_EQ(llm->requests(RoleKind::kJudge), 1);
  EXPECT_EQ(llm->requests(RoleKind::kGenerator), 0);
}

TEST_F(GenTest, QualityFixFailingExecutionIsDiscarded) {
  auto judge = std::make_unique<FnModel>([](const std::string&) {
    return R"({"reasoning": "wrong column", "fixing_needed": "YES", "fixed_sql_query": "SELECT nation FROM singer"})";
  });
  auto llm = client(sqlgen::testing::synthesizing_mock("mock:gen"), std::move(judge));
  FilterConfig cfg;
  auto p = pair("List singer names", "SELECT name FROM singer");
  auto rs = filter_execution(p, *db_, cfg);
  auto q = quality_check(p, *rs, sampled_, *db_, *llm, cfg);
  EXPECT_EQ(q.outcome, QualityOutcome::kDiscard);
  EXPECT_EQ(q.reason, "RefilterFail:execution");
  json log = json::parse(quality_log_json("id", q));
  EXPECT_EQ(log["outcome"]["status"], "DISCARD");
  EXPECT_EQ(log["verdict"]["fixed_sql_query"], "SELECT nation FROM singer");
}

TEST_F(GenTest, QualityRewritesAmbiguousQuestion) {
  std::string seen_prompt;
  auto judge = std::make_unique<FnModel>([&](const std::string& prompt) {
    seen_prompt = prompt;
    return R"({"reasoning": "The question does not say which country.", "fixing_needed": "YES",
               "fixed_question": "What are the names of singers from France?", "fixed_sql_query": ""})";
  });
  auto llm = client(sqlgen::testing::synthesizing_mock("mock:gen"), std::move(judge));
  FilterConfig cfg;
  auto p = pair("Which singers are from there?", "SELECT name FROM singer WHERE country = 'France'");
  auto rs = filter_execution(p, *db_, cfg);
  auto q = quality_check(p, *rs, sampled_, *db_, *llm, cfg);
  ASSERT_EQ(q.outcome, QualityOutcome::kFixed) << p.filter_trail.back().detail;
  EXPECT_EQ(p.question, "What are the names of singers from France?");
  EXPECT_EQ(p.sql, "SELECT name FROM singer WHERE country = 'France'");
  EXPECT_EQ(p.id, pair_id(p.db_id, p.template_id, p.question, p.sql));
  std::vector<std::string> names;
  for (const auto& s : p.filter_trail) names.push_back(s.filter);
  EXPECT_EQ(names, (std::vector<std::string>{"execution", "quality", "recheck_parse", "recheck_execution",
                                             "recheck_mismatch", "recheck_aggregation"}));
  EXPECT_NE(seen_prompt.find("SQLite SQL Query Result:\nname\n"), std::string::npos);
  EXPECT_NE(seen_prompt.find("Question:\nWhich singers are from there?\n"), std::string::npos);
}

TEST_F(GenTest, QualityJudgeErrors) {
  FilterConfig cfg;
  auto p = pair("q", "SELECT name FROM singer");
  auto rs = filter_execution(p, *db_, cfg);
  auto bad = client(sqlgen::testing::synthesizing_mock("mock:gen"),
                    std::make_unique<FnModel>([](const std::string&) { return "looks fine to me"; }));
  EXPECT_EQ(quality_check(p, *rs, sampled_, *db_, *bad, cfg).reason, "JsonError");
  auto down = client(sqlgen::testing::synthesizing_mock("mock:gen"), std::make_unique<MockModel>("m:j", "", false));
  EXPECT_EQ(quality_check(p, *rs, sampled_, *db_, *down, cfg).reason, "LlmError");
}

// ---- generate_dataset ----------------------------------------------------------------

TEST_F(GenTest, BetaZeroIsEmpty) {
  auto llm = client(sqlgen::testing::synthesizing_mock("mock:gen"));
  GenerationOptions opt;
  opt.beta = 0;
  auto r = generate_dataset(seed_pool(), {{profile_, url_}}, *llm, opt);
  EXPECT_TRUE(r.reached_target);
  EXPECT_TRUE(r.state.accepted.empty());
  EXPECT_EQ(llm->requests(RoleKind::kGenerator), 0);
}

TEST_F(GenTest, CooperativeMockReachesBeta) {
  auto llm = client(sqlgen::testing::synthesizing_mock("mock:gen"));
  GenerationOptions opt;
  opt.beta = 10;
  opt.seed = 7;
  std::vector<std::string> quality_log;
  GenerationCallbacks cb;
  cb.on_quality = [&](const std::string& line) { quality_log.push_back(line); };
  auto r = generate_dataset(seed_pool(), {{profile_, url_}}, *llm, opt, {}, cb);
  ASSERT_TRUE(r.reached_target);
  ASSERT_EQ(r.state.accepted.size(), 10u);
  const std::vector<std::string> expected = {"parse",       "execution", "mismatch", "aggregation",
                                             "quality",     "length",    "dedup"};
  std::set<std::string> sqls;
  for (const auto& p : r.state.accepted) {
    std::vector<std::string> names;
    for (const auto& s : p.filter_trail) {
      names.push_back(s.filter);
      EXPECT_EQ(s.status, StepStatus::kPass) << s.filter << ": " << s.detail;
    }
    EXPECT_EQ(names, expected);
    EXPECT_TRUE(sqls.insert(normalize_sql(p.sql, p.dialect)).second);
    EXPECT_NO_THROW(execute(p.sql, *db_));
  }
  // funnel: attempted is non-increasing along the pipeline
  const auto& f = r.state.funnel;
  for (std::size_t i = 1; i < f.size(); ++i) EXPECT_LE(f[i].attempted, f[i - 1].attempted);
  EXPECT_EQ(f.front().attempted, r.state.attempts);
  EXPECT_EQ(f.back().attempted - f.back().failed, 10u);
  EXPECT_EQ(quality_log.size(), f[5].attempted);
}

TEST_F(GenTest, AdversarialMockExhaustsBudget) {
  auto llm = reply_with("Which singers?", "SELECT nope FROM singer");
  GenerationOptions opt;
  opt.beta = 5;
  auto r = generate_dataset(seed_pool(), {{profile_, url_}}, *llm, opt);
  EXPECT_FALSE(r.reached_target);
  EXPECT_TRUE(r.state.accepted.empty());
  EXPECT_EQ(r.state.attempts, 50u);
  EXPECT_EQ(r.state.funnel[2].name, "execution");
  EXPECT_EQ(r.state.funnel[2].attempted, 50u);
  EXPECT_EQ(r.state.funnel[2].failed, 50u);
  EXPECT_EQ(r.state.funnel[3].attempted, 0u);
}

TEST_F(GenTest, DeterministicAcrossWorkersAndResumable) {
  auto run = [&](std::size_t workers, GenerationState start, std::size_t max_attempts) {
    auto llm = client(sqlgen::testing::synthesizing_mock("mock:gen"));
    GenerationOptions opt;
    opt.beta = 8;
    opt.seed = 21;
    opt.workers = workers;
    opt.max_attempts = max_attempts;
    return generate_dataset(seed_pool(), {{profile_, url_}}, *llm, opt, std::move(start));
  };
  auto dump = [](const GenerationReport& r) {
    std::string s;
    for (const auto& p : r.state.accepted) s += p.to_json() + "\n";
    return s + r.state.checkpoint_json().dump();
  };
  auto full = run(1, {}, 80);
  EXPECT_EQ(dump(full), dump(run(3, {}, 80)));

  // Interrupt after a few attempts, then resume from the checkpoint.
  auto partial = run(1, {}, 5);
  ASSERT_LT(partial.state.accepted.size(), 8u);
  auto ckpt = partial.state.checkpoint_json();
  auto extra = partial.state.accepted;
  if (!extra.empty()) extra.push_back(extra.front());  // a pair written after the checkpoint is dropped
  auto resumed = run(2, GenerationState::from_checkpoint(ckpt, extra), 80);
  EXPECT_EQ(dump(resumed), dump(full));
}

TEST_F(GenTest, RejectsDialectMismatch) {
  auto llm = client(sqlgen::testing::synthesizing_mock("mock:gen"));
  DatabaseProfile pg = profile_;
  pg.dialect = Dialect::kPostgres;
  EXPECT_THROW(generate_dataset(seed_pool(), {{pg, url_}}, *llm, {}), std::invalid_argument);
  EXPECT_THROW(generate_dataset(seed_pool(), {}, *llm, {}), std::invalid_argument);
}
