#include <gtest/gtest.h>

#include <chrono>
#include <deque>
#include <set>

#include "json.hpp"
#include "sqlgen/db/database.hpp"
#include "sqlgen/llm/client.hpp"
#include "test_support.hpp"

using namespace sqlgen;
using nlohmann::json;
using sqlgen::testing::build_fixture_db;
using sqlgen::testing::build_sqlite_db;
using sqlgen::testing::fixtures_dir;
using sqlgen::testing::read_file;
using sqlgen::testing::TempDir;

namespace {

class DbTest : public ::testing::Test {
 protected:
  void SetUp() override {
    path_ = dir_ / "concerts.sqlite";
    build_fixture_db(path_);
    db_ = open_database("sqlite:" + path_.string());
  }
  TempDir dir_;
  std::filesystem::path path_;
  std::unique_ptr<Database> db_;
};

std::set<std::string> names(const DatabaseProfile& p) {
  std::set<std::string> out;
  for (const auto& t : p.tables) out.insert(t.name);
  return out;
}

ExecError::Kind exec_error_kind(const std::string& sql, Database& db, int timeout_ms = 5000) {
  try {
    execute(sql, db, timeout_ms);
  } catch (const ExecError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ExecError for " << sql;
  return ExecError::Kind::kRuntime;
}

}  // namespace

// ---- introspection ----------------------------------------------------------------

TEST_F(DbTest, IntrospectFixture) {
  DatabaseProfile p = db_->introspect();
  EXPECT_EQ(p.db_id, "concerts");
  EXPECT_EQ(p.dialect, Dialect::kSqlite);
  ASSERT_EQ(p.tables.size(), 3u);  // the view is ignored
  EXPECT_EQ(p.tables[0].name, "concert");
  EXPECT_EQ(p.tables[1].name, "singer");
  EXPECT_EQ(p.tables[2].name, "stadium");
  const TableInfo& concert = p.tables[0];
  ASSERT_EQ(concert.columns.size(), 6u);
  EXPECT_TRUE(concert.columns[0].is_pk);
  EXPECT_EQ(concert.column("stadium_id")->fks, (std::vector<FkRef>{{"stadium", "stadium_id"}}));
  EXPECT_EQ(concert.column("singer_id")->fks, (std::vector<FkRef>{{"singer", "singer_id"}}));
  EXPECT_TRUE(p.tables[1].column("name")->not_null);
  EXPECT_EQ(p.tables[2].column("average_attendance")->type, "REAL");
}

TEST(Db, EmptyDatabaseHasNoTables) {
  TempDir dir;
  build_sqlite_db(dir / "empty.sqlite", "");
  auto db = open_database("sqlite:" + (dir / "empty.sqlite").string());
  DatabaseProfile p = db->introspect();
  EXPECT_TRUE(p.tables.empty());
  EXPECT_EQ(render_schema_prompt(p), "");
}

TEST_F(DbTest, DdlReparsesToSameTables) {
  DatabaseProfile p = db_->introspect();
  EXPECT_EQ(parse_ddl(p.ddl, Dialect::kSqlite), p.tables);
}

TEST_F(DbTest, DanglingForeignKeysAreDropped) {
  TempDir dir;
  build_sqlite_db(dir / "fk.sqlite",
                  "CREATE TABLE a (id INTEGER PRIMARY KEY, b_id INTEGER REFERENCES missing(id), "
                  "c_id INTEGER REFERENCES a(nope));");
  auto db = open_database("sqlite:" + (dir / "fk.sqlite").string());
  auto p = db->introspect();
  for (const auto& c : p.tables.at(0).columns) EXPECT_TRUE(c.fks.empty()) << c.name;
}

TEST(Db, ParseDdlHandlesInlineConstraints) {
  auto tables = parse_ddl(
      "CREATE TABLE IF NOT EXISTS \"order\" (id INTEGER PRIMARY KEY AUTOINCREMENT, "
      "customer VARCHAR(20) NOT NULL DEFAULT 'x' REFERENCES customer, total NUMERIC(10, 2) CHECK (total > 0));\n"
      "CREATE TABLE customer (cid INTEGER, name TEXT, PRIMARY KEY (cid));",
      Dialect::kSqlite);
  ASSERT_EQ(tables.size(), 2u);
  EXPECT_EQ(tables[0].name, "order");
  EXPECT_TRUE(tables[0].columns[0].is_pk);
  EXPECT_EQ(tables[0].columns[1].type, "VARCHAR(20)");
  EXPECT_TRUE(tables[0].columns[1].not_null);
  EXPECT_EQ(tables[0].columns[1].fks, (std::vector<FkRef>{{"customer", "cid"}}));
  EXPECT_EQ(tables[0].columns[2].type, "NUMERIC(10, 2)");
  EXPECT_THROW(parse_ddl("CREATE TABLE t (a WIBBLE)", Dialect::kBigQuery), std::runtime_error);
  EXPECT_THROW(parse_ddl("CREATE TABLE t (a INTEGER", Dialect::kSqlite), std::runtime_error);
}

// ---- sampling ----------------------------------------------------------------

TEST(Db, SampleRowEdgeCases) {
  TempDir dir;
  build_sqlite_db(dir / "s.sqlite",
                  "CREATE TABLE one (a INTEGER, b TEXT); INSERT INTO one VALUES (42, 'only');"
                  "CREATE TABLE none (a INTEGER);");
  auto db = open_database("sqlite:" + (dir / "s.sqlite").string());
  auto p = db->introspect();
  std::mt19937_64 rng(1);
  EXPECT_EQ(sample_row(p, "one", *db, rng), (Row{SqlValue::integer(42), SqlValue::str("only")}));
  EXPECT_THROW(sample_row(p, "none", *db, rng), NoRows);
  EXPECT_THROW(sample_row(p, "missing", *db, rng), std::invalid_argument);
}

TEST(Db, SampleRowCoversHundredRowTable) {
  TempDir dir;
  build_sqlite_db(dir / "h.sqlite",
                  "CREATE TABLE h (n INTEGER);"
                  "WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c WHERE x < 100) "
                  "INSERT INTO h SELECT x FROM c;");
  auto db = open_database("sqlite:" + (dir / "h.sqlite").string());
  auto p = db->introspect();
  std::mt19937_64 rng(2024);
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(sample_row(p, "h", *db, rng).at(0).text);
  EXPECT_GE(seen.size(), 50u);

  std::mt19937_64 a(9), b(9);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_row(p, "h", *db, a), sample_row(p, "h", *db, b));
}

TEST_F(DbTest, WithSampleRowsConformsToColumnCount) {
  auto p = db_->introspect();
  std::mt19937_64 rng(3);
  auto s = with_sample_rows(p, *db_, rng);
  for (const auto& t : s.tables) {
    ASSERT_TRUE(s.sample_rows.at(t.name).has_value());
    EXPECT_EQ(s.sample_rows.at(t.name)->size(), t.columns.size());
  }
}

// ---- execution ----------------------------------------------------------------

TEST_F(DbTest, SelectOne) {
  ResultSet rs = execute("SELECT 1", *db_);
  ASSERT_EQ(rs.rows.size(), 1u);
  ASSERT_EQ(rs.columns.size(), 1u);
  EXPECT_EQ(rs.rows[0][0], SqlValue::integer(1));
  EXPECT_FALSE(rs.truncated);
  EXPECT_GE(rs.elapsed_ms, 0.0);
}

TEST_F(DbTest, ErrorKinds) {
  EXPECT_EQ(exec_error_kind("SELECT * FROM missing_table", *db_), ExecError::Kind::kRuntime);
  EXPECT_EQ(exec_error_kind("SELECT nope FROM singer", *db_), ExecError::Kind::kRuntime);
  EXPECT_EQ(exec_error_kind("SELECT FROM WHERE", *db_), ExecError::Kind::kSyntax);
  EXPECT_EQ(exec_error_kind("DELETE FROM singer", *db_), ExecError::Kind::kNonSelect);
  EXPECT_EQ(exec_error_kind("DROP TABLE singer", *db_), ExecError::Kind::kNonSelect);
  EXPECT_NE(exec_error_kind("SELECT 1; DROP TABLE singer", *db_), ExecError::Kind::kRuntime);
  EXPECT_EQ(execute("SELECT COUNT(*) FROM singer", *db_).rows[0][0], SqlValue::integer(8));
}

TEST_F(DbTest, ConnectionIsReadOnlyEvenPastTheGate) {
  EXPECT_THROW(db_->run_select("DELETE FROM singer", 1000, 10), ExecError);
  EXPECT_EQ(execute("SELECT COUNT(*) FROM singer", *db_).rows[0][0], SqlValue::integer(8));
}

TEST_F(DbTest, RunawayQueryTimesOut) {
  const int timeout = 300;
  auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(exec_error_kind("WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c) SELECT COUNT(*) FROM c",
                            *db_, timeout),
            ExecError::Kind::kTimeout);
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  EXPECT_LE(elapsed.count(), timeout + 200);
  // The connection stays usable afterwards.
  EXPECT_EQ(execute("SELECT 2", *db_).rows.size(), 1u);
}

TEST_F(DbTest, TruncationFlagMatchesCardinality) {
  // singer has exactly 8 rows
  auto rs = execute("SELECT name FROM singer", *db_, 5000, 8);
  EXPECT_EQ(rs.rows.size(), 8u);
  EXPECT_FALSE(rs.truncated);
  rs = execute("SELECT name FROM singer", *db_, 5000, 7);
  EXPECT_EQ(rs.rows.size(), 7u);
  EXPECT_TRUE(rs.truncated);
  rs = execute("SELECT name FROM singer", *db_, 5000, 100);
  EXPECT_EQ(rs.rows.size(), 8u);
  EXPECT_FALSE(rs.truncated);
  rs = execute("SELECT name FROM singer WHERE age > 100", *db_, 5000, 0);
  EXPECT_TRUE(rs.rows.empty());
  EXPECT_FALSE(rs.truncated);
  for (const auto& row : execute("SELECT * FROM concert", *db_).rows) EXPECT_EQ(row.size(), 6u);
}

TEST_F(DbTest, ValueTypes) {
  auto rs = execute("SELECT 1, 2.5, 'x', NULL, X'0A'", *db_);
  ASSERT_EQ(rs.rows.size(), 1u);
  EXPECT_EQ(rs.rows[0][0].type, SqlValue::Type::kInteger);
  EXPECT_EQ(rs.rows[0][1], SqlValue::real("2.5"));
  EXPECT_EQ(rs.rows[0][2], SqlValue::str("x"));
  EXPECT_TRUE(rs.rows[0][3].is_null());
  EXPECT_EQ(rs.rows[0][4].type, SqlValue::Type::kBlob);
  EXPECT_EQ(sql_literal(rs.rows[0][4]), "X'0A'");
}

// ---- schema prompt ----------------------------------------------------------------

TEST_F(DbTest, SchemaPromptGolden) {
  DatabaseProfile p = db_->introspect();
  for (const auto& t : p.tables) {
    auto rs = execute("SELECT * FROM " + t.name + " LIMIT 1", *db_);
    p.sample_rows[t.name] = rs.rows.at(0);
  }
  EXPECT_EQ(render_schema_prompt(p), read_file(fixtures_dir() / "db" / "fixture_schema_prompt.txt"));
  EXPECT_EQ(render_schema_prompt(p), render_schema_prompt(p));
}

TEST(Db, SchemaPromptValueRendering) {
  DatabaseProfile p;
  p.tables.push_back({"t", {{"a", "TEXT"}, {"b", "INTEGER"}, {"c", "TEXT"}}});
  p.sample_rows["t"] = Row{SqlValue::null(), SqlValue::integer(-3), SqlValue::str("line\nbreak " + std::string(90, 'z'))};
  std::string out = render_schema_prompt(p);
  EXPECT_NE(out.find("-- sample row: (NULL, -3, 'line break " + std::string(69, 'z') + "...')\n"), std::string::npos)
      << out;
  p.sample_rows["t"] = std::nullopt;  // empty table
  EXPECT_NE(render_schema_prompt(p).find("-- sample row: (NULL, NULL, NULL)\n"), std::string::npos);
}

// ---- migration ----------------------------------------------------------------

TEST_F(DbTest, MigrateIdentity) {
  auto p = db_->introspect();
  EXPECT_EQ(migrate_ddl(p, Dialect::kSqlite), p.ddl);
}

TEST_F(DbTest, MigrateToPostgres) {
  auto p = db_->introspect();
  std::string ddl = migrate_ddl(p, Dialect::kPostgres);
  auto tables = parse_ddl(ddl, Dialect::kPostgres);
  ASSERT_EQ(tables.size(), 3u);
  const ColumnInfo* id = tables[2].column("stadium_id");
  ASSERT_NE(id, nullptr);
  EXPECT_EQ(id->type, "BIGINT");
  EXPECT_TRUE(id->is_pk);
  EXPECT_EQ(tables[2].column("average_attendance")->type, "DOUBLE PRECISION");
  EXPECT_EQ(tables[1].column("is_male")->type, "BOOLEAN");
  EXPECT_EQ(tables[0].column("stadium_id")->fks, (std::vector<FkRef>{{"stadium", "stadium_id"}}));
}

TEST_F(DbTest, MigrateToBigQuery) {
  auto p = db_->introspect();
  std::string ddl = migrate_ddl(p, Dialect::kBigQuery);
  EXPECT_NE(ddl.find("PRIMARY KEY (stadium_id) NOT ENFORCED"), std::string::npos);
  auto tables = parse_ddl(ddl, Dialect::kBigQuery);
  EXPECT_EQ(tables[2].column("name")->type, "STRING");
  EXPECT_EQ(tables[2].column("capacity")->type, "INT64");
}

TEST(Db, MigrateTypeTable) {
  EXPECT_EQ(map_column_type("INTEGER", Dialect::kPostgres), "BIGINT");
  EXPECT_EQ(map_column_type("varchar(255)", Dialect::kPostgres), "VARCHAR(255)");
  EXPECT_EQ(map_column_type("number", Dialect::kBigQuery), "NUMERIC");
  EXPECT_EQ(map_column_type("DATETIME", Dialect::kBigQuery), "DATETIME");
  EXPECT_EQ(map_column_type("DATETIME", Dialect::kPostgres), "TIMESTAMP");
  EXPECT_EQ(map_column_type("BLOB", Dialect::kPostgres), "BYTEA");
  EXPECT_EQ(map_column_type("whatever", Dialect::kSqlite), "whatever");
  try {
    map_column_type("BLOB", Dialect::kBigQuery);
    FAIL();
  } catch (const MigrateError& e) {
    EXPECT_EQ(e.construct(), "BLOB");
  }
  EXPECT_THROW(map_column_type("GEOMETRY", Dialect::kPostgres), MigrateError);
}

TEST(Db, MigrateBlobTableToBigQueryFails) {
  TempDir dir;
  build_sqlite_db(dir / "b.sqlite", "CREATE TABLE files (id INTEGER PRIMARY KEY, data BLOB);");
  auto db = open_database("sqlite:" + (dir / "b.sqlite").string());
  auto p = db->introspect();
  EXPECT_THROW(migrate_ddl(p, Dialect::kBigQuery), MigrateError);
  EXPECT_NO_THROW(migrate_ddl(p, Dialect::kPostgres));
}

// ---- connection URLs and other backends ----------------------------------------------------------------

TEST(Db, ConnectionUrls) {
  TempDir dir;
  build_fixture_db(dir / "c.sqlite");
  EXPECT_EQ(open_database((dir / "c.sqlite").string())->db_id(), "c");
  EXPECT_EQ(open_database("sqlite://" + (dir / "c.sqlite").string())->db_id(), "c");
  EXPECT_THROW(open_database("sqlite:" + (dir / "missing.sqlite").string()), ConnError);
  EXPECT_THROW(open_database("mysql://localhost/db"), ConnError);
  EXPECT_THROW(open_database("parseonly+oracle:" + (dir / "c.sqlite").string()), ConnError);
  EXPECT_THROW(open_database(""), ConnError);
}

TEST(Db, ParseOnlyBackend) {
  TempDir dir;
  build_fixture_db(dir / "c.sqlite");
  auto db = open_database("parseonly+bigquery:" + (dir / "c.sqlite").string());
  EXPECT_TRUE(db->parse_only());
  EXPECT_EQ(db->dialect(), Dialect::kBigQuery);
  auto p = db->introspect();
  EXPECT_EQ(p.dialect, Dialect::kBigQuery);
  EXPECT_EQ(p.tables[2].column("capacity")->type, "INT64");
  auto rs = execute("SELECT name FROM stadium QUALIFY ROW_NUMBER() OVER (ORDER BY capacity) = 1", *db);
  EXPECT_TRUE(rs.parse_only);
  EXPECT_EQ(exec_error_kind("SELECT name FROM stadium WHERE name GLOB 'a*'", *db), ExecError::Kind::kSyntax);
  std::mt19937_64 rng(1);
  EXPECT_EQ(sample_row(p, "singer", *db, rng).size(), 5u);
}

namespace {

class GatewayStub : public Transport {
 public:
  HttpResponse post(const HttpRequest& r) override {
    requests.push_back(r);
    json body = json::parse(r.body);
    if (r.url.ends_with("/schema")) {
      return {200,
              R"({"tables":[{"name":"t","columns":[{"name":"id","type":"INT64","pk":true},
                 {"name":"p","type":"INT64","fks":[{"table":"t","column":"id"}]},
                 {"name":"q","type":"INT64","fks":[{"table":"gone","column":"id"}]}]}]})",
              ""};
    }
    if (r.url.ends_with("/sample")) return {200, R"({"row":[1, null, 3]})", ""};
    std::string sql = body["sql"];
    if (sql.find("boom") != std::string::npos) return {400, R"({"error":{"kind":"runtime","message":"boom"}})", ""};
    if (sql.find("slow") != std::string::npos) return {200, R"({"error":{"kind":"timeout","message":"slow"}})", ""};
    return {200, R"({"columns":["a","b"],"rows":[[1,"x"],[2.5,null],[3,true]],"truncated":false})", ""};
  }
  std::vector<HttpRequest> requests;
};

}  // namespace

TEST(Db, GatewayBackend) {
  auto stub = std::make_shared<GatewayStub>();
  auto db = open_database("gateway+bigquery://localhost:8808/shop", stub);
  EXPECT_EQ(db->db_id(), "shop");
  EXPECT_EQ(db->dialect(), Dialect::kBigQuery);
  auto p = db->introspect();
  EXPECT_EQ(stub->requests.at(0).url, "http://localhost:8808/shop/schema");
  ASSERT_EQ(p.tables.size(), 1u);
  EXPECT_TRUE(p.tables[0].columns[0].is_pk);
  EXPECT_EQ(p.tables[0].columns[1].fks.size(), 1u);
  EXPECT_TRUE(p.tables[0].columns[2].fks.empty());

  auto rs = execute("SELECT a, b FROM t", *db, 1000, 2);
  ASSERT_EQ(rs.rows.size(), 2u);
  EXPECT_TRUE(rs.truncated);
  EXPECT_EQ(rs.rows[0][1], SqlValue::str("x"));
  EXPECT_EQ(rs.rows[1][0].type, SqlValue::Type::kReal);
  EXPECT_TRUE(rs.rows[1][1].is_null());
  json sent = json::parse(stub->requests.back().body);
  EXPECT_EQ(sent["row_limit"], 2);
  EXPECT_EQ(sent["timeout_ms"], 1000);

  EXPECT_EQ(exec_error_kind("SELECT boom FROM t", *db), ExecError::Kind::kRuntime);
  EXPECT_EQ(exec_error_kind("SELECT slow FROM t", *db), ExecError::Kind::kTimeout);
  std::mt19937_64 rng(1);
  EXPECT_EQ(sample_row(p, "t", *db, rng).size(), 3u);
}

TEST(Db, ProfileJsonRoundTrip) {
  TempDir dir;
  build_fixture_db(dir / "c.sqlite");
  auto p = open_database("sqlite:" + (dir / "c.sqlite").string())->introspect();
  auto q = profile_from_json(profile_to_json(p));
  EXPECT_EQ(q.tables, p.tables);
  EXPECT_EQ(q.ddl, p.ddl);
  EXPECT_EQ(q.db_id, p.db_id);
}
