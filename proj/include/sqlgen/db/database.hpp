#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sqlgen/dialect/dialect.hpp"

namespace sqlgen {

class Transport;

struct SqlValue {
  enum class Type { kNull, kInteger, kReal, kText, kBlob };
  Type type = Type::kNull;
  std::string text;  // decimal text for numbers, raw bytes for text/blob

  static SqlValue null() { return {}; }
  static SqlValue integer(std::int64_t v) { return {Type::kInteger, std::to_string(v)}; }
  static SqlValue real(std::string t) { return {Type::kReal, std::move(t)}; }
  static SqlValue str(std::string t) { return {Type::kText, std::move(t)}; }
  bool is_null() const { return type == Type::kNull; }
  friend bool operator==(const SqlValue&, const SqlValue&) = default;
};

using Row = std::vector<SqlValue>;

/// SQL literal text for a value: NULL, numbers verbatim, 'quoted' text, X'..' blobs.
std::string sql_literal(const SqlValue& v);

struct FkRef {
  std::string table;
  std::string column;
  friend bool operator==(const FkRef&, const FkRef&) = default;
};

struct ColumnInfo {
  std::string name;
  std::string type;  // declared type, as written
  bool is_pk = false;
  bool not_null = false;
  std::vector<FkRef> fks;
  friend bool operator==(const ColumnInfo&, const ColumnInfo&) = default;
};

struct TableInfo {
  std::string name;
  std::vector<ColumnInfo> columns;
  const ColumnInfo* column(std::string_view name) const;
  friend bool operator==(const TableInfo&, const TableInfo&) = default;
};

struct DatabaseProfile {
  std::string db_id;
  Dialect dialect = Dialect::kSqlite;
  std::vector<TableInfo> tables;  // sorted by name
  std::string ddl;                // canonical CREATE TABLE statements
  std::map<std::string, std::optional<Row>> sample_rows;  // nullopt = table had no rows

  const TableInfo* table(std::string_view name) const;
};

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  bool truncated = false;
  double elapsed_ms = 0;
  bool parse_only = false;  // the engine was not available; only the statement was validated
};

class ExecError : public std::runtime_error {
 public:
  enum class Kind { kSyntax, kRuntime, kTimeout, kNonSelect };
  ExecError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};
std::string_view to_string(ExecError::Kind k);

class ConnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MigrateError : public std::runtime_error {
 public:
  MigrateError(std::string construct, const std::string& message)
      : std::runtime_error(message), construct_(std::move(construct)) {}
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

inline constexpr int kDefaultTimeoutMs = 5000;
inline constexpr std::size_t kDefaultRowLimit = 100;

// One connection to a target database. Not shareable across threads; open one
// per worker with open_database().
class Database {
 public:
  virtual ~Database() = default;
  virtual Dialect dialect() const = 0;
  virtual std::string db_id() const = 0;
  virtual std::string url() const = 0;
  /// True when queries are validated but not executed.
  virtual bool parse_only() const { return false; }

  virtual DatabaseProfile introspect() = 0;
  /// Uniform random row of `table` (seeded by rng); nullopt when the table is empty.
  virtual std::optional<Row> sample_row(const std::string& table, std::mt19937_64& rng) = 0;
  /// Runs a statement that already passed the SELECT gate.
  virtual ResultSet run_select(const std::string& sql, int timeout_ms, std::size_t row_limit) = 0;
};

/// Connection URLs:
///   sqlite:PATH | sqlite://PATH | PATH.sqlite / PATH.db      real SQLite engine (read-only)
///   parseonly+postgresql:PATH | parseonly+bigquery:PATH       schema and rows from a SQLite file,
///                                                             queries only validated
///   gateway+postgresql://HOST:PORT/DB | gateway+bigquery://... JSON-over-HTTP SQL gateway
/// Throws ConnError.
std::unique_ptr<Database> open_database(const std::string& url, std::shared_ptr<Transport> transport = nullptr);

/// Read-only SELECT execution: the statement must parse as a single SELECT in
/// the connection's dialect (ExecError{NonSelect|Syntax} otherwise), runs with
/// a deadline, and returns at most row_limit rows with `truncated` set iff
/// more rows existed.
ResultSet execute(const std::string& sql, Database& db, int timeout_ms = kDefaultTimeoutMs,
                  std::size_t row_limit = kDefaultRowLimit);

class NoRows : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws NoRows for an empty table and std::invalid_argument for an unknown one.
Row sample_row(const DatabaseProfile& profile, const std::string& table, Database& db, std::mt19937_64& rng);

/// Copy of `profile` with one freshly sampled row per table.
DatabaseProfile with_sample_rows(const DatabaseProfile& profile, Database& db, std::mt19937_64& rng);

/// CREATE TABLE text for `tables` in `dialect` (constraints listed after the
/// columns; BigQuery keys are NOT ENFORCED).
std::string render_ddl(const std::vector<TableInfo>& tables, Dialect dialect);

/// Parses CREATE TABLE statements (the subset render_ddl emits plus inline
/// PRIMARY KEY / REFERENCES column constraints). Column types must be valid
/// in `dialect`. Throws std::runtime_error.
std::vector<TableInfo> parse_ddl(std::string_view ddl, Dialect dialect);

/// Schema text for prompts: each table's DDL followed by a `-- sample row:` line.
std::string render_schema_prompt(const DatabaseProfile& profile);

/// Maps a SQLite declared type to `target`; throws MigrateError when no mapping exists.
std::string map_column_type(std::string_view sqlite_type, Dialect target);

/// Type-mapped DDL of a SQLite profile for `target` (identity returns profile.ddl).
std::string migrate_ddl(const DatabaseProfile& profile, Dialect target);

/// Profile from a JSON document {db_id, dialect, tables:[{name, columns:[{name,type,pk,not_null,fks}]}]}.
DatabaseProfile profile_from_json(const std::string& text);
std::string profile_to_json(const DatabaseProfile& profile);

}  // namespace sqlgen
