#pragma once

#include "sqlgen/db/database.hpp"

struct sqlite3;

namespace sqlgen {

/// Removes foreign-key references whose target table or column does not exist
/// and normalizes the spelling of the ones that do.
void drop_dangling_fks(std::vector<TableInfo>& tables);

class SqliteDatabase : public Database {
 public:
  SqliteDatabase(std::string url, std::string path);
  ~SqliteDatabase() override;
  SqliteDatabase(const SqliteDatabase&) = delete;
  SqliteDatabase& operator=(const SqliteDatabase&) = delete;

  Dialect dialect() const override { return Dialect::kSqlite; }
  std::string db_id() const override { return db_id_; }
  std::string url() const override { return url_; }
  DatabaseProfile introspect() override;
  std::optional<Row> sample_row(const std::string& table, std::mt19937_64& rng) override;
  ResultSet run_select(const std::string& sql, int timeout_ms, std::size_t row_limit) override;

 private:
  std::string url_;
  std::string path_;
  std::string db_id_;
  sqlite3* db_ = nullptr;
};

}  // namespace sqlgen
