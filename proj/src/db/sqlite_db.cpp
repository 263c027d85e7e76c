#include "sqlite_db.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>

#include "sqlgen/dialect/ast.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

namespace {

// Progress-handler callback interval in virtual-machine instructions.
constexpr int kProgressOps = 1000;

struct Deadline {
  std::chrono::steady_clock::time_point at;
  bool fired = false;
};

int on_progress(void* arg) {
  auto* d = static_cast<Deadline*>(arg);
  if (std::chrono::steady_clock::now() >= d->at) {
    d->fired = true;
    return 1;
  }
  return 0;
}

class Stmt {
 public:
  Stmt(sqlite3* db, const std::string& sql) {
    if (sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK) {
      std::string msg = sqlite3_errmsg(db);
      sqlite3_finalize(stmt_);
      stmt_ = nullptr;
      throw std::runtime_error(msg);
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;
  sqlite3_stmt* get() const { return stmt_; }
  void bind(int i, const std::string& v) { sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT); }
  void bind(int i, std::int64_t v) { sqlite3_bind_int64(stmt_, i, v); }

 private:
  sqlite3_stmt* stmt_ = nullptr;
};

SqlValue column_value(sqlite3_stmt* s, int i) {
  switch (sqlite3_column_type(s, i)) {
    case SQLITE_INTEGER:
      return SqlValue::integer(sqlite3_column_int64(s, i));
    case SQLITE_FLOAT:
      return SqlValue::real(reinterpret_cast<const char*>(sqlite3_column_text(s, i)));
    case SQLITE_TEXT: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(s, i));
      return SqlValue::str(std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(s, i))));
    }
    case SQLITE_BLOB: {
      const auto* p = static_cast<const char*>(sqlite3_column_blob(s, i));
      SqlValue v;
      v.type = SqlValue::Type::kBlob;
      v.text.assign(p == nullptr ? "" : p, static_cast<std::size_t>(sqlite3_column_bytes(s, i)));
      return v;
    }
    default:
      return SqlValue::null();
  }
}

std::string text_or_empty(sqlite3_stmt* s, int i) {
  const auto* p = sqlite3_column_text(s, i);
  return p == nullptr ? std::string() : std::string(reinterpret_cast<const char*>(p));
}

}  // namespace

void drop_dangling_fks(std::vector<TableInfo>& tables) {
  for (auto& t : tables) {
    for (auto& c : t.columns) {
      std::vector<FkRef> kept;
      for (const auto& fk : c.fks) {
        for (const auto& other : tables) {
          if (!util::iequals(other.name, fk.table)) continue;
          if (const ColumnInfo* oc = other.column(fk.column)) kept.push_back({other.name, oc->name});
          break;
        }
      }
      c.fks = std::move(kept);
    }
  }
}

SqliteDatabase::SqliteDatabase(std::string url, std::string path) : url_(std::move(url)), path_(std::move(path)) {
  int flags = SQLITE_OPEN_READONLY | SQLITE_OPEN_URI | SQLITE_OPEN_NOMUTEX;
  std::string target = path_;
  if (path_ == ":memory:") flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_MEMORY | SQLITE_OPEN_NOMUTEX;
  if (sqlite3_open_v2(target.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    std::string msg = db_ != nullptr ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw ConnError("cannot open SQLite database " + path_ + ": " + msg);
  }
  // Opening is lazy in SQLite; touch the schema so a bad file fails here.
  char* err = nullptr;
  if (sqlite3_exec(db_, "SELECT count(*) FROM sqlite_master", nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err != nullptr ? err : "unknown error";
    sqlite3_free(err);
    sqlite3_close(db_);
    db_ = nullptr;
    throw ConnError("cannot read SQLite database " + path_ + ": " + msg);
  }
  auto slash = path_.find_last_of('/');
  std::string file = slash == std::string::npos ? path_ : path_.substr(slash + 1);
  db_id_ = file.substr(0, file.find('.'));
  if (db_id_.empty()) db_id_ = "memory";
}

SqliteDatabase::~SqliteDatabase() { sqlite3_close(db_); }

DatabaseProfile SqliteDatabase::introspect() {
  DatabaseProfile p;
  p.db_id = db_id_;
  p.dialect = Dialect::kSqlite;
  try {
    Stmt names(db_,
               "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite\\_%' ESCAPE '\\' "
               "ORDER BY name");
    while (sqlite3_step(names.get()) == SQLITE_ROW) {
      TableInfo t;
      t.name = text_or_empty(names.get(), 0);
      p.tables.push_back(std::move(t));
    }
    for (auto& t : p.tables) {
      Stmt cols(db_, "SELECT name, type, \"notnull\", pk FROM pragma_table_info(?) ORDER BY cid");
      cols.bind(1, t.name);
      while (sqlite3_step(cols.get()) == SQLITE_ROW) {
        ColumnInfo c;
        c.name = text_or_empty(cols.get(), 0);
        c.type = text_or_empty(cols.get(), 1);
        c.not_null = sqlite3_column_int(cols.get(), 2) != 0;
        c.is_pk = sqlite3_column_int(cols.get(), 3) != 0;
        t.columns.push_back(std::move(c));
      }
    }
    for (auto& t : p.tables) {
      Stmt fks(db_, "SELECT \"table\", \"from\", \"to\" FROM pragma_foreign_key_list(?) ORDER BY id, seq");
      fks.bind(1, t.name);
      while (sqlite3_step(fks.get()) == SQLITE_ROW) {
        FkRef ref{text_or_empty(fks.get(), 0), text_or_empty(fks.get(), 2)};
        std::string from = text_or_empty(fks.get(), 1);
        if (ref.column.empty()) {
          for (const auto& other : p.tables) {
            if (!util::iequals(other.name, ref.table)) continue;
            for (const auto& oc : other.columns) {
              if (oc.is_pk) {
                ref.column = oc.name;
                break;
              }
            }
          }
        }
        for (auto& c : t.columns) {
          if (util::iequals(c.name, from)) c.fks.push_back(ref);
        }
      }
    }
  } catch (const std::runtime_error& e) {
    throw ConnError(std::string("introspection failed: ") + e.what());
  }
  drop_dangling_fks(p.tables);
  p.ddl = render_ddl(p.tables, Dialect::kSqlite);
  return p;
}

std::optional<Row> SqliteDatabase::sample_row(const std::string& table, std::mt19937_64& rng) {
  std::string q = sql::quote_identifier(table, Dialect::kSqlite);
  if (q.front() != '"') q = "\"" + q + "\"";
  std::int64_t n = 0;
  {
    Stmt count(db_, "SELECT COUNT(*) FROM " + q);
    if (sqlite3_step(count.get()) == SQLITE_ROW) n = sqlite3_column_int64(count.get(), 0);
  }
  if (n == 0) return std::nullopt;
  std::uniform_int_distribution<std::int64_t> pick(0, n - 1);
  std::int64_t k = pick(rng);
  Stmt one(db_, "SELECT * FROM " + q + " LIMIT 1 OFFSET ?");
  one.bind(1, k);
  if (sqlite3_step(one.get()) != SQLITE_ROW) return std::nullopt;
  Row row;
  int cols = sqlite3_column_count(one.get());
  for (int i = 0; i < cols; ++i) row.push_back(column_value(one.get(), i));
  return row;
}

ResultSet SqliteDatabase::run_select(const std::string& sql, int timeout_ms, std::size_t row_limit) {
  sqlite3_stmt* raw = nullptr;
  const char* tail = nullptr;
  if (sqlite3_prepare_v2(db_, sql.c_str(), static_cast<int>(sql.size()), &raw, &tail) != SQLITE_OK) {
    std::string msg = sqlite3_errmsg(db_);
    sqlite3_finalize(raw);
    bool syntax = msg.find("syntax error") != std::string::npos || msg.find("incomplete input") != std::string::npos ||
                  msg.find("unrecognized token") != std::string::npos;
    throw ExecError(syntax ? ExecError::Kind::kSyntax : ExecError::Kind::kRuntime, msg);
  }
  std::unique_ptr<sqlite3_stmt, int (*)(sqlite3_stmt*)> stmt(raw, sqlite3_finalize);
  if (stmt == nullptr) throw ExecError(ExecError::Kind::kSyntax, "empty statement");
  if (!sqlite3_stmt_readonly(stmt.get())) throw ExecError(ExecError::Kind::kNonSelect, "statement is not read-only");
  if (tail != nullptr && !util::trim(std::string_view(tail)).empty() && util::trim(std::string_view(tail)) != ";") {
    throw ExecError(ExecError::Kind::kNonSelect, "multiple statements");
  }

  Deadline deadline{std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms)};
  sqlite3_progress_handler(db_, kProgressOps, on_progress, &deadline);
  struct Reset {
    sqlite3* db;
    ~Reset() { sqlite3_progress_handler(db, 0, nullptr, nullptr); }
  } reset{db_};

  ResultSet rs;
  int ncol = sqlite3_column_count(stmt.get());
  for (int i = 0; i < ncol; ++i) {
    const char* n = sqlite3_column_name(stmt.get(), i);
    rs.columns.emplace_back(n == nullptr ? "" : n);
  }
  while (true) {
    int rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_DONE) break;
    if (rc == SQLITE_ROW) {
      if (rs.rows.size() >= row_limit) {
        rs.truncated = true;
        break;
      }
      Row row;
      row.reserve(static_cast<std::size_t>(ncol));
      for (int i = 0; i < ncol; ++i) row.push_back(column_value(stmt.get(), i));
      rs.rows.push_back(std::move(row));
      continue;
    }
    if (rc == SQLITE_INTERRUPT || deadline.fired) {
      throw ExecError(ExecError::Kind::kTimeout, "query exceeded " + std::to_string(timeout_ms) + " ms");
    }
    throw ExecError(ExecError::Kind::kRuntime, sqlite3_errmsg(db_));
  }
  return rs;
}

}  // namespace sqlgen
