#include "sqlgen/db/database.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "json.hpp"
#include "sqlgen/dialect/ast.hpp"
#include "sqlgen/dialect/lexer.hpp"
#include "sqlgen/dialect/parser.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxPromptValueBytes = 80;
constexpr std::size_t kMaxPromptBlobBytes = 16;

std::string hex_bytes(std::string_view bytes) {
  static const char* kDigits = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : bytes) {
    out += kDigits[c >> 4];
    out += kDigits[c & 15];
  }
  return out;
}

// Literal for the one-line sample-row comment: newlines flattened, long
// values shortened with "..." inside the quotes.
std::string prompt_literal(const SqlValue& v) {
  switch (v.type) {
    case SqlValue::Type::kText: {
      std::string s = v.text;
      for (char& c : s) {
        if (c == '\n' || c == '\r' || c == '\t') c = ' ';
      }
      if (s.size() > kMaxPromptValueBytes) s = std::string(util::utf8_prefix(s, kMaxPromptValueBytes)) + "...";
      return sql::quote_string(s);
    }
    case SqlValue::Type::kBlob:
      if (v.text.size() > kMaxPromptBlobBytes) {
        return "X'" + hex_bytes(std::string_view(v.text).substr(0, kMaxPromptBlobBytes)) + "...'";
      }
      return sql_literal(v);
    default:
      return sql_literal(v);
  }
}

}  // namespace

std::string sql_literal(const SqlValue& v) {
  switch (v.type) {
    case SqlValue::Type::kNull:
      return "NULL";
    case SqlValue::Type::kInteger:
    case SqlValue::Type::kReal:
      return v.text;
    case SqlValue::Type::kText:
      return sql::quote_string(v.text);
    case SqlValue::Type::kBlob:
      return "X'" + hex_bytes(v.text) + "'";
  }
  return "NULL";
}

const ColumnInfo* TableInfo::column(std::string_view n) const {
  for (const auto& c : columns) {
    if (util::iequals(c.name, n)) return &c;
  }
  return nullptr;
}

const TableInfo* DatabaseProfile::table(std::string_view n) const {
  for (const auto& t : tables) {
    if (util::iequals(t.name, n)) return &t;
  }
  return nullptr;
}

std::string_view to_string(ExecError::Kind k) {
  switch (k) {
    case ExecError::Kind::kSyntax:
      return "syntax";
    case ExecError::Kind::kRuntime:
      return "runtime";
    case ExecError::Kind::kTimeout:
      return "timeout";
    case ExecError::Kind::kNonSelect:
      return "non_select";
  }
  return "?";
}

// ---- execution ----------------------------------------------------------------

ResultSet execute(const std::string& sql, Database& db, int timeout_ms, std::size_t row_limit) {
  try {
    (void)parse_sql(sql, db.dialect());
  } catch (const SqlError& e) {
    if (e.kind() == SqlErrorKind::kNonSelect) throw ExecError(ExecError::Kind::kNonSelect, e.what());
    throw ExecError(ExecError::Kind::kSyntax, e.what());
  }
  auto start = std::chrono::steady_clock::now();
  ResultSet rs = db.run_select(sql, timeout_ms, row_limit);
  rs.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rs;
}

Row sample_row(const DatabaseProfile& profile, const std::string& table, Database& db, std::mt19937_64& rng) {
  const TableInfo* t = profile.table(table);
  if (t == nullptr) throw std::invalid_argument("unknown table " + table);
  auto row = db.sample_row(t->name, rng);
  if (!row) throw NoRows("table " + t->name + " has no rows");
  return *row;
}

DatabaseProfile with_sample_rows(const DatabaseProfile& profile, Database& db, std::mt19937_64& rng) {
  DatabaseProfile out = profile;
  out.sample_rows.clear();
  for (const auto& t : profile.tables) out.sample_rows[t.name] = db.sample_row(t.name, rng);
  return out;
}

// ---- DDL ----------------------------------------------------------------

std::string render_ddl(const std::vector<TableInfo>& tables, Dialect dialect) {
  std::string out;
  const bool bq = dialect == Dialect::kBigQuery;
  for (const auto& t : tables) {
    if (!out.empty()) out += "\n";
    out += "CREATE TABLE " + sql::quote_identifier(t.name, dialect) + " (\n";
    std::vector<std::string> items;
    std::vector<std::string> pk;
    for (const auto& c : t.columns) {
      std::string line = "  " + sql::quote_identifier(c.name, dialect);
      if (!c.type.empty()) line += " " + c.type;
      if (c.not_null) line += " NOT NULL";
      items.push_back(line);
      if (c.is_pk) pk.push_back(sql::quote_identifier(c.name, dialect));
    }
    if (!pk.empty()) {
      items.push_back("  PRIMARY KEY (" + util::join(pk, ", ") + ")" + (bq ? " NOT ENFORCED" : ""));
    }
    for (const auto& c : t.columns) {
      for (const auto& fk : c.fks) {
        items.push_back("  FOREIGN KEY (" + sql::quote_identifier(c.name, dialect) + ") REFERENCES " +
                        sql::quote_identifier(fk.table, dialect) + " (" +
                        sql::quote_identifier(fk.column, dialect) + ")" + (bq ? " NOT ENFORCED" : ""));
      }
    }
    out += util::join(items, ",\n");
    out += "\n);\n";
  }
  return out;
}

namespace {

const std::set<std::string>& postgres_types() {
  static const std::set<std::string> k = {
      "SMALLINT", "INTEGER",   "INT",       "BIGINT",      "INT2",      "INT4",      "INT8",  "SERIAL",
      "BIGSERIAL", "SMALLSERIAL", "REAL",    "DOUBLE PRECISION", "FLOAT", "FLOAT4", "FLOAT8", "NUMERIC",
      "DECIMAL",  "TEXT",      "VARCHAR",   "CHAR",        "CHARACTER", "CHARACTER VARYING", "BOOLEAN",
      "BOOL",     "DATE",      "TIME",      "TIMESTAMP",   "TIMESTAMPTZ", "INTERVAL", "BYTEA", "JSON",
      "JSONB",    "UUID",      "MONEY",     "TIMESTAMP WITH TIME ZONE", "TIMESTAMP WITHOUT TIME ZONE"};
  return k;
}

const std::set<std::string>& bigquery_types() {
  static const std::set<std::string> k = {
      "INT64",  "INTEGER", "INT",  "SMALLINT", "BIGINT",    "TINYINT",  "BYTEINT", "FLOAT64",
      "NUMERIC", "DECIMAL", "BIGNUMERIC", "BIGDECIMAL", "STRING", "BYTES", "BOOL", "BOOLEAN",
      "DATE",   "DATETIME", "TIME", "TIMESTAMP", "JSON", "GEOGRAPHY", "INTERVAL"};
  return k;
}

bool is_constraint_word(const std::string& upper) {
  static const std::set<std::string> k = {"PRIMARY", "NOT",     "NULL",      "REFERENCES", "DEFAULT",
                                          "UNIQUE",  "CHECK",   "CONSTRAINT", "COLLATE",   "GENERATED",
                                          "AUTOINCREMENT", "AS", "OPTIONS"};
  return k.count(upper) > 0;
}

class DdlParser {
 public:
  DdlParser(std::string_view src, Dialect d) : src_(src), d_(d), toks_(sql::tokenize(src, d)) {}

  std::vector<TableInfo> parse() {
    std::vector<TableInfo> out;
    while (peek().kind != sql::TokenKind::kEnd) {
      if (accept_punct(";")) continue;
      out.push_back(table());
    }
    for (auto& t : out) resolve(t, out);
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("DDL parse error at offset " + std::to_string(peek().pos) + ": " + msg);
  }
  const sql::Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  const sql::Token& next() {
    const auto& t = peek();
    if (t.kind != sql::TokenKind::kEnd) ++i_;
    return t;
  }
  bool is_word(const sql::Token& t, std::string_view w) const {
    return t.kind == sql::TokenKind::kWord && t.upper == w;
  }
  bool accept_word(std::string_view w) {
    if (!is_word(peek(), w)) return false;
    ++i_;
    return true;
  }
  void expect_word(std::string_view w) {
    if (!accept_word(w)) fail("expected " + std::string(w));
  }
  bool accept_punct(std::string_view p) {
    const auto& t = peek();
    if ((t.kind == sql::TokenKind::kPunct || t.kind == sql::TokenKind::kOperator) && t.text == p) {
      ++i_;
      return true;
    }
    return false;
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
  }
  std::string name() {
    const auto& t = next();
    if (t.kind == sql::TokenKind::kQuotedIdent) return sql::identifier_value(t.text);
    if (t.kind == sql::TokenKind::kWord) {
      std::string n = t.text;
      // dotted names (dataset.table) are kept whole
      while (peek().text == "." && (peek(1).kind == sql::TokenKind::kWord || peek(1).kind == sql::TokenKind::kQuotedIdent)) {
        next();
        n += "." + sql::identifier_value(next().text);
      }
      return n;
    }
    fail("expected a name");
  }
  std::vector<std::string> name_list() {
    expect_punct("(");
    std::vector<std::string> out;
    do {
      out.push_back(name());
      accept_word("ASC") || accept_word("DESC");
    } while (accept_punct(","));
    expect_punct(")");
    return out;
  }
  void skip_balanced() {
    expect_punct("(");
    int depth = 1;
    while (depth > 0) {
      const auto& t = next();
      if (t.kind == sql::TokenKind::kEnd) fail("unbalanced parentheses");
      if (t.text == "(") ++depth;
      if (t.text == ")") --depth;
    }
  }
  void skip_fk_actions() {
    while (true) {
      if (accept_word("ON")) {
        if (!accept_word("DELETE") && !accept_word("UPDATE")) fail("expected DELETE or UPDATE");
        if (accept_word("SET")) {
          if (!accept_word("NULL") && !accept_word("DEFAULT")) fail("expected NULL or DEFAULT");
        } else if (accept_word("NO")) {
          expect_word("ACTION");
        } else if (!accept_word("CASCADE") && !accept_word("RESTRICT")) {
          fail("expected a foreign key action");
        }
      } else if (accept_word("MATCH")) {
        next();
      } else if (accept_word("DEFERRABLE")) {
        if (accept_word("INITIALLY")) next();
      } else if (is_word(peek(), "NOT") && is_word(peek(1), "ENFORCED")) {
        i_ += 2;
      } else {
        return;
      }
    }
  }

  std::string type_text() {
    if (peek().kind != sql::TokenKind::kWord || is_constraint_word(peek().upper)) return {};
    std::size_t begin = peek().pos;
    std::size_t end = begin;
    std::string base;
    while (peek().kind == sql::TokenKind::kWord && !is_constraint_word(peek().upper)) {
      if (!base.empty()) base += " ";
      base += peek().upper;
      end = next().end;
    }
    if (peek().text == "(" || peek().text == "<") {
      std::string open = peek().text;
      std::string close = open == "(" ? ")" : ">";
      int depth = 0;
      do {
        const auto& t = next();
        if (t.kind == sql::TokenKind::kEnd) fail("unterminated type arguments");
        if (t.text == open) ++depth;
        if (t.text == close) --depth;
        end = t.end;
      } while (depth > 0);
    }
    check_type(base);
    return util::collapse_whitespace(src_.substr(begin, end - begin));
  }

  void check_type(const std::string& base) const {
    if (d_ == Dialect::kSqlite) return;
    const auto& known = d_ == Dialect::kPostgres ? postgres_types() : bigquery_types();
    if (known.count(base) == 0) {
      throw std::runtime_error("type " + base + " is not valid in " + std::string(display_name(d_)));
    }
  }

  void column_def(TableInfo& t) {
    ColumnInfo c;
    c.name = name();
    c.type = type_text();
    if (c.type.empty() && d_ != Dialect::kSqlite) fail("column " + c.name + " has no type");
    while (true) {
      if (accept_word("CONSTRAINT")) {
        name();
      } else if (accept_word("PRIMARY")) {
        expect_word("KEY");
        c.is_pk = true;
        accept_word("ASC") || accept_word("DESC");
        accept_word("AUTOINCREMENT");
        if (is_word(peek(), "NOT") && is_word(peek(1), "ENFORCED")) i_ += 2;
      } else if (accept_word("NOT")) {
        expect_word("NULL");
        c.not_null = true;
      } else if (accept_word("NULL")) {
      } else if (accept_word("UNIQUE")) {
      } else if (accept_word("DEFAULT")) {
        if (peek().text == "(") {
          skip_balanced();
        } else {
          if (peek().text == "-" || peek().text == "+") next();
          next();
        }
      } else if (accept_word("CHECK")) {
        skip_balanced();
      } else if (accept_word("COLLATE")) {
        name();
      } else if (accept_word("REFERENCES")) {
        FkRef fk;
        fk.table = name();
        if (peek().text == "(") {
          auto cols = name_list();
          fk.column = cols.front();
        }
        skip_fk_actions();
        c.fks.push_back(fk);
      } else if (accept_word("OPTIONS")) {
        skip_balanced();
      } else {
        break;
      }
    }
    t.columns.push_back(std::move(c));
  }

  TableInfo table() {
    expect_word("CREATE");
    accept_word("TEMP") || accept_word("TEMPORARY");
    expect_word("TABLE");
    if (accept_word("IF")) {
      expect_word("NOT");
      expect_word("EXISTS");
    }
    TableInfo t;
    t.name = name();
    expect_punct("(");
    do {
      if (accept_word("CONSTRAINT")) name();
      if (accept_word("PRIMARY")) {
        expect_word("KEY");
        pending_pk_.emplace_back(t.name, name_list());
        if (is_word(peek(), "NOT") && is_word(peek(1), "ENFORCED")) i_ += 2;
      } else if (accept_word("FOREIGN")) {
        expect_word("KEY");
        auto cols = name_list();
        expect_word("REFERENCES");
        std::string ref_table = name();
        std::vector<std::string> ref_cols;
        if (peek().text == "(") ref_cols = name_list();
        skip_fk_actions();
        for (std::size_t k = 0; k < cols.size(); ++k) {
          pending_fk_.push_back({t.name, cols[k], ref_table, k < ref_cols.size() ? ref_cols[k] : std::string()});
        }
      } else if (accept_word("UNIQUE")) {
        name_list();
      } else if (accept_word("CHECK")) {
        skip_balanced();
      } else {
        column_def(t);
      }
    } while (accept_punct(","));
    expect_punct(")");
    // trailing table options (WITHOUT ROWID, STRICT, OPTIONS(...), ...)
    while (peek().kind != sql::TokenKind::kEnd && peek().text != ";") {
      if (peek().text == "(") {
        skip_balanced();
      } else {
        next();
      }
    }
    return t;
  }

  void resolve(TableInfo& t, std::vector<TableInfo>& all) {
    auto find_col = [](TableInfo& tb, const std::string& n) -> ColumnInfo* {
      for (auto& c : tb.columns) {
        if (util::iequals(c.name, n)) return &c;
      }
      return nullptr;
    };
    for (const auto& [tn, cols] : pending_pk_) {
      if (!util::iequals(tn, t.name)) continue;
      for (const auto& cn : cols) {
        ColumnInfo* c = find_col(t, cn);
        if (c == nullptr) throw std::runtime_error("PRIMARY KEY names unknown column " + cn);
        c->is_pk = true;
      }
    }
    for (const auto& fk : pending_fk_) {
      if (!util::iequals(fk.table, t.name)) continue;
      ColumnInfo* c = find_col(t, fk.column);
      if (c == nullptr) throw std::runtime_error("FOREIGN KEY names unknown column " + fk.column);
      c->fks.push_back({fk.ref_table, fk.ref_column});
    }
    // References without a column point at the referenced table's key.
    for (auto& c : t.columns) {
      for (auto& ref : c.fks) {
        if (!ref.column.empty()) continue;
        for (const auto& other : all) {
          if (!util::iequals(other.name, ref.table)) continue;
          for (const auto& oc : other.columns) {
            if (oc.is_pk) {
              ref.column = oc.name;
              break;
            }
          }
        }
        // A key declared by a table-level constraint is resolved above only
        // for the current table; fall back to the pending list.
        if (ref.column.empty()) {
          for (const auto& [tn, cols] : pending_pk_) {
            if (util::iequals(tn, ref.table) && !cols.empty()) ref.column = cols.front();
          }
        }
      }
    }
  }

  struct PendingFk {
    std::string table, column, ref_table, ref_column;
  };

  std::string_view src_;
  Dialect d_;
  std::vector<sql::Token> toks_;
  std::size_t i_ = 0;
  std::vector<std::pair<std::string, std::vector<std::string>>> pending_pk_;
  std::vector<PendingFk> pending_fk_;
};

}  // namespace

std::vector<TableInfo> parse_ddl(std::string_view ddl, Dialect dialect) {
  try {
    return DdlParser(ddl, dialect).parse();
  } catch (const SqlError& e) {
    throw std::runtime_error(std::string("DDL parse error: ") + e.what());
  }
}

std::string render_schema_prompt(const DatabaseProfile& profile) {
  std::string out;
  for (const auto& t : profile.tables) {
    if (!out.empty()) out += "\n";
    out += render_ddl({t}, profile.dialect);
    std::vector<std::string> values;
    auto it = profile.sample_rows.find(t.name);
    const bool have_row = it != profile.sample_rows.end() && it->second.has_value();
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (have_row && i < it->second->size()) {
        values.push_back(prompt_literal((*it->second)[i]));
      } else {
        values.push_back("NULL");
      }
    }
    out += "-- sample row: (" + util::join(values, ", ") + ")\n";
  }
  return out;
}

// ---- migration ----------------------------------------------------------------

std::string map_column_type(std::string_view sqlite_type, Dialect target) {
  if (target == Dialect::kSqlite) return std::string(sqlite_type);
  std::string t = util::to_upper(util::collapse_whitespace(sqlite_type));
  std::string base = t;
  std::string args;
  if (auto p = t.find('('); p != std::string::npos) {
    base = std::string(util::trim(t.substr(0, p)));
    args = t.substr(p);
    args.erase(std::remove(args.begin(), args.end(), ' '), args.end());
  }
  const bool pg = target == Dialect::kPostgres;
  static const std::set<std::string> kInts = {"INTEGER", "INT",  "BIGINT", "SMALLINT",         "TINYINT",
                                              "MEDIUMINT", "INT2", "INT8", "UNSIGNED BIG INT", "INT4"};
  static const std::set<std::string> kVarchars = {"VARCHAR", "VARYING CHARACTER", "NVARCHAR", "CHARACTER VARYING"};
  static const std::set<std::string> kChars = {"CHAR", "CHARACTER", "NCHAR", "NATIVE CHARACTER"};
  static const std::set<std::string> kReals = {"REAL", "DOUBLE", "DOUBLE PRECISION", "FLOAT"};
  static const std::set<std::string> kDecimals = {"NUMERIC", "DECIMAL", "NUMBER"};
  if (base.empty()) return pg ? "TEXT" : "STRING";
  if (kInts.count(base)) return pg ? "BIGINT" : "INT64";
  if (base == "TEXT" || base == "CLOB") return pg ? "TEXT" : "STRING";
  if (kVarchars.count(base)) return pg ? (args.empty() ? "VARCHAR" : "VARCHAR" + args) : "STRING";
  if (kChars.count(base)) return pg ? (args.empty() ? "CHAR" : "CHAR" + args) : "STRING";
  if (kReals.count(base)) return pg ? "DOUBLE PRECISION" : "FLOAT64";
  if (kDecimals.count(base)) return pg ? "NUMERIC" + args : "NUMERIC";
  if (base == "BOOLEAN" || base == "BOOL") return pg ? "BOOLEAN" : "BOOL";
  if (base == "DATE") return "DATE";
  if (base == "DATETIME") return pg ? "TIMESTAMP" : "DATETIME";
  if (base == "TIMESTAMP") return "TIMESTAMP";
  if (base == "TIME") return "TIME";
  if (base == "BLOB" && pg) return "BYTEA";
  throw MigrateError(std::string(sqlite_type), "no " + std::string(display_name(target)) +
                                                   " mapping for column type '" + std::string(sqlite_type) + "'");
}

std::string migrate_ddl(const DatabaseProfile& profile, Dialect target) {
  if (target == profile.dialect) return profile.ddl;
  if (profile.dialect != Dialect::kSqlite) {
    throw MigrateError(std::string(to_string(profile.dialect)), "migration source must be a SQLite profile");
  }
  std::vector<TableInfo> tables = profile.tables;
  for (auto& t : tables) {
    for (auto& c : t.columns) c.type = map_column_type(c.type, target);
  }
  std::string ddl = render_ddl(tables, target);
  try {
    (void)parse_ddl(ddl, target);
  } catch (const std::runtime_error& e) {
    throw MigrateError("ddl", std::string("migrated DDL does not parse: ") + e.what());
  }
  return ddl;
}

// ---- JSON ----------------------------------------------------------------

std::string profile_to_json(const DatabaseProfile& profile) {
  json j;
  j["db_id"] = profile.db_id;
  j["dialect"] = std::string(to_string(profile.dialect));
  j["tables"] = json::array();
  for (const auto& t : profile.tables) {
    json jt{{"name", t.name}, {"columns", json::array()}};
    for (const auto& c : t.columns) {
      json fks = json::array();
      for (const auto& f : c.fks) fks.push_back({{"table", f.table}, {"column", f.column}});
      jt["columns"].push_back(
          {{"name", c.name}, {"type", c.type}, {"pk", c.is_pk}, {"not_null", c.not_null}, {"fks", fks}});
    }
    j["tables"].push_back(jt);
  }
  return j.dump();
}

DatabaseProfile profile_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw std::runtime_error("profile: not a JSON object");
  try {
    DatabaseProfile p;
    p.db_id = j.value("db_id", "");
    p.dialect = dialect_from_string(j.value("dialect", "sqlite"));
    for (const auto& jt : j.at("tables")) {
      TableInfo t;
      t.name = jt.at("name").get<std::string>();
      for (const auto& jc : jt.at("columns")) {
        ColumnInfo c;
        c.name = jc.at("name").get<std::string>();
        c.type = jc.value("type", "");
        c.is_pk = jc.value("pk", false);
        c.not_null = jc.value("not_null", false);
        if (jc.contains("fks")) {
          for (const auto& jf : jc["fks"]) c.fks.push_back({jf.at("table").get<std::string>(), jf.at("column").get<std::string>()});
        }
        t.columns.push_back(std::move(c));
      }
      p.tables.push_back(std::move(t));
    }
    std::sort(p.tables.begin(), p.tables.end(), [](const TableInfo& a, const TableInfo& b) { return a.name < b.name; });
    p.ddl = render_ddl(p.tables, p.dialect);
    return p;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("profile: ") + e.what());
  }
}

}  // namespace sqlgen
