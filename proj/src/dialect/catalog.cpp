#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sqlgen/dialect/dialect.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

namespace {

// First 20 rows: the reference table of non-portable keywords. The rest are
// additional well-established differences between the three engines.
constexpr std::string_view kBuiltinCsv =
    "keyword,sqlite,postgresql,bigquery\n"
    "CREATE MODEL,0,0,1\n"
    "ML.TRANSLATE,0,0,1\n"
    "ML.GENERATE_TEXT,0,0,1\n"
    "ML.ANNOTATE_IMAGE,0,0,1\n"
    "SAFE,0,0,1\n"
    "QUALIFY,0,0,1\n"
    "WITH OFFSET,0,0,1\n"
    "ARRAY_AGG,0,1,1\n"
    "STRUCT,0,0,1\n"
    "ILIKE,0,1,0\n"
    "LATERAL,0,1,0\n"
    "SERIAL,0,1,0\n"
    "CTID,0,1,0\n"
    "PRAGMA,1,0,0\n"
    "REGEXP_CONTAINS,0,0,1\n"
    "REGEXP_MATCHES,0,1,0\n"
    "GLOB,1,0,0\n"
    "JULIANDAY,1,0,0\n"
    "DATE_TRUNC,0,1,0\n"
    "TIMESTAMP_TRUNC,0,0,1\n"
    "STRFTIME,1,0,0\n"
    "GROUP_CONCAT,1,0,0\n"
    "TOTAL,1,0,0\n"
    "IIF,1,0,0\n"
    "REGEXP,1,0,0\n"
    "IFNULL,1,0,1\n"
    "INSTR,1,0,1\n"
    "STRING_AGG,0,1,1\n"
    "DISTINCT ON,0,1,0\n"
    "GENERATE_SERIES,0,1,0\n"
    "TO_CHAR,0,1,0\n"
    "TO_DATE,0,1,0\n"
    "AGE,0,1,0\n"
    "STRPOS,0,1,0\n"
    "NOW,0,1,0\n"
    "UNNEST,0,1,1\n"
    "EXTRACT,0,1,1\n"
    "ARRAY_LENGTH,0,1,1\n"
    "REGEXP_REPLACE,0,1,1\n"
    "SAFE_CAST,0,0,1\n"
    "SAFE_DIVIDE,0,0,1\n"
    "DATE_DIFF,0,0,1\n"
    "TIMESTAMP_DIFF,0,0,1\n"
    "FORMAT_DATE,0,0,1\n"
    "FORMAT_TIMESTAMP,0,0,1\n"
    "GENERATE_ARRAY,0,0,1\n"
    "SPLIT,0,0,1\n"
    "COUNTIF,0,0,1\n"
    "IF,0,0,1\n";

bool parse_flag(const std::string& field, int line_no) {
  auto f = util::trim(field);
  if (f == "1") return true;
  if (f == "0") return false;
  throw std::runtime_error("catalog line " + std::to_string(line_no) + ": flag must be 0 or 1, got '" +
                           std::string(f) + "'");
}

}  // namespace

std::string_view to_string(Dialect d) {
  switch (d) {
    case Dialect::kSqlite:
      return "sqlite";
    case Dialect::kPostgres:
      return "postgresql";
    case Dialect::kBigQuery:
      return "bigquery";
  }
  return "unknown";
}

std::string_view display_name(Dialect d) {
  switch (d) {
    case Dialect::kSqlite:
      return "SQLite";
    case Dialect::kPostgres:
      return "PostgreSQL";
    case Dialect::kBigQuery:
      return "BigQuery";
  }
  return "unknown";
}

Dialect dialect_from_string(std::string_view name) {
  auto n = util::to_lower(util::trim(name));
  if (n == "sqlite" || n == "sqlite3") return Dialect::kSqlite;
  if (n == "postgresql" || n == "postgres" || n == "pg") return Dialect::kPostgres;
  if (n == "bigquery" || n == "bq") return Dialect::kBigQuery;
  throw std::invalid_argument("unknown dialect '" + std::string(name) + "'");
}

KeywordCatalog::KeywordCatalog(std::vector<KeywordSupport> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].keyword = util::to_upper(util::trim(entries_[i].keyword));
    auto [it, inserted] = index_.emplace(entries_[i].keyword, i);
    if (!inserted) {
      throw std::runtime_error("duplicate catalog keyword '" + entries_[i].keyword + "'");
    }
  }
}

const KeywordCatalog& KeywordCatalog::builtin() {
  static const KeywordCatalog catalog = [] {
    std::istringstream in{std::string(kBuiltinCsv)};
    return from_csv(in);
  }();
  return catalog;
}

KeywordCatalog KeywordCatalog::from_csv(std::istream& in) {
  std::vector<KeywordSupport> entries;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (util::trim(line).empty()) continue;
    auto fields = util::split(line, ',');
    if (fields.size() != 4) {
      throw std::runtime_error("catalog line " + std::to_string(line_no) + ": expected 4 fields");
    }
    if (!header_seen) {
      header_seen = true;
      if (util::iequals(util::trim(fields[0]), "keyword")) continue;
    }
    KeywordSupport e;
    e.keyword = fields[0];
    for (std::size_t d = 0; d < 3; ++d) e.supported[d] = parse_flag(fields[d + 1], line_no);
    entries.push_back(std::move(e));
  }
  return KeywordCatalog(std::move(entries));
}

KeywordCatalog KeywordCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog file " + path.string());
  return from_csv(in);
}

std::string KeywordCatalog::to_csv() const {
  std::string out = "keyword,sqlite,postgresql,bigquery\n";
  for (const auto& e : entries_) {
    out += e.keyword;
    for (bool s : e.supported) out += s ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

const KeywordSupport* KeywordCatalog::find(std::string_view keyword) const {
  auto it = index_.find(util::to_upper(keyword));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

bool KeywordCatalog::is_dialect_specific(std::string_view keyword, Dialect d) const {
  const auto* e = find(keyword);
  if (!e || !e->supports(d)) return false;
  for (Dialect other : kAllDialects) {
    if (other != d && e->supports(other)) return false;
  }
  return true;
}

bool KeywordCatalog::is_unsupported(std::string_view keyword, Dialect d) const {
  const auto* e = find(keyword);
  return e && !e->supports(d);
}

std::string_view builtin_catalog_csv() { return kBuiltinCsv; }

}  // namespace sqlgen
