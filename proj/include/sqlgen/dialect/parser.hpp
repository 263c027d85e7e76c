#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sqlgen/dialect/ast.hpp"
#include "sqlgen/dialect/dialect.hpp"

namespace sqlgen {

enum class SqlErrorKind { kSyntax, kUnsupportedKeyword, kNonSelect };

class SqlError : public std::runtime_error {
 public:
  SqlError(SqlErrorKind kind, std::string message, std::size_t position = 0, std::string keyword = {});

  SqlErrorKind kind() const { return kind_; }
  std::size_t position() const { return position_; }
  /// The offending catalog keyword (kUnsupportedKeyword) or statement word (kNonSelect).
  const std::string& keyword() const { return keyword_; }
  /// Every unsupported catalog keyword found, in order of appearance.
  const std::vector<std::string>& keywords() const { return all_keywords_; }
  void set_keywords(std::vector<std::string> kws) { all_keywords_ = std::move(kws); }

 private:
  SqlErrorKind kind_;
  std::size_t position_;
  std::string keyword_;
  std::vector<std::string> all_keywords_;
};

enum class StatementKind { kSelect };

struct ColumnRef {
  std::string qualifier;  // raw, may be empty
  std::string name;       // raw
};

struct LiteralRef {
  std::string text;  // raw token text
  std::size_t position = sql::kNoPos;
};

class SqlAst {
 public:
  SqlAst(sql::Node root, Dialect dialect) : root_(std::move(root)), dialect_(dialect) {}

  const sql::Node& root() const { return root_; }
  sql::Node& root() { return root_; }
  Dialect dialect() const { return dialect_; }
  StatementKind kind() const { return StatementKind::kSelect; }

  std::vector<std::string> tables() const;
  std::vector<ColumnRef> columns() const;
  std::vector<std::string> aliases() const;
  std::vector<LiteralRef> literals() const;

  std::vector<sql::Piece> pieces() const { return sql::to_pieces(root_); }
  std::string render() const { return sql::render(root_); }

  friend bool operator==(const SqlAst& a, const SqlAst& b) { return sql::same_tree(a.root_, b.root_); }

 private:
  sql::Node root_;
  Dialect dialect_;
};

/// Parses a single SELECT statement (optionally preceded by WITH) and checks
/// it against the dialect: syntax-level differences plus the keyword catalog.
/// Throws SqlError.
SqlAst parse_sql(std::string_view sql, Dialect dialect,
                 const KeywordCatalog& catalog = KeywordCatalog::builtin());

/// Parses with the permissive cross-dialect grammar only; no dialect checks.
sql::Node parse_select_tree(std::string_view sql, Dialect dialect);

/// Dialect checks on an already-built tree (used after rewrites).
void check_dialect(const sql::Node& root, Dialect dialect, const KeywordCatalog& catalog);

/// Uppercased keyword and function occurrences. Multi-word keywords such as
/// GROUP BY count as one entry; identifiers and literals are excluded.
using KeywordCounts = std::map<std::string, int>;
KeywordCounts extract_keywords(const SqlAst& ast);
KeywordCounts extract_keywords(const sql::Node& root);

/// Maximum nesting depth of subqueries (0 for a flat query).
int subquery_depth(const sql::Node& root);

enum class Complexity { kSimple, kModerate, kChallenging };
std::string_view to_string(Complexity c);

struct ComplexityRule {
  std::map<std::string, int> weights = {
      {"JOIN", 1}, {"GROUP BY", 1}, {"HAVING", 1}, {"OVER", 1},
      {"CASE", 1}, {"UNION", 1},    {"INTERSECT", 1}, {"EXCEPT", 1},
  };
  int subquery_weight = 2;
  int simple_max = 2;
  int moderate_max = 5;
};

int complexity_score(const KeywordCounts& keywords, int depth, const ComplexityRule& rule = {});
Complexity classify_complexity(const KeywordCounts& keywords, int depth, const ComplexityRule& rule = {});
Complexity classify_complexity(const SqlAst& ast, const ComplexityRule& rule = {});

/// Keywords and functions the grammar knows about, used by dataset statistics
/// to bucket unknown function names.
bool is_grammar_keyword(std::string_view upper);
bool is_known_function(std::string_view upper);

}  // namespace sqlgen
