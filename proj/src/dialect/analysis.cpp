#include <algorithm>
#include <unordered_set>

#include "sqlgen/dialect/parser.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using sql::Node;
using sql::NodeKind;

KeywordCounts extract_keywords(const Node& root) {
  KeywordCounts counts;
  for (const auto& p : sql::to_pieces(root)) {
    switch (p.kind) {
      case sql::PieceKind::kKeyword:
      case sql::PieceKind::kFunction:
        ++counts[util::to_upper(p.text)];
        break;
      case sql::PieceKind::kIdentifier:
        // Pseudo-columns that the keyword catalog tracks.
        if (p.role == sql::IdentRole::kColumn) {
          auto v = util::to_upper(sql::identifier_value(p.text));
          if (v == "CTID") ++counts[v];
        }
        break;
      default:
        break;
    }
  }
  return counts;
}

KeywordCounts extract_keywords(const SqlAst& ast) { return extract_keywords(ast.root()); }

namespace {

bool opens_subquery(const Node& n) {
  switch (n.kind) {
    case NodeKind::kSubquery:
    case NodeKind::kInQuery:
    case NodeKind::kExists:
    case NodeKind::kDerivedTable:
    case NodeKind::kCte:
      return true;
    case NodeKind::kArray:
      return n.flag == "SUBQUERY";
    case NodeKind::kQuantified:
      return n.child(0).kind == NodeKind::kQuery;
    default:
      return false;
  }
}

}  // namespace

int subquery_depth(const Node& root) {
  int best = 0;
  for (const auto& c : root.children) best = std::max(best, subquery_depth(c));
  return best + (opens_subquery(root) ? 1 : 0);
}

std::string_view to_string(Complexity c) {
  switch (c) {
    case Complexity::kSimple:
      return "SIMPLE";
    case Complexity::kModerate:
      return "MODERATE";
    case Complexity::kChallenging:
      return "CHALLENGING";
  }
  return "SIMPLE";
}

int complexity_score(const KeywordCounts& keywords, int depth, const ComplexityRule& rule) {
  int score = 0;
  for (const auto& [kw, weight] : rule.weights) {
    auto it = keywords.find(kw);
    if (it != keywords.end()) score += weight * it->second;
  }
  return score + rule.subquery_weight * depth;
}

Complexity classify_complexity(const KeywordCounts& keywords, int depth, const ComplexityRule& rule) {
  int score = complexity_score(keywords, depth, rule);
  if (score <= rule.simple_max) return Complexity::kSimple;
  if (score <= rule.moderate_max) return Complexity::kModerate;
  return Complexity::kChallenging;
}

Complexity classify_complexity(const SqlAst& ast, const ComplexityRule& rule) {
  return classify_complexity(extract_keywords(ast), subquery_depth(ast.root()), rule);
}

bool is_grammar_keyword(std::string_view upper) {
  static const std::unordered_set<std::string_view> kws = {
      "SELECT", "FROM", "WHERE", "GROUP BY", "HAVING", "ORDER BY", "LIMIT", "OFFSET", "UNION", "INTERSECT",
      "EXCEPT", "ALL", "DISTINCT", "DISTINCT ON", "AS", "STRUCT", "VALUE", "JOIN", "INNER", "LEFT", "RIGHT",
      "FULL", "OUTER", "CROSS", "NATURAL", "ON", "USING", "LATERAL", "WITH", "RECURSIVE", "MATERIALIZED",
      "WITH OFFSET", "AND", "OR", "NOT", "IN", "IS", "NULL", "TRUE", "FALSE", "UNKNOWN", "DISTINCT FROM",
      "LIKE", "ILIKE", "GLOB", "REGEXP", "MATCH", "SIMILAR TO", "ESCAPE", "BETWEEN", "EXISTS", "CASE", "WHEN",
      "THEN", "ELSE", "END", "CAST", "SAFE_CAST", "SAFE", "INTERVAL", "EXTRACT", "ARRAY", "ASC", "DESC",
      "NULLS FIRST", "NULLS LAST", "OVER", "PARTITION BY", "ROWS", "RANGE", "GROUPS", "UNBOUNDED PRECEDING",
      "UNBOUNDED FOLLOWING", "CURRENT ROW", "PRECEDING", "FOLLOWING", "FILTER", "IGNORE NULLS",
      "RESPECT NULLS", "QUALIFY", "WINDOW", "FETCH FIRST", "ROWS ONLY", "ISNULL", "NOTNULL", "COLLATE",
      "ANY", "SOME", "MODEL", "TABLE", "FOR", "CURRENT_DATE", "CURRENT_TIME", "CURRENT_TIMESTAMP", "DATE",
      "TIME", "TIMESTAMP", "DATETIME", "JSON", "NUMERIC", "BIGNUMERIC", "YEAR", "QUARTER", "MONTH", "WEEK",
      "DAY", "HOUR", "MINUTE", "SECOND", "TO"};
  return kws.count(upper) > 0;
}

bool is_known_function(std::string_view upper) {
  static const std::unordered_set<std::string_view> fns = {
      // aggregates
      "COUNT", "SUM", "AVG", "MIN", "MAX", "TOTAL", "GROUP_CONCAT", "STRING_AGG", "ARRAY_AGG", "COUNTIF",
      "ANY_VALUE", "STDDEV", "VARIANCE", "BOOL_AND", "BOOL_OR", "LOGICAL_AND", "LOGICAL_OR",
      "PERCENTILE_CONT", "APPROX_COUNT_DISTINCT",
      // window
      "ROW_NUMBER", "RANK", "DENSE_RANK", "NTILE", "LAG", "LEAD", "FIRST_VALUE", "LAST_VALUE", "NTH_VALUE",
      "PERCENT_RANK", "CUME_DIST",
      // scalar
      "ABS", "ROUND", "CEIL", "CEILING", "FLOOR", "MOD", "POWER", "SQRT", "EXP", "LN", "LOG", "SIGN",
      "RANDOM", "RAND", "LENGTH", "CHAR_LENGTH", "UPPER", "LOWER", "TRIM", "LTRIM", "RTRIM", "SUBSTR",
      "SUBSTRING", "REPLACE", "CONCAT", "INSTR", "STRPOS", "POSITION", "LEFT", "RIGHT", "LPAD", "RPAD",
      "REVERSE", "SPLIT", "SPLIT_PART", "FORMAT", "PRINTF", "COALESCE", "NULLIF", "IFNULL", "IIF", "IF",
      "GREATEST", "LEAST", "TYPEOF", "DATE", "TIME", "DATETIME", "TIMESTAMP", "JULIANDAY", "STRFTIME",
      "UNIXEPOCH", "NOW", "AGE", "TO_CHAR", "TO_DATE", "DATE_TRUNC", "DATE_PART", "TIMESTAMP_TRUNC",
      "DATE_DIFF", "TIMESTAMP_DIFF", "DATE_ADD", "DATE_SUB", "FORMAT_DATE", "FORMAT_TIMESTAMP",
      "PARSE_DATE", "CURRENT_DATE", "CURRENT_TIMESTAMP", "GENERATE_SERIES", "GENERATE_ARRAY", "UNNEST",
      "ARRAY_LENGTH", "REGEXP_CONTAINS", "REGEXP_MATCHES", "REGEXP_REPLACE", "REGEXP_EXTRACT",
      "SAFE_DIVIDE", "ML.TRANSLATE", "ML.GENERATE_TEXT", "ML.ANNOTATE_IMAGE", "JSON_EXTRACT",
      "JSON_VALUE", "HEX", "QUOTE", "OFFSET", "ORDINAL"};
  return fns.count(upper) > 0 || KeywordCatalog::builtin().contains(upper);
}

}  // namespace sqlgen
