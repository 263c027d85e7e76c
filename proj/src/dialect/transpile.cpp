#include "sqlgen/dialect/transpile.hpp"

#include <array>
#include <map>

#include "sqlgen/dialect/parser.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using sql::Node;
using sql::NodeKind;

namespace {

constexpr std::array<TranspileRule, 30> kRules = {{
    {"ilike", "x ILIKE p -> LOWER(x) LIKE LOWER(p)"},
    {"glob", "x GLOB 'pat' -> x LIKE 'pat' with * -> %, ? -> _ (literal patterns without classes)"},
    {"regexp-op", "SQLite x REGEXP p -> x ~ p (PostgreSQL) / REGEXP_CONTAINS(x, p) (BigQuery)"},
    {"tilde-op", "PostgreSQL x ~ p / x !~ p -> REGEXP_CONTAINS / REGEXP"},
    {"regexp-contains", "REGEXP_CONTAINS(x, p) -> x ~ p (PostgreSQL) / x REGEXP p (SQLite)"},
    {"pg-cast", "x::type -> CAST(x AS type)"},
    {"cast-types", "CAST target types mapped between INT64/FLOAT64/STRING/BOOL and SQL type names"},
    {"safe-cast", "SAFE_CAST(x AS t) -> CAST(x AS t)"},
    {"concat", "CONCAT(a, b, ...) -> a || b || ... for SQLite (NULL-safe when the source is PostgreSQL)"},
    {"strftime", "STRFTIME(fmt, x) -> TO_CHAR(CAST(x AS TIMESTAMP), pgfmt) / FORMAT_TIMESTAMP(fmt, ...)"},
    {"date-fn", "SQLite DATE(x) -> CAST(x AS DATE); DATE('now') -> CURRENT_DATE"},
    {"limit-comma", "LIMIT a, b -> LIMIT b OFFSET a"},
    {"fetch-first", "OFFSET a ROWS FETCH FIRST b ROWS ONLY -> LIMIT b OFFSET a"},
    {"limit-all", "LIMIT ALL -> no limit"},
    {"ifnull", "IFNULL(a, b) -> COALESCE(a, b) for PostgreSQL"},
    {"group-concat", "GROUP_CONCAT(x[, sep]) <-> STRING_AGG(x, sep)"},
    {"double-equals", "a == b -> a = b"},
    {"instr", "INSTR(s, t) <-> STRPOS(s, t)"},
    {"date-trunc", "DATE_TRUNC('unit', x) <-> TIMESTAMP_TRUNC(x, UNIT); SQLite start-of modifiers"},
    {"now", "NOW() -> DATETIME('now') (SQLite) / CURRENT_TIMESTAMP() (BigQuery)"},
    {"modulo", "a % b -> MOD(a, b) for BigQuery"},
    {"extract", "EXTRACT(part FROM x) -> CAST(STRFTIME('%fmt', x) AS INTEGER) for SQLite"},
    {"postfix-null", "x ISNULL / x NOTNULL -> x IS [NOT] NULL"},
    {"iif", "IIF(c, a, b) <-> IF(c, a, b) / CASE WHEN c THEN a ELSE b END"},
    {"substring-from", "SUBSTRING(x FROM a FOR b) -> SUBSTR(x, a, b)"},
    {"typed-literal", "DATE 'x' -> 'x' for SQLite"},
    {"countif", "COUNTIF(c) -> COUNT(CASE WHEN c THEN 1 END)"},
    {"left-right", "LEFT(s, n) / RIGHT(s, n) -> SUBSTR(s, 1, n) / SUBSTR(s, -n) for SQLite"},
    {"quoting", "identifiers requoted for the target; string literals re-encoded"},
    {"is-expr", "SQLite a IS b -> a IS NOT DISTINCT FROM b"},
}};

std::string upper(std::string_view s) { return util::to_upper(s); }

Node fn(const std::string& name, std::vector<Node> args) {
  Node f(NodeKind::kFunc, name);
  Node al(NodeKind::kArgList);
  al.children = std::move(args);
  f.add(std::move(al));
  return f;
}

Node str_lit(std::string_view value, Dialect d) {
  Node l(NodeKind::kLiteral, encode_string_literal(value, d));
  l.flag = "string";
  return l;
}

Node num_lit(std::string v) {
  Node l(NodeKind::kLiteral, std::move(v));
  l.flag = "number";
  return l;
}

Node kw_lit(std::string v) { return Node(NodeKind::kKeywordLiteral, std::move(v)); }

Node type_node(std::string t) { return Node(NodeKind::kType, std::move(t)); }

Node cast(Node x, std::string type) {
  Node c(NodeKind::kCast, "CAST");
  c.add(std::move(x));
  c.add(type_node(std::move(type)));
  return c;
}

bool is_atomic(const Node& n) {
  switch (n.kind) {
    case NodeKind::kColumn:
    case NodeKind::kLiteral:
    case NodeKind::kKeywordLiteral:
    case NodeKind::kFunc:
    case NodeKind::kParen:
    case NodeKind::kSubquery:
    case NodeKind::kCast:
    case NodeKind::kCase:
    case NodeKind::kExtract:
    case NodeKind::kTuple:
      return true;
    default:
      return false;
  }
}

Node paren_if_needed(Node n) {
  if (is_atomic(n)) return n;
  Node p(NodeKind::kParen);
  p.add(std::move(n));
  return p;
}

Node binary(std::string op, Node l, Node r) {
  Node b(NodeKind::kBinary, std::move(op));
  b.add(paren_if_needed(std::move(l)));
  b.add(paren_if_needed(std::move(r)));
  return b;
}

Node case_when(Node cond, Node then, Node otherwise) {
  Node c(NodeKind::kCase);
  c.add(Node());
  Node w(NodeKind::kWhen);
  w.add(std::move(cond));
  w.add(std::move(then));
  c.add(std::move(w));
  if (!otherwise.empty()) {
    Node e(NodeKind::kElse);
    e.add(std::move(otherwise));
    c.add(std::move(e));
  }
  return c;
}

std::vector<Node>& args_of(Node& f) { return f.child_mut(0).children; }

bool is_string_literal(const Node& n) { return n.kind == NodeKind::kLiteral && n.flag == "string"; }

bool plain_call(const Node& f) {
  // No DISTINCT, ORDER BY, modifiers, FILTER or OVER.
  return f.flag.empty() && f.child(1).empty() && f.child(2).empty() && f.child(3).empty() && f.child(4).empty();
}

std::string map_type(const std::string& type, Dialect to) {
  std::string t = upper(type);
  std::string base = t.substr(0, t.find('('));
  static const std::map<std::string, int> family = {
      {"INTEGER", 0}, {"INT", 0},      {"BIGINT", 0},    {"SMALLINT", 0},          {"INT2", 0},
      {"INT4", 0},    {"INT8", 0},     {"INT64", 0},     {"TINYINT", 0},           {"REAL", 1},
      {"FLOAT", 1},   {"FLOAT4", 1},   {"FLOAT8", 1},    {"FLOAT64", 1},           {"DOUBLE", 1},
      {"DOUBLE PRECISION", 1},         {"TEXT", 2},      {"VARCHAR", 2},           {"CHAR", 2},
      {"STRING", 2},  {"CHARACTER VARYING", 2},          {"CHARACTER", 2},         {"NUMERIC", 3},
      {"DECIMAL", 3}, {"BOOLEAN", 4},  {"BOOL", 4},      {"BLOB", 5},              {"BYTEA", 5},
      {"BYTES", 5},   {"DATE", 6},     {"TIMESTAMP", 7}, {"TIMESTAMPTZ", 7},       {"DATETIME", 7},
      {"TIMESTAMP WITH TIME ZONE", 7}, {"TIMESTAMP WITHOUT TIME ZONE", 7},         {"TIME", 8},
  };
  auto it = family.find(base);
  if (it == family.end()) return type;
  static const std::array<std::array<const char*, 9>, 3> names = {{
      {"INTEGER", "REAL", "TEXT", "NUMERIC", "INTEGER", "BLOB", "TEXT", "TEXT", "TEXT"},
      {"BIGINT", "DOUBLE PRECISION", "TEXT", "NUMERIC", "BOOLEAN", "BYTEA", "DATE", "TIMESTAMP", "TIME"},
      {"INT64", "FLOAT64", "STRING", "NUMERIC", "BOOL", "BYTES", "DATE", "TIMESTAMP", "TIME"},
  }};
  std::string mapped = names[static_cast<int>(to)][it->second];
  // Keep precision/scale for NUMERIC-like targets.
  if (it->second == 3 && t.find('(') != std::string::npos && to != Dialect::kSqlite) mapped += t.substr(t.find('('));
  return mapped;
}

std::string glob_to_like(const std::string& pattern, bool& ok) {
  std::string out;
  ok = true;
  for (char c : pattern) {
    switch (c) {
      case '*':
        out += '%';
        break;
      case '?':
        out += '_';
        break;
      case '[':
      case ']':
      case '%':
      case '_':
        ok = false;
        return {};
      default:
        out += c;
    }
  }
  return out;
}

bool strftime_to_pg(const std::string& fmt, std::string& out) {
  static const std::map<char, std::string> spec = {{'Y', "YYYY"}, {'m', "MM"}, {'d', "DD"}, {'H', "HH24"},
                                                   {'M', "MI"},   {'S', "SS"}, {'j', "DDD"}};
  for (std::size_t i = 0; i < fmt.size(); ++i) {
    if (fmt[i] == '%' && i + 1 < fmt.size()) {
      auto it = spec.find(fmt[i + 1]);
      if (it == spec.end()) return false;
      out += it->second;
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(fmt[i]))) {
      // Letters would be read as template patterns by TO_CHAR.
      out += '"';
      out += fmt[i];
      out += '"';
    } else {
      out += fmt[i];
    }
  }
  return true;
}

class Rewriter {
 public:
  Rewriter(Dialect from, Dialect to) : from_(from), to_(to) {}

  void requote(Node& root) {
    sql::walk_mut(root, [&](Node& n) {
      switch (n.kind) {
        case NodeKind::kLiteral:
          if (n.flag == "string") n.text = encode_string_literal(sql::string_literal_value(n.text, from_), to_);
          break;
        case NodeKind::kColumn:
          n.text = requote_name(n.text);
          n.aux = requote_name(n.aux);
          break;
        case NodeKind::kTableRef:
        case NodeKind::kAlias:
        case NodeKind::kCte:
        case NodeKind::kName:
        case NodeKind::kSelectItem:
        case NodeKind::kNamedArg:
        case NodeKind::kStar:
        case NodeKind::kOver:
        case NodeKind::kWindowSpec:
        case NodeKind::kNamedWindow:
        case NodeKind::kFieldAccess:
          n.text = requote_name(n.text);
          break;
        case NodeKind::kTableArg:
          n.aux = requote_name(n.aux);
          break;
        default:
          break;
      }
      return true;
    });
  }

  void rewrite(Node& n) {
    for (auto& c : n.children) rewrite(c);
    switch (n.kind) {
      case NodeKind::kLike:
        like(n);
        break;
      case NodeKind::kBinary:
        binary_op(n);
        break;
      case NodeKind::kPgCast:
        if (to_ != Dialect::kPostgres) {
          Node c(NodeKind::kCast, "CAST");
          c.pos = n.pos;
          c.add(std::move(n.children[0]));
          c.add(std::move(n.children[1]));
          n = std::move(c);
        }
        break;
      case NodeKind::kCast:
        if (n.text == "SAFE_CAST" && to_ != Dialect::kBigQuery) n.text = "CAST";
        break;
      case NodeKind::kType:
        n.text = map_type(n.text, to_);
        break;
      case NodeKind::kFunc:
        func(n);
        break;
      case NodeKind::kLimit:
        limit(n);
        break;
      case NodeKind::kExtract:
        extract(n);
        break;
      case NodeKind::kPostfixNull:
        if (to_ == Dialect::kBigQuery) {
          Node is(NodeKind::kIs, "NULL");
          if (n.text == "NOTNULL") is.flag = "NOT";
          is.add(std::move(n.children[0]));
          n = std::move(is);
        }
        break;
      case NodeKind::kTypedLiteral:
        if (to_ == Dialect::kSqlite && n.child(0).kind == NodeKind::kLiteral) {
          Node lit = std::move(n.children[0]);
          n = std::move(lit);
        }
        break;
      case NodeKind::kIs:
        // a IS b  ==  a IS NOT DISTINCT FROM b
        if (n.text.empty() && to_ != Dialect::kSqlite) {
          n.text = "DISTINCT FROM";
          n.flag = n.flag.empty() ? "NOT" : "";
        }
        break;
      default:
        break;
    }
  }

 private:
  std::string requote_name(const std::string& raw) {
    if (raw.empty()) return raw;
    std::vector<std::string> parts;
    std::string cur;
    char quote = 0;
    for (char c : raw) {
      if (quote) {
        cur += c;
        if (c == quote) quote = 0;
        continue;
      }
      if (c == '"' || c == '`') quote = c;
      if (c == '[') quote = ']';
      if (c == '.') {
        parts.push_back(cur);
        cur.clear();
        continue;
      }
      cur += c;
    }
    parts.push_back(cur);
    const char q = to_ == Dialect::kBigQuery ? '`' : '"';
    for (auto& p : parts) {
      if (p.empty()) continue;
      char f = p.front();
      if (f != '"' && f != '`' && f != '[') continue;
      if (f == q) continue;
      std::string v = sql::identifier_value(p);
      std::string out(1, q);
      for (char c : v) {
        if (c == q) out += q;
        out += c;
      }
      out += q;
      p = out;
    }
    return util::join(parts, ".");
  }

  void like(Node& n) {
    if (n.text == "ILIKE" && to_ != Dialect::kPostgres) {
      n.text = "LIKE";
      n.children[0] = fn("LOWER", {std::move(n.children[0])});
      n.children[1] = fn("LOWER", {std::move(n.children[1])});
    } else if (n.text == "GLOB" && to_ != Dialect::kSqlite && is_string_literal(n.child(1))) {
      bool ok = false;
      auto pat = glob_to_like(sql::string_literal_value(n.child(1).text, to_), ok);
      if (ok) {
        n.text = "LIKE";
        n.children[1] = str_lit(pat, to_);
      }
    } else if (n.text == "REGEXP" && to_ != Dialect::kSqlite && n.child(2).empty()) {
      bool neg = !n.flag.empty();
      Node r;
      if (to_ == Dialect::kPostgres) {
        r = binary(neg ? "!~" : "~", std::move(n.children[0]), std::move(n.children[1]));
      } else {
        r = fn("REGEXP_CONTAINS", {std::move(n.children[0]), std::move(n.children[1])});
        if (neg) {
          Node u(NodeKind::kUnary, "NOT");
          u.add(std::move(r));
          r = std::move(u);
        }
      }
      n = std::move(r);
    }
  }

  void binary_op(Node& n) {
    if (n.text == "==" && to_ != Dialect::kSqlite) {
      n.text = "=";
    } else if (n.text == "%" && to_ == Dialect::kBigQuery) {
      n = fn("MOD", {std::move(n.children[0]), std::move(n.children[1])});
    } else if ((n.text == "~" || n.text == "!~") && to_ != Dialect::kPostgres) {
      bool neg = n.text == "!~";
      if (to_ == Dialect::kBigQuery) {
        Node r = fn("REGEXP_CONTAINS", {std::move(n.children[0]), std::move(n.children[1])});
        if (neg) {
          Node u(NodeKind::kUnary, "NOT");
          u.add(std::move(r));
          r = std::move(u);
        }
        n = std::move(r);
      } else {
        Node lk(NodeKind::kLike, "REGEXP");
        if (neg) lk.flag = "NOT";
        lk.add(std::move(n.children[0]));
        lk.add(std::move(n.children[1]));
        n = std::move(lk);
      }
    }
  }

  void func(Node& n) {
    if (!n.aux.empty() && to_ != Dialect::kBigQuery) return;  // SAFE.fn stays and is reported
    const std::string name = upper(n.text);
    auto& args = args_of(n);
    const bool plain = plain_call(n);
    if (name == "CONCAT" && to_ == Dialect::kSqlite && plain && args.size() >= 2) {
      Node acc;
      for (auto& a : args) {
        Node part = std::move(a);
        if (from_ == Dialect::kPostgres) part = fn("COALESCE", {std::move(part), str_lit("", to_)});
        acc = acc.empty() ? paren_if_needed(std::move(part)) : binary("||", std::move(acc), std::move(part));
      }
      Node p(NodeKind::kParen);
      p.add(std::move(acc));
      n = std::move(p);
    } else if (name == "STRFTIME" && to_ != Dialect::kSqlite && plain && args.size() == 2 &&
               is_string_literal(args[0])) {
      std::string fmt = sql::string_literal_value(args[0].text, to_);
      Node ts = cast(std::move(args[1]), "TIMESTAMP");
      if (to_ == Dialect::kBigQuery) {
        n = fn("FORMAT_TIMESTAMP", {str_lit(fmt, to_), std::move(ts)});
      } else {
        std::string pg;
        if (strftime_to_pg(fmt, pg)) n = fn("TO_CHAR", {std::move(ts), str_lit(pg, to_)});
      }
    } else if (name == "DATE" && from_ == Dialect::kSqlite && to_ != Dialect::kSqlite && plain && args.size() == 1) {
      if (is_string_literal(args[0]) && util::iequals(sql::string_literal_value(args[0].text, to_), "now")) {
        n = kw_lit("CURRENT_DATE");
      } else {
        n = cast(std::move(args[0]), "DATE");
      }
    } else if (name == "REGEXP_CONTAINS" && to_ != Dialect::kBigQuery && plain && args.size() == 2) {
      if (to_ == Dialect::kPostgres) {
        n = binary("~", std::move(args[0]), std::move(args[1]));
      } else {
        Node lk(NodeKind::kLike, "REGEXP");
        lk.add(std::move(args[0]));
        lk.add(std::move(args[1]));
        n = std::move(lk);
      }
    } else if (name == "IFNULL" && to_ == Dialect::kPostgres) {
      n.text = "COALESCE";
    } else if (name == "GROUP_CONCAT" && to_ != Dialect::kSqlite && n.child(4).empty()) {
      n.text = "STRING_AGG";
      if (args.size() == 1) args.push_back(str_lit(",", to_));
      if (to_ == Dialect::kPostgres) args[0] = cast(std::move(args[0]), "TEXT");
    } else if (name == "STRING_AGG" && to_ == Dialect::kSqlite && n.child(4).empty() && n.child(1).empty()) {
      n.text = "GROUP_CONCAT";
    } else if (name == "INSTR" && to_ == Dialect::kPostgres && args.size() == 2) {
      n.text = "STRPOS";
    } else if (name == "STRPOS" && to_ == Dialect::kSqlite && args.size() == 2) {
      n.text = "INSTR";
    } else if (name == "DATE_TRUNC" && args.size() == 2 && is_string_literal(args[0]) && to_ != Dialect::kPostgres) {
      std::string unit = upper(sql::string_literal_value(args[0].text, to_));
      if (to_ == Dialect::kBigQuery) {
        n = fn("TIMESTAMP_TRUNC", {std::move(args[1]), Node(NodeKind::kDatePart, unit)});
      } else {
        truncate_sqlite(n, std::move(args[1]), unit);
      }
    } else if (name == "TIMESTAMP_TRUNC" && args.size() == 2 && args[1].kind == NodeKind::kDatePart &&
               to_ != Dialect::kBigQuery) {
      std::string unit = args[1].text;
      if (to_ == Dialect::kPostgres) {
        n = fn("DATE_TRUNC", {str_lit(util::to_lower(unit), to_), std::move(args[0])});
      } else {
        truncate_sqlite(n, std::move(args[0]), unit);
      }
    } else if (name == "NOW" && args.empty() && to_ != Dialect::kPostgres) {
      n = to_ == Dialect::kSqlite ? fn("DATETIME", {str_lit("now", to_)}) : fn("CURRENT_TIMESTAMP", {});
    } else if (name == "IIF" && args.size() == 3 && to_ != Dialect::kSqlite) {
      if (to_ == Dialect::kBigQuery) {
        n.text = "IF";
      } else {
        n = case_when(std::move(args[0]), std::move(args[1]), std::move(args[2]));
      }
    } else if (name == "IF" && args.size() == 3 && to_ != Dialect::kBigQuery) {
      if (to_ == Dialect::kSqlite) {
        n.text = "IIF";
      } else {
        n = case_when(std::move(args[0]), std::move(args[1]), std::move(args[2]));
      }
    } else if ((name == "SUBSTRING" || name == "SUBSTR") && to_ != Dialect::kPostgres && args.size() >= 2 &&
               args[1].kind == NodeKind::kKwArg) {
      std::vector<Node> plain_args;
      plain_args.push_back(std::move(args[0]));
      for (std::size_t i = 1; i < args.size(); ++i) plain_args.push_back(std::move(args[i].children[0]));
      n = fn("SUBSTR", std::move(plain_args));
    } else if (name == "COUNTIF" && to_ != Dialect::kBigQuery && args.size() == 1 && n.child(4).empty()) {
      n = fn("COUNT", {case_when(std::move(args[0]), num_lit("1"), Node())});
    } else if ((name == "LEFT" || name == "RIGHT") && to_ == Dialect::kSqlite && args.size() == 2) {
      if (name == "LEFT") {
        n = fn("SUBSTR", {std::move(args[0]), num_lit("1"), std::move(args[1])});
      } else {
        Node neg(NodeKind::kUnary, "-");
        neg.add(paren_if_needed(std::move(args[1])));
        n = fn("SUBSTR", {std::move(args[0]), std::move(neg)});
      }
    }
  }

  void truncate_sqlite(Node& n, Node x, const std::string& unit) {
    if (unit == "DAY") {
      n = fn("DATE", {std::move(x)});
    } else if (unit == "MONTH" || unit == "YEAR") {
      n = fn("DATE", {std::move(x), str_lit(unit == "MONTH" ? "start of month" : "start of year", to_)});
    }
  }

  void limit(Node& n) {
    if (n.flag == "COMMA" && to_ != Dialect::kSqlite) {
      n.flag.clear();
    } else if (n.flag == "FETCH" && to_ != Dialect::kPostgres) {
      n.flag.clear();
    }
    if (n.text == "ALL" && to_ != Dialect::kPostgres) {
      n.text.clear();
      if (to_ == Dialect::kSqlite && !n.child(1).empty()) {
        Node minus(NodeKind::kUnary, "-");
        minus.add(num_lit("1"));
        n.child_mut(0) = std::move(minus);
      }
    }
  }

  void extract(Node& n) {
    if (to_ != Dialect::kSqlite) return;
    static const std::map<std::string, std::string> fmt = {{"YEAR", "%Y"},   {"MONTH", "%m"}, {"DAY", "%d"},
                                                           {"HOUR", "%H"},   {"MINUTE", "%M"},
                                                           {"SECOND", "%S"}, {"DOY", "%j"},  {"DAYOFYEAR", "%j"},
                                                           {"DOW", "%w"}};
    auto it = fmt.find(n.text);
    if (it == fmt.end()) return;
    n = cast(fn("STRFTIME", {str_lit(it->second, to_), std::move(n.children[0])}), "INTEGER");
  }

  Dialect from_, to_;
};

}  // namespace

std::span<const TranspileRule> transpile_rules() { return kRules; }

std::string encode_string_literal(std::string_view value, Dialect d) {
  std::string out = "'";
  for (char c : value) {
    if (d == Dialect::kBigQuery) {
      switch (c) {
        case '\\':
          out += "\\\\";
          continue;
        case '\'':
          out += "\\'";
          continue;
        case '\n':
          out += "\\n";
          continue;
        case '\t':
          out += "\\t";
          continue;
        case '\r':
          out += "\\r";
          continue;
        default:
          break;
      }
    } else if (c == '\'') {
      out += '\'';
    }
    out += c;
  }
  out += '\'';
  return out;
}

std::string transpile(std::string_view text, Dialect from, Dialect to, const KeywordCatalog& catalog) {
  SqlAst ast = parse_sql(text, from, catalog);
  if (from == to) return std::string(text);
  Node root = ast.root();
  Rewriter rw(from, to);
  rw.requote(root);
  rw.rewrite(root);
  std::string out = sql::render(root);
  try {
    parse_sql(out, to, catalog);
  } catch (const SqlError& e) {
    std::string construct = e.kind() == SqlErrorKind::kUnsupportedKeyword ? e.keyword() : std::string(e.what());
    throw TranspileError(construct, "no rewrite rule covers " + construct + " (" + std::string(display_name(from)) +
                                        " -> " + std::string(display_name(to)) + "): " + e.what());
  }
  return out;
}

}  // namespace sqlgen
