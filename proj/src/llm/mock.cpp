// Rule-based stand-in for a generator/judge model. It recognizes the three
// shipped prompts by their opening lines, pulls the slot values back out of
// the rendered text, and answers deterministically (choices are driven by a
// hash of the prompt). Good enough to exercise every pipeline stage offline;
// not meant to produce interesting data.

#include <algorithm>
#include <optional>

#include "json.hpp"
#include "sqlgen/db/database.hpp"
#include "sqlgen/dialect/ast.hpp"
#include "sqlgen/dialect/lexer.hpp"
#include "sqlgen/llm/client.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using nlohmann::json;

namespace {

constexpr std::string_view kTempGenHead = "You are an agent expert in data science and SQL.\n\nYour are tasked";
constexpr std::string_view kGenHead = "You are an agent expert in data science and SQL.\n\nYou are provided";
constexpr std::string_view kQualityHead = "You are a meticulous data quality assurance professional.";

std::string between(std::string_view text, std::string_view start, std::string_view end) {
  auto a = text.find(start);
  if (a == std::string_view::npos) return {};
  a += start.size();
  auto b = text.find(end, a);
  if (b == std::string_view::npos) b = text.size();
  return std::string(text.substr(a, b - a));
}

Dialect dialect_in(std::string_view text, std::string_view before, std::string_view after) {
  std::string name = between(text, before, after);
  try {
    return dialect_from_string(util::to_lower(util::trim(name)));
  } catch (const std::invalid_argument&) {
    return Dialect::kSqlite;
  }
}

// ---- template expansion ----------------------------------------------------------------

int next_alias_index(const std::string& tmpl) {
  int max_index = 0;
  for (const auto& w : util::split_whitespace(tmpl)) {
    std::size_t i = 0;
    while (i < w.size()) {
      if (w[i] == 'a' && (i == 0 || !std::isalnum(static_cast<unsigned char>(w[i - 1])))) {
        std::size_t j = i + 1;
        while (j < w.size() && std::isdigit(static_cast<unsigned char>(w[j]))) ++j;
        if (j > i + 1 && (j == w.size() || !std::isalnum(static_cast<unsigned char>(w[j])))) {
          max_index = std::max(max_index, std::stoi(w.substr(i + 1, j - i - 1)));
        }
        i = j;
      } else {
        ++i;
      }
    }
  }
  return max_index + 1;
}

struct KeywordForm {
  std::string_view keyword;
  enum Kind { kSelectExpr, kWhere, kQualify, kDistinctOn } kind;
  std::string_view form;  // X = alias.column, L = literal
};

const std::vector<KeywordForm>& keyword_forms() {
  static const std::vector<KeywordForm> k = {
      {"QUALIFY", KeywordForm::kQualify, "ROW_NUMBER() OVER (PARTITION BY X ORDER BY X DESC) = L"},
      {"ILIKE", KeywordForm::kWhere, "X ILIKE L"},
      {"GLOB", KeywordForm::kWhere, "X GLOB L"},
      {"REGEXP_CONTAINS", KeywordForm::kWhere, "REGEXP_CONTAINS(X, L)"},
      {"REGEXP_MATCHES", KeywordForm::kSelectExpr, "REGEXP_MATCHES(X, L)"},
      {"JULIANDAY", KeywordForm::kSelectExpr, "JULIANDAY(X)"},
      {"STRFTIME", KeywordForm::kSelectExpr, "STRFTIME(L, X)"},
      {"GROUP_CONCAT", KeywordForm::kSelectExpr, "GROUP_CONCAT(X)"},
      {"TOTAL", KeywordForm::kSelectExpr, "TOTAL(X)"},
      {"IIF", KeywordForm::kSelectExpr, "IIF(X = L, 1, 0)"},
      {"IFNULL", KeywordForm::kSelectExpr, "IFNULL(X, L)"},
      {"INSTR", KeywordForm::kSelectExpr, "INSTR(X, L)"},
      {"STRING_AGG", KeywordForm::kSelectExpr, "STRING_AGG(X, L)"},
      {"ARRAY_AGG", KeywordForm::kSelectExpr, "ARRAY_AGG(X)"},
      {"DATE_TRUNC", KeywordForm::kSelectExpr, "DATE_TRUNC(L, X)"},
      {"TO_CHAR", KeywordForm::kSelectExpr, "TO_CHAR(X, L)"},
      {"STRPOS", KeywordForm::kSelectExpr, "STRPOS(X, L)"},
      {"REGEXP_REPLACE", KeywordForm::kSelectExpr, "REGEXP_REPLACE(X, L, L)"},
      {"SAFE_DIVIDE", KeywordForm::kSelectExpr, "SAFE_DIVIDE(X, X)"},
      {"COUNTIF", KeywordForm::kSelectExpr, "COUNTIF(X = L)"},
      {"IF", KeywordForm::kSelectExpr, "IF(X = L, 1, 0)"},
      {"FORMAT_DATE", KeywordForm::kSelectExpr, "FORMAT_DATE(L, X)"},
      {"SPLIT", KeywordForm::kSelectExpr, "SPLIT(X, L)"},
      {"DISTINCT ON", KeywordForm::kDistinctOn, ""},
  };
  return k;
}

// Substitutes standalone X / L placeholders; letters inside keywords (GLOB, REGEXP) are kept.
std::string fill_form(std::string_view form, const std::string& x) {
  auto word = [&](std::size_t i) {
    return i < form.size() && (std::isalnum(static_cast<unsigned char>(form[i])) || form[i] == '_');
  };
  std::string out;
  for (std::size_t i = 0; i < form.size(); ++i) {
    const char c = form[i];
    const bool standalone = (i == 0 || !word(i - 1)) && !word(i + 1);
    if (c == 'X' && standalone) {
      out += x;
    } else if (c == 'L' && standalone) {
      out += "literal";
    } else {
      out += c;
    }
  }
  return out;
}

bool mentions(const std::string& upper_text, std::string_view keyword) {
  std::size_t pos = 0;
  while ((pos = upper_text.find(keyword, pos)) != std::string::npos) {
    auto word = [&](std::size_t i) {
      char c = upper_text[i];
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    bool left = pos == 0 || !word(pos - 1);
    bool right = pos + keyword.size() >= upper_text.size() || !word(pos + keyword.size());
    if (left && right) return true;
    pos += keyword.size();
  }
  return false;
}

std::string expand_template(std::string_view prompt) {
  Dialect d = dialect_in(prompt, "sample tutorial document for ", " SQL.");
  std::string tutorial = between(prompt, "\nTutorial:\n", "\n\nQuery template:\n");
  std::string tmpl(util::trim(between(prompt, "\n\nQuery template:\n", "\n\nYour response should be")));
  const std::uint64_t h = util::fnv1a64(prompt);
  const std::string a = "a" + std::to_string(next_alias_index(tmpl));
  const std::string x = a + ".column";
  const std::string from = " FROM (" + tmpl + ") AS " + a;

  std::vector<const KeywordForm*> usable;
  const std::string upper = util::to_upper(tutorial);
  const auto& catalog = KeywordCatalog::builtin();
  for (const auto& f : keyword_forms()) {
    const KeywordSupport* ks = catalog.find(f.keyword);
    if (ks != nullptr && !ks->supports(d)) continue;
    if (mentions(upper, f.keyword)) usable.push_back(&f);
  }

  std::string out;
  std::string why;
  if (!usable.empty() && (h & 3) != 0) {
    const KeywordForm& f = *usable[(h >> 2) % usable.size()];
    why = "The tutorial introduces " + std::string(f.keyword) + ", so the template is wrapped in a derived table and " +
          std::string(f.keyword) + " is applied to one of its columns.";
    switch (f.kind) {
      case KeywordForm::kSelectExpr:
        out = "SELECT " + x + ", " + fill_form(f.form, x) + from;
        break;
      case KeywordForm::kWhere:
        out = "SELECT *" + from + " WHERE " + fill_form(f.form, x);
        break;
      case KeywordForm::kQualify:
        out = "SELECT *" + from + " QUALIFY " + fill_form(f.form, x);
        break;
      case KeywordForm::kDistinctOn:
        out = "SELECT DISTINCT ON (" + x + ") " + x + from + " ORDER BY " + x;
        break;
    }
  } else {
    why = "The tutorial has no directly applicable construct, so the template is nested and aggregated.";
    switch ((h >> 2) % 4) {
      case 0:
        out = "SELECT COUNT(*)" + from;
        break;
      case 1:
        out = "SELECT " + x + ", COUNT(*)" + from + " GROUP BY " + x + " HAVING COUNT(*) > literal";
        break;
      case 2:
        out = "SELECT *" + from + " WHERE " + x + " = literal";
        break;
      default:
        out = "WITH " + a + " AS (" + tmpl + ") SELECT * FROM " + a + " ORDER BY " + a + ".column DESC";
        break;
    }
  }
  return json{{"reasoning", why}, {"query_template", out}}.dump(4);
}

// ---- sample generation ----------------------------------------------------------------

struct SchemaTable {
  TableInfo info;
  Row sample;
};

std::vector<SchemaTable> parse_schema(const std::string& schema, Dialect d) {
  std::vector<SchemaTable> out;
  std::vector<TableInfo> tables;
  try {
    tables = parse_ddl(schema, d);
  } catch (const std::exception&) {
    return out;
  }
  std::vector<Row> rows;
  for (const auto& line : util::split(schema, '\n')) {
    constexpr std::string_view kTag = "-- sample row: ";
    if (line.rfind(kTag, 0) != 0) continue;
    Row row;
    try {
      bool negative = false;
      for (const auto& t : sql::tokenize(line.substr(kTag.size()), d)) {
        if (t.kind == sql::TokenKind::kOperator && t.text == "-") {
          negative = true;
          continue;
        }
        if (t.kind == sql::TokenKind::kNumber) {
          row.push_back(SqlValue{SqlValue::Type::kReal, (negative ? "-" : "") + t.text});
        }
        negative = false;
        if (t.kind == sql::TokenKind::kString) {
          row.push_back(SqlValue::str(sql::string_literal_value(t.text, d)));
        } else if (t.kind == sql::TokenKind::kWord && t.upper == "NULL") {
          row.push_back(SqlValue::null());
        } else if (t.kind == sql::TokenKind::kBlob) {
          row.push_back(SqlValue::null());
        }
      }
    } catch (const std::exception&) {
    }
    rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    SchemaTable st{tables[i], i < rows.size() ? rows[i] : Row{}};
    st.sample.resize(st.info.columns.size());
    out.push_back(std::move(st));
  }
  return out;
}

std::string words_of(std::string_view name) {
  std::string out(name);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::string generate_pair(std::string_view prompt) {
  Dialect d = dialect_in(prompt, "together with a ", " SQL template");
  // The schema spans blank lines between tables; take everything up to the template header.
  std::string header = "\n\n" + std::string(display_name(d)) + " SQL template to get inspired by:\n";
  std::string schema = between(prompt, "\nDatbase schema:\n", header);
  std::string tmpl(util::trim(between(prompt, header, "\n\nThank step by step")));
  auto tables = parse_schema(schema, d);
  if (tables.empty() || tmpl.empty()) {
    return json{{"question", "What is one?"}, {"sql_query", "SELECT 1"}}.dump();
  }
  const std::uint64_t h = util::fnv1a64(prompt);

  // Prefer tables with a sampled row.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    bool has = std::any_of(tables[i].sample.begin(), tables[i].sample.end(), [](const SqlValue& v) { return !v.is_null(); });
    if (has && !tables[i].info.columns.empty()) order.push_back(i);
  }
  if (order.empty()) order.push_back(0);
  const SchemaTable& t = tables[order[h % order.size()]];
  const auto& cols = t.info.columns;
  if (cols.empty()) return json{{"question", "What is one?"}, {"sql_query", "SELECT 1"}}.dump();

  std::vector<sql::Token> toks;
  try {
    toks = sql::tokenize(tmpl, d);
  } catch (const std::exception&) {
    return json{{"question", "What is one?"}, {"sql_query", "SELECT 1"}}.dump();
  }
  // Derived tables only expose the columns they select; keep every column
  // placeholder on one column so outer references resolve.
  bool derived = false;
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    if (toks[i].text == "(" && (toks[i + 1].upper == "SELECT" || toks[i + 1].upper == "WITH")) derived = true;
    if (toks[i].upper == "WITH") derived = true;
  }
  std::vector<std::size_t> col_order;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (!t.sample[i].is_null()) col_order.push_back(i);
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (t.sample[i].is_null()) col_order.push_back(i);
  }
  std::size_t next_col = (h >> 8) % col_order.size();

  std::string sql;
  std::vector<std::string> conditions;
  std::string limit_text;
  std::size_t cursor = 0;
  std::size_t last_col = col_order[next_col];
  std::string prev_upper;
  for (const auto& tok : toks) {
    if (tok.kind == sql::TokenKind::kEnd) break;
    std::string replacement;
    bool replace = false;
    if (tok.kind == sql::TokenKind::kWord && tok.text == "table") {
      replacement = sql::quote_identifier(t.info.name, d);
      replace = true;
    } else if (tok.kind == sql::TokenKind::kWord && tok.text == "column") {
      std::size_t idx = col_order[next_col];
      if (!derived) next_col = (next_col + 1) % col_order.size();
      last_col = idx;
      replacement = sql::quote_identifier(cols[idx].name, d);
      replace = true;
    } else if (tok.kind == sql::TokenKind::kWord && tok.text == "literal") {
      replace = true;
      if (prev_upper == "LIMIT" || prev_upper == "OFFSET") {
        replacement = prev_upper == "LIMIT" ? "5" : "1";
        if (prev_upper == "LIMIT") limit_text = "the first 5";
      } else {
        const SqlValue& v = t.sample[last_col];
        if (v.is_null()) {
          replacement = "1";
          conditions.push_back(words_of(cols[last_col].name) + " 1");
        } else if (v.type == SqlValue::Type::kText) {
          replacement = sql::quote_string(v.text);
          conditions.push_back(words_of(cols[last_col].name) + " " + v.text);
        } else {
          replacement = v.text;
          conditions.push_back(words_of(cols[last_col].name) + " " + v.text);
        }
      }
    }
    if (replace) {
      sql += tmpl.substr(cursor, tok.pos - cursor);
      sql += replacement;
      cursor = tok.end;
    }
    if (tok.kind == sql::TokenKind::kWord) prev_upper = tok.upper;
  }
  sql += tmpl.substr(cursor);

  std::string question = "Using the " + words_of(t.info.name) + " records";
  if (!conditions.empty()) question += " with " + util::join(conditions, " and ");
  if (!limit_text.empty()) question += ", show " + limit_text;
  question += ", what does the report return?";
  json reply{{"question", question}, {"sql_query", sql}};
  return "Here is the generated pair.\n" + reply.dump(4);
}

// ---- quality check ----------------------------------------------------------------

std::string judge_pair() {
  return json{{"reasoning", "The question is answerable from the schema and the query returns what it asks."},
              {"fixing_needed", "NO"},
              {"fixed_question", ""},
              {"fixed_sql_query", ""}}
      .dump(4);
}

}  // namespace

std::string synthesize_reply(std::string_view prompt) {
  if (prompt.rfind(kTempGenHead, 0) == 0) return expand_template(prompt);
  if (prompt.rfind(kGenHead, 0) == 0) return generate_pair(prompt);
  if (prompt.rfind(kQualityHead, 0) == 0) return judge_pair();
  throw LlmError(LlmError::Kind::kTransport, "mock responder does not recognize the prompt");
}

}  // namespace sqlgen
