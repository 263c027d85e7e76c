#include "sqlgen/generation/candidate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "sqlgen/dialect/lexer.hpp"
#include "sqlgen/llm/json_extract.hpp"
#include "sqlgen/llm/prompts.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using nlohmann::json;
using sql::Node;
using sql::NodeKind;

void FilterConfig::validate() const {
  if (beta1 < 0) throw std::invalid_argument("beta1 must be >= 0");
  if (!(beta2 >= 0.0 && beta2 <= 1.0)) throw std::invalid_argument("beta2 must be in [0, 1]");
  if (alpha1 < 1) throw std::invalid_argument("alpha1 must be >= 1");
  if (k_rows < 1) throw std::invalid_argument("k must be >= 1");
  if (timeout_ms < 1) throw std::invalid_argument("timeout_ms must be >= 1");
  if (row_limit < 1) throw std::invalid_argument("row_limit must be >= 1");
}

std::string_view to_string(StepStatus s) {
  switch (s) {
    case StepStatus::kPass:
      return "PASS";
    case StepStatus::kFail:
      return "FAIL";
    case StepStatus::kFixed:
      return "FIXED";
  }
  return "";
}

std::string_view to_string(GenError::Kind k) {
  switch (k) {
    case GenError::Kind::kLlmError:
      return "LlmError";
    case GenError::Kind::kJsonError:
      return "JsonError";
    case GenError::Kind::kParseError:
      return "ParseError";
  }
  return "";
}

std::string ExecDigest::to_string() const {
  return "rows=" + std::to_string(row_count) + (truncated ? "+" : "") + " cols=" + util::join(columns, ",") +
         " hash=" + first_k_hash;
}

namespace {

StepStatus status_from(std::string_view s) {
  if (s == "PASS") return StepStatus::kPass;
  if (s == "FAIL") return StepStatus::kFail;
  if (s == "FIXED") return StepStatus::kFixed;
  throw std::invalid_argument("unknown filter status: " + std::string(s));
}

Complexity complexity_from(std::string_view s) {
  for (Complexity c : {Complexity::kSimple, Complexity::kModerate, Complexity::kChallenging}) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown complexity: " + std::string(s));
}

}  // namespace

std::string CandidatePair::to_json() const {
  json trail = json::array();
  for (const auto& s : filter_trail) {
    trail.push_back({{"filter", s.filter}, {"status", std::string(sqlgen::to_string(s.status))}, {"detail", s.detail}});
  }
  json j{{"id", id},
         {"dialect", std::string(sqlgen::to_string(dialect))},
         {"db_id", db_id},
         {"question", question},
         {"sql", sql},
         {"template_id", template_id},
         {"complexity", std::string(sqlgen::to_string(complexity))},
         {"filter_trail", trail}};
  return j.dump();
}

CandidatePair CandidatePair::from_json(std::string_view line) {
  json j = json::parse(line);
  CandidatePair p;
  p.id = j.at("id").get<std::string>();
  p.dialect = dialect_from_string(j.at("dialect").get<std::string>());
  p.db_id = j.at("db_id").get<std::string>();
  p.question = j.at("question").get<std::string>();
  p.sql = j.at("sql").get<std::string>();
  p.template_id = j.at("template_id").get<std::string>();
  p.complexity = complexity_from(j.at("complexity").get<std::string>());
  for (const auto& s : j.at("filter_trail")) {
    p.filter_trail.push_back({s.at("filter").get<std::string>(), status_from(s.at("status").get<std::string>()),
                              s.value("detail", std::string())});
  }
  return p;
}

bool CandidatePair::passed(std::string_view filter) const {
  for (const auto& s : filter_trail) {
    if (s.filter == filter) return s.status != StepStatus::kFail;
  }
  return false;
}

std::string pair_id(std::string_view db_id, std::string_view template_id, std::string_view question,
                    std::string_view sql) {
  std::string key;
  for (std::string_view part : {db_id, template_id, question, sql}) {
    key += part;
    key += '\x1f';
  }
  return "q-" + util::hex64(util::fnv1a64(key));
}

// ---- candidate generation ------------------------------------------------------------

std::string generation_prompt(const SqlTemplate& tmpl, const DatabaseProfile& profile) {
  return render_prompt(builtin_prompt(PromptName::kGen),
                       {{"DIALECT", std::string(display_name(tmpl.dialect))},
                        {"DATABASE_SCHEMA", render_schema_prompt(profile)},
                        {"SQL_TEMPLATE", tmpl.body}});
}

namespace {

// Removes a surrounding code fence and trailing semicolons.
std::string clean_sql(std::string_view raw) {
  std::string s(util::trim(raw));
  if (s.rfind("```", 0) == 0) {
    auto nl = s.find('\n');
    s = nl == std::string::npos ? std::string() : s.substr(nl + 1);
    auto close = s.rfind("```");
    if (close != std::string::npos) s.erase(close);
  }
  s = std::string(util::trim(s));
  while (!s.empty() && (s.back() == ';' || std::isspace(static_cast<unsigned char>(s.back())))) s.pop_back();
  return s;
}

bool is_placeholder_word(std::string_view w) { return w == "column" || w == "table" || w == "literal"; }

bool profile_defines(const DatabaseProfile& p, std::string_view name) {
  for (const auto& t : p.tables) {
    if (util::iequals(t.name, name)) return true;
    for (const auto& c : t.columns) {
      if (util::iequals(c.name, name)) return true;
    }
  }
  return false;
}

}  // namespace

void check_generated_sql(const std::string& sql, Dialect dialect, const DatabaseProfile* profile) {
  std::optional<SqlAst> ast;
  try {
    ast.emplace(parse_sql(sql, dialect));
  } catch (const SqlError& e) {
    throw GenError(GenError::Kind::kParseError, e.what());
  }
  for (const auto& piece : ast->pieces()) {
    if (piece.kind != sql::PieceKind::kIdentifier || !is_placeholder_word(piece.text)) continue;
    if (profile && profile_defines(*profile, piece.text)) continue;
    throw GenError(GenError::Kind::kParseError, "unfilled placeholder '" + piece.text + "'");
  }
}

CandidatePair generate_candidate(const SqlTemplate& tmpl, const DatabaseProfile& profile, LlmClient& llm) {
  if (tmpl.dialect != profile.dialect) {
    throw std::invalid_argument("template dialect " + std::string(to_string(tmpl.dialect)) +
                                " does not match database dialect " + std::string(to_string(profile.dialect)));
  }
  std::string reply;
  try {
    reply = llm.complete(generation_prompt(tmpl, profile), RoleKind::kGenerator);
  } catch (const LlmError& e) {
    throw GenError(GenError::Kind::kLlmError, e.what());
  }
  std::string question, sql;
  try {
    json j = parse_json_object(reply, {"question", "sql_query"});
    if (!j["question"].is_string() || !j["sql_query"].is_string()) {
      throw GenError(GenError::Kind::kJsonError, "question and sql_query must be strings");
    }
    question = util::collapse_whitespace(j["question"].get<std::string>());
    sql = clean_sql(j["sql_query"].get<std::string>());
  } catch (const JsonError& e) {
    throw GenError(GenError::Kind::kJsonError, e.what());
  }
  if (question.empty()) throw GenError(GenError::Kind::kJsonError, "question is empty");
  if (sql.empty()) throw GenError(GenError::Kind::kParseError, "sql_query is empty");
  check_generated_sql(sql, profile.dialect, &profile);

  CandidatePair pair;
  pair.dialect = profile.dialect;
  pair.db_id = profile.db_id;
  pair.template_id = tmpl.id;
  pair.question = std::move(question);
  pair.sql = std::move(sql);
  pair.complexity = classify_complexity(parse_sql(pair.sql, pair.dialect));
  pair.id = pair_id(pair.db_id, pair.template_id, pair.question, pair.sql);
  return pair;
}

// ---- execution filter ----------------------------------------------------------------

ExecDigest make_digest(const ResultSet& rs, std::size_t k) {
  ExecDigest d;
  d.row_count = rs.rows.size();
  d.columns = rs.columns;
  d.truncated = rs.truncated;
  std::string acc;
  for (std::size_t i = 0; i < rs.rows.size() && i < k; ++i) {
    for (const auto& v : rs.rows[i]) {
      acc += sql_literal(v);
      acc += '\x1f';
    }
    acc += '\x1e';
  }
  d.first_k_hash = util::hex64(util::fnv1a64(acc));
  return d;
}

std::optional<ResultSet> filter_execution(CandidatePair& pair, Database& db, const FilterConfig& cfg) {
  try {
    ResultSet rs = execute(pair.sql, db, cfg.timeout_ms, cfg.row_limit);
    if (rs.parse_only) {
      pair.filter_trail.push_back({"execution", StepStatus::kPass, "parse-only backend"});
      return rs;
    }
    pair.exec_digest = make_digest(rs, cfg.k_rows);
    pair.filter_trail.push_back({"execution", StepStatus::kPass, pair.exec_digest->to_string()});
    return rs;
  } catch (const ExecError& e) {
    pair.filter_trail.push_back(
        {"execution", StepStatus::kFail, std::string(to_string(e.kind())) + ": " + e.what()});
    return std::nullopt;
  }
}

// ---- value conditions ----------------------------------------------------------------

namespace {

bool is_comparison(std::string_view op) {
  return op == "=" || op == "==" || op == "!=" || op == "<>" || op == "<" || op == "<=" || op == ">" || op == ">=";
}

// The literal an operand reduces to, if any: a string or number literal,
// possibly signed, parenthesized, typed (DATE '...'), cast or collated.
std::optional<ValueCondition> operand_literal(const Node& n, Dialect d) {
  switch (n.kind) {
    case NodeKind::kLiteral:
      if (n.flag == "string") return ValueCondition{sql::string_literal_value(n.text, d), false};
      if (n.flag == "number") return ValueCondition{n.text, true};
      return std::nullopt;
    case NodeKind::kUnary:
      if ((n.text == "-" || n.text == "+") && n.child(0).kind == NodeKind::kLiteral && n.child(0).flag == "number") {
        return ValueCondition{(n.text == "-" ? "-" : "") + n.child(0).text, true};
      }
      return std::nullopt;
    case NodeKind::kParen:
      if (n.children.size() == 1) return operand_literal(n.children[0], d);
      return std::nullopt;
    case NodeKind::kTypedLiteral:
    case NodeKind::kCast:
    case NodeKind::kPgCast:
    case NodeKind::kCollate:
      return operand_literal(n.child(0), d);
    default:
      return std::nullopt;
  }
}

std::string strip_wildcards(std::string s, std::string_view op) {
  char wild = op == "GLOB" ? '*' : '%';
  if (op != "LIKE" && op != "ILIKE" && op != "GLOB") return s;
  std::size_t a = 0, b = s.size();
  while (a < b && s[a] == wild) ++a;
  while (b > a && s[b - 1] == wild) --b;
  return s.substr(a, b - a);
}

void collect_conditions(const Node& n, Dialect d, std::vector<ValueCondition>& out);

// Visits the children of n; children at `operand` positions that reduce to a
// literal are recorded, everything else is searched recursively.
void visit_operands(const Node& n, Dialect d, std::vector<ValueCondition>& out,
                    const std::function<bool(std::size_t)>& operand, std::string_view like_op = {}) {
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const Node& c = n.children[i];
    if (operand(i)) {
      if (auto v = operand_literal(c, d)) {
        if (!like_op.empty()) v->text = strip_wildcards(v->text, like_op);
        out.push_back(std::move(*v));
        continue;
      }
    }
    collect_conditions(c, d, out);
  }
}

void collect_conditions(const Node& n, Dialect d, std::vector<ValueCondition>& out) {
  auto all = [](std::size_t) { return true; };
  auto none = [](std::size_t) { return false; };
  switch (n.kind) {
    case NodeKind::kLimit:
      return;
    case NodeKind::kBinary:
      visit_operands(n, d, out, is_comparison(n.text) ? std::function<bool(std::size_t)>(all) : none);
      return;
    case NodeKind::kLike:
      visit_operands(n, d, out, [](std::size_t i) { return i < 2; }, n.text);
      return;
    case NodeKind::kBetween:
    case NodeKind::kInList:
      visit_operands(n, d, out, all);
      return;
    case NodeKind::kIs:
      visit_operands(n, d, out, n.text == "DISTINCT FROM" ? std::function<bool(std::size_t)>(all) : none);
      return;
    default:
      visit_operands(n, d, out, none);
  }
}

}  // namespace

std::vector<ValueCondition> extract_value_conditions(const SqlAst& ast) {
  std::vector<ValueCondition> out;
  collect_conditions(ast.root(), ast.dialect(), out);
  return out;
}

std::vector<std::string> extract_value_conditions(std::string_view sql, Dialect dialect) {
  std::vector<std::string> out;
  for (auto& c : extract_value_conditions(parse_sql(sql, dialect))) out.push_back(std::move(c.text));
  return out;
}

// ---- edit distance ----------------------------------------------------------------

namespace {

std::u32string code_points(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    if (i + len > s.size()) len = 1;
    char32_t cp = len == 1 ? c : c & (0xFF >> (len + 1));
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      cp = c;
      len = 1;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t naive(const std::u32string& a, std::size_t i, const std::u32string& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return naive(a, i + 1, b, j + 1);
  return 1 + std::min({naive(a, i + 1, b, j), naive(a, i, b, j + 1), naive(a, i + 1, b, j + 1)});
}

}  // namespace

namespace {

template <typename Str>
std::size_t edit_distance(const Str& a, const Str& b, std::size_t* prev, std::size_t* cur) {
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

}  // namespace

std::size_t levenshtein(std::string_view sa, std::string_view sb) {
  constexpr std::size_t kShort = 64;
  if (sb.size() < kShort && is_ascii(sa) && is_ascii(sb)) {
    // Short ASCII strings: bytes are code points; no allocation.
    std::size_t prev[kShort + 1], cur[kShort + 1];
    return edit_distance(sa, sb, prev, cur);
  }
  std::u32string a = code_points(sa), b = code_points(sb);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  return edit_distance(a, b, prev.data(), cur.data());
}

std::size_t levenshtein_naive(std::string_view a, std::string_view b) {
  return naive(code_points(a), 0, code_points(b), 0);
}

// ---- mismatch filter ----------------------------------------------------------------

namespace {

bool edge_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string strip_edges(std::string_view w) {
  std::size_t a = 0, b = w.size();
  while (a < b && edge_punct(w[a])) {
    // keep the sign of a number: "-5"
    if ((w[a] == '-' || w[a] == '+') && a + 1 < b && std::isdigit(static_cast<unsigned char>(w[a + 1]))) break;
    ++a;
  }
  while (b > a && edge_punct(w[b - 1])) --b;
  return std::string(w.substr(a, b - a));
}

std::vector<std::string> grams_of(const std::vector<std::string>& words, std::size_t n) {
  std::vector<std::string> out;
  if (words.empty()) return out;
  if (words.size() <= n) {
    out.push_back(util::join(words, " "));
    return out;
  }
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    out.push_back(util::join(std::vector<std::string>(words.begin() + i, words.begin() + i + n), " "));
  }
  return out;
}

std::string fmt_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::vector<std::string> question_words(std::string_view question) {
  std::vector<std::string> out;
  for (const auto& w : util::split_whitespace(question)) {
    std::string s = strip_edges(w);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::string MismatchReport::detail() const {
  std::vector<std::string> parts;
  for (const auto& s : scores) {
    std::string d = s.distance == std::numeric_limits<std::size_t>::max() ? "inf" : std::to_string(s.distance);
    parts.push_back("'" + s.condition.text + "' d=" + d + " s=" + fmt_score(s.similarity) +
                    (s.passed ? " ok" : " mismatch"));
  }
  return parts.empty() ? "no value conditions" : util::join(parts, "; ");
}

MismatchReport mismatch_check(std::string_view question, const std::vector<ValueCondition>& conditions,
                              Embedder& embedder, int beta1, double beta2) {
  MismatchReport report;
  const auto words = question_words(question);
  std::map<std::string, std::vector<double>> cache;
  auto embed = [&](const std::string& text) -> const std::vector<double>& {
    auto it = cache.find(text);
    if (it == cache.end()) it = cache.emplace(text, embedder.embed(text)).first;
    return it->second;
  };
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  for (const auto& cond : conditions) {
    ConditionScore sc;
    sc.condition = cond;
    std::string value = util::collapse_whitespace(cond.text);
    if (value.empty()) {
      // Nothing a question could mention (e.g. x = '').
      sc.passed = true;
      report.scores.push_back(std::move(sc));
      continue;
    }
    if (cond.numeric) {
      sc.distance = kInf;
      for (const auto& w : words) {
        if (w == value) {
          sc.distance = 0;
          sc.similarity = 1.0;
          sc.best_gram = w;
          break;
        }
      }
    } else {
      const std::size_t n = util::split_whitespace(value).size();
      const std::string lowered = util::to_lower(value);
      sc.distance = kInf;
      const auto& lv = embed(value);
      for (const auto& g : grams_of(words, n)) {
        std::size_t d = levenshtein(lowered, util::to_lower(g));
        if (d < sc.distance) {
          sc.distance = d;
          sc.best_gram = g;
        }
        sc.similarity = std::max(sc.similarity, cosine(lv, embed(g)));
      }
    }
    sc.passed = sc.distance != kInf && sc.distance <= static_cast<std::size_t>(beta1) && sc.similarity >= beta2;
    report.passed = report.passed && sc.passed;
    report.scores.push_back(std::move(sc));
  }
  return report;
}

bool filter_mismatch(CandidatePair& pair, Embedder& embedder, const FilterConfig& cfg) {
  auto conds = extract_value_conditions(parse_sql(pair.sql, pair.dialect));
  MismatchReport r = mismatch_check(pair.question, conds, embedder, cfg.beta1, cfg.beta2);
  pair.filter_trail.push_back({"mismatch", r.passed ? StepStatus::kPass : StepStatus::kFail, r.detail()});
  return r.passed;
}

// ---- aggregation filter ----------------------------------------------------------------

namespace {

const std::set<std::string, std::less<>> kAggregateFunctions = {"AVG", "SUM", "MIN", "MAX", "COUNT", "TOTAL"};
const std::set<std::string, std::less<>> kAggregationWords = {"avg",     "average", "sum",     "min",   "minimum",
                                                              "max",     "maximum", "count",   "total", "mean"};

// Splits an identifier into lowercase words at non-alphanumerics and at
// lower-to-upper case changes: "avgSalary_2" -> avg, salary, 2.
std::vector<std::string> identifier_words(std::string_view name) {
  std::vector<std::string> out;
  std::string cur;
  char prev = 0;
  for (char c : name) {
    auto uc = static_cast<unsigned char>(c);
    if (!std::isalnum(uc)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      if (std::isupper(uc) && prev && std::islower(static_cast<unsigned char>(prev)) && !cur.empty()) {
        out.push_back(std::move(cur));
        cur.clear();
      }
      cur += static_cast<char>(std::tolower(uc));
    }
    prev = c;
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

bool has_redundant_aggregation(const SqlAst& ast) {
  bool found = false;
  sql::walk(ast.root(), [&](const Node& n) {
    if (found) return false;
    if (n.kind != NodeKind::kFunc || !kAggregateFunctions.count(util::to_upper(n.text))) return true;
    sql::walk(n.child(0), [&](const Node& a) {
      if (a.kind == NodeKind::kColumn) {
        for (const auto& w : identifier_words(sql::identifier_value(a.text))) {
          if (kAggregationWords.count(w)) found = true;
        }
      }
      return !found;
    });
    return !found;
  });
  return found;
}

bool filter_aggregation(CandidatePair& pair) {
  bool bad = has_redundant_aggregation(parse_sql(pair.sql, pair.dialect));
  pair.filter_trail.push_back({"aggregation", bad ? StepStatus::kFail : StepStatus::kPass,
                               bad ? "aggregate over a column that is already aggregated" : ""});
  return !bad;
}

// ---- finalization ----------------------------------------------------------------

std::string normalize_sql(std::string_view sql, Dialect dialect) {
  std::vector<sql::Token> tokens;
  try {
    tokens = sql::tokenize(sql, dialect);
  } catch (const SqlError&) {
    return util::collapse_whitespace(sql);
  }
  std::vector<std::string> parts;
  for (const auto& t : tokens) {
    if (t.kind == sql::TokenKind::kEnd) break;
    if (t.kind == sql::TokenKind::kWord && (is_grammar_keyword(t.upper) || is_known_function(t.upper))) {
      parts.push_back(t.upper);
    } else {
      parts.push_back(t.text);
    }
  }
  while (!parts.empty() && parts.back() == ";") parts.pop_back();
  return util::join(parts, " ");
}

std::size_t question_length(std::string_view question) { return util::split_whitespace(question).size(); }

std::vector<CandidatePair> finalize_batch(const std::vector<CandidatePair>& pairs, int alpha1) {
  std::vector<CandidatePair> out;
  std::unordered_set<std::string> seen;
  for (const auto& p : pairs) {
    if (question_length(p.question) > static_cast<std::size_t>(alpha1)) continue;
    if (!seen.insert(normalize_sql(p.sql, p.dialect)).second) continue;
    out.push_back(p);
  }
  return out;
}

}  // namespace sqlgen
