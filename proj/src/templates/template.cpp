#include "sqlgen/templates/template.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "sqlgen/dialect/lexer.hpp"
#include "sqlgen/dialect/transpile.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using nlohmann::json;
using sql::IdentRole;
using sql::Piece;
using sql::PieceKind;

namespace {

std::string alias_name(std::size_t i) { return "a" + std::to_string(i); }

bool is_alias_word(std::string_view w) {
  if (w.size() < 2 || w[0] != 'a') return false;
  return std::all_of(w.begin() + 1, w.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string ident_key(const std::string& raw) { return util::to_lower(sql::identifier_value(raw)); }

// Lowercased names declared as aliases anywhere in the statement.
std::unordered_set<std::string> declared_aliases(const std::vector<Piece>& pieces) {
  std::unordered_set<std::string> out;
  for (const auto& p : pieces) {
    if (p.kind == PieceKind::kIdentifier && p.role == IdentRole::kAliasDecl) out.insert(ident_key(p.text));
  }
  return out;
}

bool after_dot(const std::vector<Piece>& pieces, std::size_t i) {
  return i > 0 && pieces[i - 1].kind == PieceKind::kPunct && pieces[i - 1].text == ".";
}

// Rewrites template tokens in `body`, keeping the text between tokens.
template <typename Fn>
std::string substitute(std::string_view body, Dialect dialect, Fn&& replacement) {
  auto tokens = sql::tokenize(body, dialect);
  std::string out;
  std::size_t cursor = 0;
  for (const auto& tok : tokens) {
    if (tok.kind == sql::TokenKind::kEnd) break;
    out.append(body.substr(cursor, tok.pos - cursor));
    if (tok.kind == sql::TokenKind::kWord) {
      out += replacement(tok.text);
    } else {
      out += tok.text;
    }
    cursor = tok.end;
  }
  out.append(body.substr(cursor));
  return out;
}

json origin_to_json(const TemplateOrigin& o) {
  if (o.kind == TemplateOrigin::Kind::kSeed) return json{{"kind", "SEED"}};
  return json{{"kind", "EXPANDED"}, {"tutorial_id", o.tutorial_id}, {"parent_id", o.parent_id}};
}

TemplateOrigin origin_from_json(const json& j) {
  std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
  if (kind == "SEED") return TemplateOrigin::seed();
  if (kind == "EXPANDED") {
    return TemplateOrigin::expanded(j.at("tutorial_id").get<std::string>(), j.at("parent_id").get<std::string>());
  }
  throw TemplateError(TemplateError::Kind::kFormat, "unknown template origin '" + kind + "'");
}

}  // namespace

std::string template_id(std::string_view normalized_body) { return util::hex64(util::fnv1a64(normalized_body)); }

Extraction extract_template_with_slots(std::string_view sql, Dialect dialect) {
  SqlAst ast = parse_sql(sql, dialect);
  std::vector<Piece> pieces = ast.pieces();
  const auto declared = declared_aliases(pieces);

  std::unordered_map<std::string, std::size_t> alias_index;
  Extraction ex;
  auto alias_for = [&](const std::string& raw) {
    auto key = ident_key(raw);
    auto [it, inserted] = alias_index.emplace(key, alias_index.size());
    if (inserted) ex.slots.aliases.push_back(raw);
    return alias_name(it->second);
  };
  auto placeholder = [&](Piece& p, std::string_view word) {
    ex.slots.placeholders.push_back(p.text);
    p.text = std::string(word);
  };

  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Piece& p = pieces[i];
    if (p.kind == PieceKind::kLiteral) {
      placeholder(p, kLiteralPlaceholder);
      continue;
    }
    if (p.kind != PieceKind::kIdentifier) continue;
    bool is_alias = declared.count(ident_key(p.text)) > 0;
    switch (p.role) {
      case IdentRole::kAliasDecl:
      case IdentRole::kAliasRef:
        p.text = alias_for(p.text);
        break;
      case IdentRole::kTable:
        if (is_alias) {
          p.text = alias_for(p.text);
        } else {
          placeholder(p, kTablePlaceholder);
        }
        break;
      case IdentRole::kQualifier:
        if (is_alias) {
          p.text = alias_for(p.text);
        } else {
          placeholder(p, kTablePlaceholder);
        }
        break;
      case IdentRole::kColumn:
        if (is_alias && !after_dot(pieces, i)) {
          p.text = alias_for(p.text);
        } else {
          placeholder(p, kColumnPlaceholder);
        }
        break;
      case IdentRole::kNone:
        break;
    }
  }

  ex.tmpl.dialect = dialect;
  ex.tmpl.body = sql::join_pieces(pieces);
  ex.tmpl.id = template_id(ex.tmpl.body);
  ex.tmpl.keywords = extract_keywords(ast);
  return ex;
}

SqlTemplate extract_template(std::string_view sql, Dialect dialect) {
  return extract_template_with_slots(sql, dialect).tmpl;
}

std::string instantiate_dummies(std::string_view body, Dialect dialect) {
  std::size_t columns = 0;
  std::size_t tables = 0;
  return substitute(body, dialect, [&](const std::string& w) -> std::string {
    if (w == kColumnPlaceholder) return "c" + std::to_string(columns++);
    if (w == kTablePlaceholder) return "t" + std::to_string(tables++);
    if (w == kLiteralPlaceholder) return "'0'";
    return w;
  });
}

std::string instantiate(std::string_view body, Dialect dialect, const TemplateSlots& slots) {
  std::size_t next = 0;
  return substitute(body, dialect, [&](const std::string& w) -> std::string {
    if (w == kColumnPlaceholder || w == kTablePlaceholder || w == kLiteralPlaceholder) {
      if (next >= slots.placeholders.size()) {
        throw TemplateError(TemplateError::Kind::kPlaceholderViolation, "more placeholders than recorded slots");
      }
      return slots.placeholders[next++];
    }
    if (is_alias_word(w)) {
      std::size_t n = std::stoul(w.substr(1));
      if (n < slots.aliases.size()) return slots.aliases[n];
    }
    return w;
  });
}

SqlTemplate canonicalize_template(std::string_view body, Dialect dialect, TemplateOrigin origin) {
  auto violation = [](const std::string& msg) {
    return TemplateError(TemplateError::Kind::kPlaceholderViolation, msg);
  };

  // Count literal placeholders; concrete literals show up as extra literal
  // pieces once the dummy instance is parsed.
  std::size_t literal_slots = 0;
  for (const auto& tok : sql::tokenize(body, dialect)) {
    if (tok.kind == sql::TokenKind::kWord && tok.text == kLiteralPlaceholder) ++literal_slots;
    if (tok.kind == sql::TokenKind::kParam) throw violation("bind parameter " + tok.text + " in template");
  }

  const std::string instance = instantiate_dummies(body, dialect);
  SqlAst ast = parse_sql(instance, dialect);
  auto pieces = ast.pieces();
  const auto declared = declared_aliases(pieces);

  auto is_dummy = [](const std::string& raw, char prefix) {
    if (raw.size() < 2 || raw[0] != prefix) return false;
    return std::all_of(raw.begin() + 1, raw.end(), [](char c) { return c >= '0' && c <= '9'; });
  };

  std::size_t literal_pieces = 0;
  for (const auto& p : pieces) {
    if (p.kind == PieceKind::kLiteral) {
      ++literal_pieces;
      continue;
    }
    if (p.kind != PieceKind::kIdentifier) continue;
    bool alias = declared.count(ident_key(p.text)) > 0;
    switch (p.role) {
      case IdentRole::kTable:
        if (!is_dummy(p.text, 't') && !alias) throw violation("concrete table name '" + p.text + "'");
        break;
      case IdentRole::kQualifier:
        if (!is_dummy(p.text, 't') && !alias) throw violation("concrete qualifier '" + p.text + "'");
        break;
      case IdentRole::kColumn:
        if (!is_dummy(p.text, 'c') && !alias) throw violation("concrete column name '" + p.text + "'");
        break;
      default:
        break;
    }
  }
  if (literal_pieces != literal_slots) {
    throw violation("template contains " + std::to_string(literal_pieces - std::min(literal_pieces, literal_slots)) +
                    " concrete literal(s)");
  }

  SqlTemplate t = extract_template(instance, dialect);
  t.origin = std::move(origin);
  return t;
}

// ---- pool -------------------------------------------------------------------

const SqlTemplate* TemplatePool::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &templates_[it->second];
}

bool TemplatePool::insert(SqlTemplate t) {
  if (t.dialect != dialect_) {
    throw TemplateError(TemplateError::Kind::kDialectMismatch,
                        "template dialect " + std::string(to_string(t.dialect)) + " does not match pool dialect " +
                            std::string(to_string(dialect_)));
  }
  if (index_.count(t.id)) return false;
  index_.emplace(t.id, templates_.size());
  templates_.push_back(std::move(t));
  return true;
}

std::string TemplatePool::to_jsonl() const {
  std::string out;
  for (const auto& t : templates_) {
    json j = {{"id", t.id},
              {"dialect", std::string(to_string(t.dialect))},
              {"body", t.body},
              {"origin", origin_to_json(t.origin)},
              {"keywords", t.keywords}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

TemplatePool TemplatePool::from_jsonl(std::string_view text, std::size_t target_size) {
  std::vector<SqlTemplate> items;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      SqlTemplate t;
      t.id = j.at("id").get<std::string>();
      t.dialect = dialect_from_string(j.at("dialect").get<std::string>());
      t.body = j.at("body").get<std::string>();
      t.origin = origin_from_json(j.at("origin"));
      t.keywords = j.value("keywords", KeywordCounts{});
      items.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw TemplateError(TemplateError::Kind::kFormat,
                          "template pool line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (items.empty()) throw TemplateError(TemplateError::Kind::kEmptyPool, "template pool is empty");
  TemplatePool pool(items.front().dialect, target_size);
  for (auto& t : items) pool.insert(std::move(t));
  return pool;
}

void TemplatePool::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_jsonl();
}

TemplatePool TemplatePool::load(const std::filesystem::path& path, std::size_t target_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_jsonl(ss.str(), target_size);
}

TemplatePool build_seed_pool(const std::vector<CorpusEntry>& corpus, Dialect target, SeedPoolReport* report) {
  SeedPoolReport r;
  TemplatePool pool(target, 0);
  for (const auto& entry : corpus) {
    ++r.input;
    std::string sql;
    try {
      sql = transpile(entry.sql, entry.dialect, target);
    } catch (const TranspileError&) {
      ++r.transpile_failed;
      continue;
    } catch (const SqlError&) {
      ++r.parse_failed;
      continue;
    }
    try {
      if (!pool.insert(extract_template(sql, target))) ++r.duplicates;
    } catch (const SqlError&) {
      ++r.parse_failed;
    }
  }
  r.templates = pool.size();
  if (report) *report = r;
  if (pool.empty()) throw TemplateError(TemplateError::Kind::kEmptyPool, "no seed template survived extraction");
  pool.set_target_size(pool.size());
  return pool;
}

const SqlTemplate& sample_template(const TemplatePool& pool, std::mt19937_64& rng) {
  if (pool.empty()) throw TemplateError(TemplateError::Kind::kEmptyPool, "cannot sample from an empty pool");
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool.templates()[pick(rng)];
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path, Dialect dialect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read corpus " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  auto entry_from = [&](const json& j) {
    CorpusEntry e;
    e.dialect = dialect;
    if (j.contains("sql")) {
      e.sql = j.at("sql").get<std::string>();
    } else {
      e.sql = j.at("query").get<std::string>();
    }
    if (j.contains("dialect")) e.dialect = dialect_from_string(j.at("dialect").get<std::string>());
    return e;
  };

  std::vector<CorpusEntry> out;
  auto first = util::trim(text);
  if (!first.empty() && first.front() == '[') {
    for (const auto& j : json::parse(text)) out.push_back(entry_from(j));
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    auto t = util::trim(line);
    if (t.empty() || t.starts_with("--")) continue;
    if (t.front() == '{') {
      try {
        out.push_back(entry_from(json::parse(t)));
      } catch (const std::exception& e) {
        throw std::runtime_error("corpus line " + std::to_string(line_no) + ": " + e.what());
      }
    } else {
      out.push_back({std::string(t), dialect});
    }
  }
  return out;
}

}  // namespace sqlgen
