#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sqlgen/dialect/dialect.hpp"
#include "sqlgen/dialect/parser.hpp"

namespace sqlgen {

/// Placeholder words used in template bodies.
inline constexpr std::string_view kColumnPlaceholder = "column";
inline constexpr std::string_view kTablePlaceholder = "table";
inline constexpr std::string_view kLiteralPlaceholder = "literal";

struct TemplateOrigin {
  enum class Kind { kSeed, kExpanded };
  Kind kind = Kind::kSeed;
  std::string tutorial_id;  // expanded only
  std::string parent_id;    // expanded only

  static TemplateOrigin seed() { return {}; }
  static TemplateOrigin expanded(std::string tutorial_id, std::string parent_id) {
    return {Kind::kExpanded, std::move(tutorial_id), std::move(parent_id)};
  }
  friend bool operator==(const TemplateOrigin&, const TemplateOrigin&) = default;
};

struct SqlTemplate {
  std::string id;  // hash of the normalized body
  Dialect dialect = Dialect::kSqlite;
  std::string body;
  TemplateOrigin origin;
  KeywordCounts keywords;

  friend bool operator==(const SqlTemplate&, const SqlTemplate&) = default;
};

class TemplateError : public std::runtime_error {
 public:
  enum class Kind { kEmptyPool, kPlaceholderViolation, kDialectMismatch, kFormat };
  TemplateError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// What an abstraction replaced, in order, so the source can be rebuilt.
struct TemplateSlots {
  std::vector<std::string> placeholders;  // raw text for each column/table/literal occurrence
  std::vector<std::string> aliases;       // raw text of alias aN, indexed by N
};

struct Extraction {
  SqlTemplate tmpl;
  TemplateSlots slots;
};

/// Abstracts every schema mention of a SELECT: tables -> `table`, columns ->
/// `column`, literals -> `literal`, declared aliases (table, column, CTE and
/// window names) -> a0, a1, ... in order of first appearance. Qualifiers that
/// name a table become `table`. Throws SqlError (syntax, unsupported keyword
/// or non-SELECT).
SqlTemplate extract_template(std::string_view sql, Dialect dialect);
Extraction extract_template_with_slots(std::string_view sql, Dialect dialect);

/// Fills placeholders with canonical dummies: column -> c0, c1, ...,
/// table -> t0, t1, ..., literal -> '0'. Alias names are kept.
std::string instantiate_dummies(std::string_view body, Dialect dialect);

/// Fills placeholders and aliases from recorded slots.
std::string instantiate(std::string_view body, Dialect dialect, const TemplateSlots& slots);

/// Checks that a (possibly model-written) body contains no concrete literals,
/// that every table/column/qualifier mention is a placeholder or a declared
/// alias, and that the dummy instantiation parses under `dialect`. Returns the
/// canonical template (re-abstracted, aliases renumbered, keywords uppercased).
/// Throws TemplateError{kPlaceholderViolation} or SqlError.
SqlTemplate canonicalize_template(std::string_view body, Dialect dialect, TemplateOrigin origin = {});

/// Template id: 16 hex digits of a stable hash of the normalized body.
std::string template_id(std::string_view normalized_body);

class TemplatePool {
 public:
  TemplatePool() = default;
  TemplatePool(Dialect dialect, std::size_t target_size) : dialect_(dialect), target_size_(target_size) {}

  Dialect dialect() const { return dialect_; }
  std::size_t target_size() const { return target_size_; }
  void set_target_size(std::size_t theta) { target_size_ = theta; }

  std::size_t size() const { return templates_.size(); }
  bool empty() const { return templates_.empty(); }
  const std::vector<SqlTemplate>& templates() const { return templates_; }
  const SqlTemplate* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  /// Adds the template unless its id is already present. Throws on dialect mismatch.
  bool insert(SqlTemplate t);

  /// JSON Lines, one {id, dialect, body, origin, keywords} object per line.
  std::string to_jsonl() const;
  static TemplatePool from_jsonl(std::string_view text, std::size_t target_size = 0);
  void save(const std::filesystem::path& path) const;
  static TemplatePool load(const std::filesystem::path& path, std::size_t target_size = 0);

 private:
  Dialect dialect_ = Dialect::kSqlite;
  std::size_t target_size_ = 0;
  std::vector<SqlTemplate> templates_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct CorpusEntry {
  std::string sql;
  Dialect dialect = Dialect::kSqlite;
};

struct SeedPoolReport {
  std::size_t input = 0;
  std::size_t parse_failed = 0;
  std::size_t transpile_failed = 0;
  std::size_t duplicates = 0;
  std::size_t templates = 0;
};

/// Transpiles each corpus query to `target` (skipping failures), abstracts it
/// and deduplicates by normalized body. Throws TemplateError{kEmptyPool} when
/// nothing survives.
TemplatePool build_seed_pool(const std::vector<CorpusEntry>& corpus, Dialect target,
                             SeedPoolReport* report = nullptr);

/// Uniform draw. Throws TemplateError{kEmptyPool}.
const SqlTemplate& sample_template(const TemplatePool& pool, std::mt19937_64& rng);

/// Reads a seed corpus: one SQL query per line, or JSON Lines objects with a
/// "sql"/"query" field (Spider-style JSON arrays are accepted as well).
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path, Dialect dialect = Dialect::kSqlite);

}  // namespace sqlgen
