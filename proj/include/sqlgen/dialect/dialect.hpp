#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sqlgen {

enum class Dialect { kSqlite = 0, kPostgres = 1, kBigQuery = 2 };

inline constexpr std::array<Dialect, 3> kAllDialects = {Dialect::kSqlite, Dialect::kPostgres,
                                                        Dialect::kBigQuery};

/// Lowercase machine name: "sqlite", "postgresql", "bigquery".
std::string_view to_string(Dialect d);

/// Human name used inside prompts: "SQLite", "PostgreSQL", "BigQuery".
std::string_view display_name(Dialect d);

/// Accepts the machine names plus a few common spellings ("postgres", "pg", "bq").
/// Throws std::invalid_argument on anything else.
Dialect dialect_from_string(std::string_view name);

struct KeywordSupport {
  std::string keyword;  // uppercase, may contain a space ("WITH OFFSET") or a dot ("ML.TRANSLATE")
  std::array<bool, 3> supported{};

  bool supports(Dialect d) const { return supported[static_cast<std::size_t>(d)]; }
};

// Per-dialect support table for keywords and functions that are not portable
// across the three target dialects. Immutable once constructed.
class KeywordCatalog {
 public:
  KeywordCatalog() = default;
  explicit KeywordCatalog(std::vector<KeywordSupport> entries);

  /// The shipped catalog. Its first rows reproduce the published reference
  /// table of non-portable keywords; further rows extend it.
  static const KeywordCatalog& builtin();

  /// CSV with header `keyword,sqlite,postgresql,bigquery` and 0/1 flags.
  static KeywordCatalog from_csv(std::istream& in);
  static KeywordCatalog load(const std::filesystem::path& path);
  std::string to_csv() const;

  const KeywordSupport* find(std::string_view keyword) const;
  bool contains(std::string_view keyword) const { return find(keyword) != nullptr; }

  /// True iff the keyword is supported by `d` and by no other dialect.
  bool is_dialect_specific(std::string_view keyword, Dialect d) const;

  /// True when the keyword is in the catalog and not supported by `d`.
  bool is_unsupported(std::string_view keyword, Dialect d) const;

  std::span<const KeywordSupport> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<KeywordSupport> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The embedded default catalog as CSV text.
std::string_view builtin_catalog_csv();

}  // namespace sqlgen
