#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sqlgen/dialect/dialect.hpp"

namespace sqlgen {

struct TutorialDoc {
  std::string id;
  Dialect dialect = Dialect::kSqlite;
  std::string subject;  // keyword or function the section documents
  std::string title;
  std::string body;  // plain text, at most max_chars bytes
  std::string source_url;

  friend bool operator==(const TutorialDoc&, const TutorialDoc&) = default;
};

struct IngestError {
  std::filesystem::path file;
  std::string message;
};

struct IngestResult {
  std::vector<TutorialDoc> docs;
  std::vector<IngestError> errors;  // non-fatal, one per skipped file or section
};

inline constexpr std::size_t kDefaultTutorialChars = 8000;

/// Walks `root` (sorted, recursive) for .html/.htm/.md/.txt files. HTML is
/// stripped to text and split into one document per heading section; pages
/// without headings become one document whose subject comes from the file
/// name. Bodies longer than max_chars are cut at the last sentence boundary.
IngestResult ingest_tutorials(const std::filesystem::path& root, Dialect dialect,
                              std::size_t max_chars = kDefaultTutorialChars,
                              const KeywordCatalog& catalog = KeywordCatalog::builtin());

/// Converts an HTML fragment to plain text (tags dropped, block elements
/// become line breaks, entities decoded, whitespace collapsed).
std::string html_to_text(std::string_view html);

/// Cuts `text` to at most max_chars bytes, ending at a sentence boundary
/// ('.', '!' or '?' followed by whitespace) when one exists.
std::string truncate_at_sentence(std::string_view text, std::size_t max_chars);

class TutorialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform draw among the documents of `dialect`. Throws TutorialError when
/// there are none.
const TutorialDoc& sample_tutorial(const std::vector<TutorialDoc>& docs, Dialect dialect, std::mt19937_64& rng);

/// Corpus cache: JSON Lines {id, dialect, subject, title, body, source_url}.
std::string tutorials_to_jsonl(const std::vector<TutorialDoc>& docs);
std::vector<TutorialDoc> tutorials_from_jsonl(std::string_view text);

/// Loads a tutorial source: a .jsonl cache file, or a directory to ingest.
std::vector<TutorialDoc> load_tutorials(const std::filesystem::path& path, Dialect dialect,
                                        std::size_t max_chars = kDefaultTutorialChars);

}  // namespace sqlgen
