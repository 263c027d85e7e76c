#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sqlgen/db/database.hpp"
#include "sqlgen/dialect/parser.hpp"
#include "sqlgen/llm/client.hpp"
#include "sqlgen/templates/template.hpp"

namespace sqlgen {

struct FilterConfig {
  int beta1 = 2;              // max allowed minimum edit distance per condition literal
  double beta2 = 0.6;         // min required max similarity per condition literal
  int alpha1 = 60;            // max question length in words
  std::size_t k_rows = 5;     // result rows kept in the digest and shown to the judge
  int timeout_ms = kDefaultTimeoutMs;
  std::size_t row_limit = kDefaultRowLimit;

  /// Throws std::invalid_argument when a value is out of range.
  void validate() const;
};

enum class StepStatus { kPass, kFail, kFixed };
std::string_view to_string(StepStatus s);

struct FilterStep {
  std::string filter;
  StepStatus status = StepStatus::kPass;
  std::string detail;
  friend bool operator==(const FilterStep&, const FilterStep&) = default;
};

struct ExecDigest {
  std::size_t row_count = 0;
  std::vector<std::string> columns;
  std::string first_k_hash;
  bool truncated = false;
  std::string to_string() const;
};

struct CandidatePair {
  std::string id;
  Dialect dialect = Dialect::kSqlite;
  std::string db_id;
  std::string template_id;
  std::string question;
  std::string sql;
  Complexity complexity = Complexity::kSimple;
  std::optional<ExecDigest> exec_digest;
  std::vector<FilterStep> filter_trail;

  /// {id, dialect, db_id, question, sql, template_id, complexity, filter_trail}
  std::string to_json() const;
  static CandidatePair from_json(std::string_view line);
  bool passed(std::string_view filter) const;
};

/// Stable pair id derived from its content.
std::string pair_id(std::string_view db_id, std::string_view template_id, std::string_view question,
                    std::string_view sql);

class GenError : public std::runtime_error {
 public:
  enum class Kind { kLlmError, kJsonError, kParseError };
  GenError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};
std::string_view to_string(GenError::Kind k);

/// The sample-generation prompt for a template and a profile (with sample rows).
std::string generation_prompt(const SqlTemplate& tmpl, const DatabaseProfile& profile);

/// Asks the GENERATOR for a question/SQL pair. The SQL must parse under the
/// dialect and must not contain unfilled placeholders. The returned pair has
/// an empty trail. Throws GenError; std::invalid_argument on a dialect mismatch.
CandidatePair generate_candidate(const SqlTemplate& tmpl, const DatabaseProfile& profile, LlmClient& llm);

/// Checks that `sql` parses under `dialect` and has no unfilled placeholders
/// (identifiers named column/table/literal that the profile does not define).
/// Throws GenError{kParseError}.
void check_generated_sql(const std::string& sql, Dialect dialect, const DatabaseProfile* profile);

/// Digest of a result set: row count, column names and a hash of the first K rows.
ExecDigest make_digest(const ResultSet& rs, std::size_t k);

/// Runs the pair's SQL. On success sets exec_digest, appends execution:PASS
/// and returns the result set; on ExecError appends execution:FAIL(kind).
std::optional<ResultSet> filter_execution(CandidatePair& pair, Database& db, const FilterConfig& cfg);

// ---- mismatch filter ----------------------------------------------------------------

struct ValueCondition {
  std::string text;      // decoded literal value ('it''s' -> it's)
  bool numeric = false;  // number literal (compared by exact token match)
  friend bool operator==(const ValueCondition&, const ValueCondition&) = default;
};

/// Literals that are operands of comparisons, LIKE-style predicates, IN
/// lists, BETWEEN and IS DISTINCT FROM, in source order. LIMIT/OFFSET counts,
/// arithmetic constants and plain function arguments are not conditions.
std::vector<ValueCondition> extract_value_conditions(const SqlAst& ast);
std::vector<std::string> extract_value_conditions(std::string_view sql, Dialect dialect);

/// Unit-cost edit distance over Unicode code points (insert, delete, substitute).
std::size_t levenshtein(std::string_view a, std::string_view b);
/// Exponential-time reference recursion (for tests).
std::size_t levenshtein_naive(std::string_view a, std::string_view b);

/// Question words: whitespace-separated tokens with surrounding punctuation removed.
std::vector<std::string> question_words(std::string_view question);

struct ConditionScore {
  ValueCondition condition;
  std::size_t distance = 0;     // SIZE_MAX when no n-gram matches a numeric literal
  double similarity = 0;
  std::string best_gram;        // n-gram with the smallest distance
  bool passed = false;
};

struct MismatchReport {
  bool passed = true;
  std::vector<ConditionScore> scores;
  std::string detail() const;
};

/// For each condition literal l: d(l) = min over question word n-grams (n =
/// word count of l) of the case-insensitive edit distance, s(l) = max cosine
/// similarity of the embeddings over the same n-grams. Fails iff any literal
/// has d > beta1 or s < beta2. Numeric literals match exactly or not at all.
MismatchReport mismatch_check(std::string_view question, const std::vector<ValueCondition>& conditions,
                              Embedder& embedder, int beta1, double beta2);

/// Appends mismatch:PASS/FAIL to the trail; returns whether the pair passed.
bool filter_mismatch(CandidatePair& pair, Embedder& embedder, const FilterConfig& cfg);

// ---- aggregation filter ----------------------------------------------------------------

/// True when an aggregate call (AVG, SUM, MIN, MAX, COUNT, TOTAL) takes a
/// column whose name already contains an aggregation word as a whole word.
bool has_redundant_aggregation(const SqlAst& ast);
bool filter_aggregation(CandidatePair& pair);

// ---- batch finalization ----------------------------------------------------------------

/// Dedup key: comments dropped, whitespace collapsed, keywords uppercased,
/// identifiers and literals kept verbatim.
std::string normalize_sql(std::string_view sql, Dialect dialect);

std::size_t question_length(std::string_view question);

/// Drops pairs whose question has more than alpha1 words, then pairs whose
/// normalized SQL already appeared (first occurrence kept, order stable).
std::vector<CandidatePair> finalize_batch(const std::vector<CandidatePair>& pairs, int alpha1);

}  // namespace sqlgen
