#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sqlgen/db/database.hpp"
#include "sqlgen/generation/candidate.hpp"
#include "sqlgen/llm/client.hpp"

namespace sqlgen {

struct QualityVerdict {
  std::string reasoning;
  bool fixing_needed = false;
  std::optional<std::string> fixed_question;
  std::optional<std::string> fixed_sql_query;
};

/// Parses the judge's reply. fixing_needed accepts YES/NO (any case) or a
/// boolean; empty fixed_* strings count as absent. A verdict that needs
/// fixing but carries no fixed field is rejected. Throws JsonError.
QualityVerdict parse_quality_verdict(std::string_view reply);

/// Plain-text rendering of a result shown to the judge: a header line of
/// column names, then at most k rows, values separated by " | ". An empty
/// result adds "(0 rows)"; more rows than shown (or a truncated result)
/// adds "(truncated)".
std::string render_result_prompt(const ResultSet& rs, std::size_t k);

std::string quality_prompt(const CandidatePair& pair, const DatabaseProfile& profile, const ResultSet& rs,
                           std::size_t k);

enum class QualityOutcome { kPass, kFixed, kDiscard };
std::string_view to_string(QualityOutcome o);

struct QualityResult {
  QualityOutcome outcome = QualityOutcome::kPass;
  std::string reason;  // for kDiscard: LlmError, JsonError or RefilterFail:<filter>
  std::optional<QualityVerdict> verdict;
};

/// Quality log line: {pair_id, verdict, outcome}.
std::string quality_log_json(const std::string& pair_id, const QualityResult& result);

/// Asks the JUDGE about a pair that passed the earlier filters. A fixed pair
/// is re-checked (parse, execution, mismatch, aggregation) and the re-checks
/// are appended to the trail as recheck_<filter>. The pair is updated in place.
QualityResult quality_check(CandidatePair& pair, const ResultSet& rs, const DatabaseProfile& profile, Database& db,
                            LlmClient& llm, const FilterConfig& cfg);

}  // namespace sqlgen
