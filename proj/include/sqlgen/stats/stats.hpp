#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlgen/dialect/dialect.hpp"
#include "sqlgen/generation/candidate.hpp"
#include "sqlgen/generation/dataset.hpp"

namespace sqlgen {

inline constexpr const char* kOtherFunction = "OTHER_FUNCTION";

struct DatasetStats {
  std::size_t total_pairs = 0;           // SELECT pairs analyzed
  std::size_t excluded_non_select = 0;   // entries that are not SELECT statements
  std::size_t unparsable = 0;            // entries that do not parse under their dialect
  std::map<std::string, std::size_t> keyword_counts;  // occurrences over all analyzed pairs
  std::size_t unique_keywords = 0;
  std::size_t dialect_specific_pairs = 0;
  std::map<std::string, std::size_t> dialect_specific_keywords;  // keyword -> pairs using it
  std::map<std::string, std::size_t> complexity_histogram;       // SIMPLE/MODERATE/CHALLENGING
  std::vector<FunnelStage> funnel;       // from the run manifest, when known
  std::vector<std::string> flags;        // e.g. fallback-embedder, parse-only:bigquery

  nlohmann::json to_json() const;
  static DatasetStats from_json(const nlohmann::json& j);
  friend bool operator==(const DatasetStats& a, const DatasetStats& b) { return a.to_json() == b.to_json(); }
};

/// Keyword and complexity statistics of a dataset. Keywords outside the
/// grammar keyword list and the catalog are counted as OTHER_FUNCTION. A pair
/// is dialect-specific iff it uses a catalog keyword supported only by its
/// own dialect. Pure function of its inputs.
DatasetStats compute_stats(const std::vector<CandidatePair>& pairs, const KeywordCatalog& catalog,
                           std::vector<FunnelStage> funnel = {}, std::vector<std::string> flags = {});

enum class ReportFormat { kJson, kText };

/// JSON: to_json() pretty-printed. Text: summary lines, the funnel table and
/// the 20 most frequent keywords.
std::string emit_report(const DatasetStats& stats, ReportFormat format);

}  // namespace sqlgen
