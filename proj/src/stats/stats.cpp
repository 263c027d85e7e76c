#include "sqlgen/stats/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "sqlgen/dialect/parser.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using nlohmann::json;

json DatasetStats::to_json() const {
  json funnel_j = json::array();
  for (const auto& s : funnel) {
    funnel_j.push_back({{"stage", s.name}, {"attempted", s.attempted}, {"failed", s.failed}});
  }
  return {{"total_pairs", total_pairs},
          {"excluded_non_select", excluded_non_select},
          {"unparsable", unparsable},
          {"unique_keywords", unique_keywords},
          {"keyword_counts", keyword_counts},
          {"dialect_specific_pairs", dialect_specific_pairs},
          {"dialect_specific_keywords", dialect_specific_keywords},
          {"complexity_histogram", complexity_histogram},
          {"funnel", funnel_j},
          {"flags", flags}};
}

DatasetStats DatasetStats::from_json(const json& j) {
  DatasetStats s;
  s.total_pairs = j.at("total_pairs").get<std::size_t>();
  s.excluded_non_select = j.at("excluded_non_select").get<std::size_t>();
  s.unparsable = j.at("unparsable").get<std::size_t>();
  s.unique_keywords = j.at("unique_keywords").get<std::size_t>();
  s.keyword_counts = j.at("keyword_counts").get<std::map<std::string, std::size_t>>();
  s.dialect_specific_pairs = j.at("dialect_specific_pairs").get<std::size_t>();
  s.dialect_specific_keywords = j.at("dialect_specific_keywords").get<std::map<std::string, std::size_t>>();
  s.complexity_histogram = j.at("complexity_histogram").get<std::map<std::string, std::size_t>>();
  for (const auto& f : j.at("funnel")) {
    s.funnel.push_back(
        {f.at("stage").get<std::string>(), f.at("attempted").get<std::size_t>(), f.at("failed").get<std::size_t>()});
  }
  s.flags = j.at("flags").get<std::vector<std::string>>();
  return s;
}

DatasetStats compute_stats(const std::vector<CandidatePair>& pairs, const KeywordCatalog& catalog,
                           std::vector<FunnelStage> funnel, std::vector<std::string> flags) {
  DatasetStats st;
  st.funnel = std::move(funnel);
  st.flags = std::move(flags);
  for (Complexity c : {Complexity::kSimple, Complexity::kModerate, Complexity::kChallenging}) {
    st.complexity_histogram[std::string(to_string(c))] = 0;
  }
  for (const auto& p : pairs) {
    std::optional<SqlAst> ast;
    try {
      // The dataset's own dialect decides validity; catalog checks are not
      // repeated here so that keyword statistics see every SELECT.
      ast.emplace(parse_sql(p.sql, p.dialect, KeywordCatalog()));
    } catch (const SqlError& e) {
      if (e.kind() == SqlErrorKind::kNonSelect) {
        ++st.excluded_non_select;
      } else {
        ++st.unparsable;
      }
      continue;
    }
    ++st.total_pairs;
    ++st.complexity_histogram[std::string(to_string(classify_complexity(*ast)))];
    std::set<std::string> specific;
    for (const auto& [kw, n] : extract_keywords(*ast)) {
      bool known = catalog.contains(kw) || is_grammar_keyword(kw) || is_known_function(kw);
      st.keyword_counts[known ? kw : kOtherFunction] += static_cast<std::size_t>(n);
      if (catalog.is_dialect_specific(kw, p.dialect)) specific.insert(kw);
    }
    if (!specific.empty()) ++st.dialect_specific_pairs;
    for (const auto& kw : specific) ++st.dialect_specific_keywords[kw];
  }
  st.unique_keywords = st.keyword_counts.size() - (st.keyword_counts.count(kOtherFunction) ? 1 : 0);
  return st;
}

namespace {

std::string line(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace

std::string emit_report(const DatasetStats& st, ReportFormat format) {
  if (format == ReportFormat::kJson) return st.to_json().dump(2) + "\n";
  std::string out;
  out += line("pairs: %zu (excluded non-SELECT: %zu, unparsable: %zu)\n", st.total_pairs, st.excluded_non_select,
              st.unparsable);
  out += line("unique keywords: %zu\n", st.unique_keywords);
  out += line("dialect-specific pairs: %zu\n", st.dialect_specific_pairs);
  for (const auto& [kw, n] : st.dialect_specific_keywords) out += line("  %-24s %6zu\n", kw.c_str(), n);
  out += "complexity:\n";
  for (const char* c : {"SIMPLE", "MODERATE", "CHALLENGING"}) {
    auto it = st.complexity_histogram.find(c);
    out += line("  %-24s %6zu\n", c, it == st.complexity_histogram.end() ? std::size_t{0} : it->second);
  }
  out += "funnel:\n";
  if (st.funnel.empty()) {
    out += "  (not recorded)\n";
  } else {
    out += line("  %-12s %10s %10s %10s\n", "stage", "attempted", "failed", "passed");
    for (const auto& s : st.funnel) {
      out += line("  %-12s %10zu %10zu %10zu\n", s.name.c_str(), s.attempted, s.failed, s.attempted - s.failed);
    }
  }
  std::vector<std::pair<std::string, std::size_t>> top(st.keyword_counts.begin(), st.keyword_counts.end());
  std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (top.size() > 20) top.resize(20);
  out += "top keywords:\n";
  for (const auto& [kw, n] : top) out += line("  %-24s %6zu\n", kw.c_str(), n);
  out += "flags: " + (st.flags.empty() ? std::string("none") : util::join(st.flags, ", ")) + "\n";
  return out;
}

}  // namespace sqlgen
