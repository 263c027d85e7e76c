#include "sqlgen/quality/quality.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"
#include "sqlgen/llm/json_extract.hpp"
#include "sqlgen/llm/prompts.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using nlohmann::json;

std::string_view to_string(QualityOutcome o) {
  switch (o) {
    case QualityOutcome::kPass:
      return "PASS";
    case QualityOutcome::kFixed:
      return "FIXED";
    case QualityOutcome::kDiscard:
      return "DISCARD";
  }
  return "";
}

namespace {

std::optional<std::string> optional_text(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) throw JsonError(JsonError::Kind::kMalformed, std::string(key) + " is not a string", key);
  std::string v(util::trim(j[key].get<std::string>()));
  if (v.empty()) return std::nullopt;
  return v;
}

}  // namespace

QualityVerdict parse_quality_verdict(std::string_view reply) {
  json j = parse_json_object(reply, {"reasoning", "fixing_needed"});
  QualityVerdict v;
  if (j["reasoning"].is_string()) v.reasoning = j["reasoning"].get<std::string>();
  const json& f = j["fixing_needed"];
  if (f.is_boolean()) {
    v.fixing_needed = f.get<bool>();
  } else if (f.is_string()) {
    std::string s = util::to_upper(util::trim(f.get<std::string>()));
    if (s == "YES" || s == "TRUE") {
      v.fixing_needed = true;
    } else if (s == "NO" || s == "FALSE") {
      v.fixing_needed = false;
    } else {
      throw JsonError(JsonError::Kind::kMalformed, "fixing_needed must be YES or NO", "fixing_needed");
    }
  } else {
    throw JsonError(JsonError::Kind::kMalformed, "fixing_needed must be YES or NO", "fixing_needed");
  }
  v.fixed_question = optional_text(j, "fixed_question");
  v.fixed_sql_query = optional_text(j, "fixed_sql_query");
  if (v.fixing_needed && !v.fixed_question && !v.fixed_sql_query) {
    throw JsonError(JsonError::Kind::kMissingKey, "fixing_needed is YES but no fixed field is given",
                    "fixed_sql_query");
  }
  if (!v.fixing_needed) {
    v.fixed_question.reset();
    v.fixed_sql_query.reset();
  }
  return v;
}

namespace {

std::string cell(const SqlValue& v) {
  if (v.type == SqlValue::Type::kText) {
    std::string s = v.text;
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
  }
  return sql_literal(v);
}

}  // namespace

std::string render_result_prompt(const ResultSet& rs, std::size_t k) {
  if (rs.parse_only) return "(not executed)";
  std::string out = util::join(rs.columns, " | ") + "\n";
  for (std::size_t i = 0; i < rs.rows.size() && i < k; ++i) {
    std::vector<std::string> cells;
    for (const auto& v : rs.rows[i]) cells.push_back(cell(v));
    out += util::join(cells, " | ") + "\n";
  }
  if (rs.rows.empty()) out += "(0 rows)\n";
  if (rs.rows.size() > k || rs.truncated) out += "(truncated)\n";
  return out;
}

std::string quality_prompt(const CandidatePair& pair, const DatabaseProfile& profile, const ResultSet& rs,
                           std::size_t k) {
  return render_prompt(builtin_prompt(PromptName::kQuality),
                       {{"DIALECT", std::string(display_name(pair.dialect))},
                        {"DATABASE_SCHEMA", render_schema_prompt(profile)},
                        {"QUESTION", pair.question},
                        {"SQL_QUERY", pair.sql},
                        {"SQL_QUERY_RESULT", render_result_prompt(rs, k)}});
}

std::string quality_log_json(const std::string& pair_id, const QualityResult& result) {
  json verdict = nullptr;
  if (result.verdict) {
    const auto& v = *result.verdict;
    verdict = {{"reasoning", v.reasoning}, {"fixing_needed", v.fixing_needed}};
    verdict["fixed_question"] = v.fixed_question ? json(*v.fixed_question) : json(nullptr);
    verdict["fixed_sql_query"] = v.fixed_sql_query ? json(*v.fixed_sql_query) : json(nullptr);
  }
  json outcome{{"status", std::string(to_string(result.outcome))}};
  if (!result.reason.empty()) outcome["reason"] = result.reason;
  return json{{"pair_id", pair_id}, {"verdict", verdict}, {"outcome", outcome}}.dump();
}

QualityResult quality_check(CandidatePair& pair, const ResultSet& rs, const DatabaseProfile& profile, Database& db,
                            LlmClient& llm, const FilterConfig& cfg) {
  std::optional<QualityVerdict> verdict;
  auto discard = [&](std::string reason, std::string detail) {
    pair.filter_trail.push_back({"quality", StepStatus::kFail, reason + ": " + detail});
    return QualityResult{QualityOutcome::kDiscard, std::move(reason), verdict};
  };
  std::string reply;
  try {
    reply = llm.complete(quality_prompt(pair, profile, rs, cfg.k_rows), RoleKind::kJudge);
  } catch (const LlmError& e) {
    return discard("LlmError", e.what());
  }
  try {
    verdict = parse_quality_verdict(reply);
  } catch (const JsonError& e) {
    return discard("JsonError", e.what());
  }
  const QualityVerdict& v = *verdict;
  if (!v.fixing_needed) {
    pair.filter_trail.push_back({"quality", StepStatus::kPass, util::collapse_whitespace(v.reasoning)});
    return {QualityOutcome::kPass, "", verdict};
  }

  std::vector<std::string> what;
  if (v.fixed_question) what.push_back("question");
  if (v.fixed_sql_query) what.push_back("sql");
  pair.filter_trail.push_back({"quality", StepStatus::kFixed,
                               util::join(what, "+") + " fixed: " + util::collapse_whitespace(v.reasoning)});
  if (v.fixed_question) pair.question = util::collapse_whitespace(*v.fixed_question);
  if (v.fixed_sql_query) {
    std::string s = *v.fixed_sql_query;
    while (!s.empty() && (s.back() == ';' || std::isspace(static_cast<unsigned char>(s.back())))) s.pop_back();
    pair.sql = s;
  }

  // Re-run the filters on the fixed pair.
  auto recheck_fail = [&](const std::string& filter, const std::string& detail) {
    pair.filter_trail.push_back({"recheck_" + filter, StepStatus::kFail, detail});
    return QualityResult{QualityOutcome::kDiscard, "RefilterFail:" + filter, verdict};
  };
  try {
    check_generated_sql(pair.sql, pair.dialect, &profile);
  } catch (const GenError& e) {
    return recheck_fail("parse", e.what());
  }
  pair.filter_trail.push_back({"recheck_parse", StepStatus::kPass, ""});

  CandidatePair probe = pair;
  probe.filter_trail.clear();
  bool ok = filter_execution(probe, db, cfg).has_value() && filter_mismatch(probe, llm.embedder(), cfg) &&
            filter_aggregation(probe);
  for (auto& step : probe.filter_trail) {
    step.filter = "recheck_" + step.filter;
    pair.filter_trail.push_back(step);
  }
  pair.exec_digest = probe.exec_digest;
  if (!ok) {
    const auto& last = pair.filter_trail.back().filter;
    return {QualityOutcome::kDiscard, "RefilterFail:" + last.substr(8), verdict};
  }
  pair.complexity = classify_complexity(parse_sql(pair.sql, pair.dialect));
  pair.id = pair_id(pair.db_id, pair.template_id, pair.question, pair.sql);
  return {QualityOutcome::kFixed, "", verdict};
}

}  // namespace sqlgen
