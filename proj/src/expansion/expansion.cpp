#include "sqlgen/expansion/expansion.hpp"

#include "json.hpp"
#include "sqlgen/llm/json_extract.hpp"
#include "sqlgen/llm/prompts.hpp"
#include "sqlgen/util/parallel.hpp"

namespace sqlgen {

using nlohmann::json;

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kNone:
      return "";
    case RejectReason::kLlmError:
      return "LlmError";
    case RejectReason::kJsonError:
      return "JsonError";
    case RejectReason::kParseError:
      return "ParseError";
    case RejectReason::kPlaceholderViolation:
      return "PlaceholderViolation";
    case RejectReason::kDuplicate:
      return "Duplicate";
  }
  return "";
}

std::string ExpansionRecord::to_json() const {
  json j{{"attempt", attempt},
         {"parent_template_id", parent_template_id},
         {"tutorial_id", tutorial_id},
         {"raw_llm_text", raw_llm_text}};
  if (accepted) {
    j["outcome"] = {{"status", "ACCEPTED"}, {"template_id", new_template_id}};
  } else {
    j["outcome"] = {{"status", "REJECTED"}, {"reason", std::string(to_string(reason))}, {"detail", detail}};
  }
  return j.dump();
}

std::string expansion_prompt(const SqlTemplate& parent, const TutorialDoc& tutorial) {
  return render_prompt(builtin_prompt(PromptName::kTempGen), {{"DIALECT", std::string(display_name(parent.dialect))},
                                                              {"TUTORIAL", tutorial.body},
                                                              {"QUERY_TEMPLATE", parent.body}});
}

ExpansionRecord propose_expansion(const SqlTemplate& parent, const TutorialDoc& tutorial, LlmClient& llm,
                                  SqlTemplate* out) {
  ExpansionRecord rec;
  rec.parent_template_id = parent.id;
  rec.tutorial_id = tutorial.id;
  auto reject = [&](RejectReason r, std::string detail) {
    rec.reason = r;
    rec.detail = std::move(detail);
    return rec;
  };
  try {
    rec.raw_llm_text = llm.complete(expansion_prompt(parent, tutorial), RoleKind::kGenerator);
  } catch (const LlmError& e) {
    return reject(RejectReason::kLlmError, e.what());
  }
  std::string body;
  try {
    json j = parse_json_object(rec.raw_llm_text, {"reasoning", "query_template"});
    if (!j["query_template"].is_string()) {
      return reject(RejectReason::kJsonError, "query_template is not a string");
    }
    body = j["query_template"].get<std::string>();
  } catch (const JsonError& e) {
    return reject(RejectReason::kJsonError, e.what());
  }
  try {
    *out = canonicalize_template(body, parent.dialect, TemplateOrigin::expanded(tutorial.id, parent.id));
  } catch (const TemplateError& e) {
    if (e.kind() == TemplateError::Kind::kPlaceholderViolation) {
      return reject(RejectReason::kPlaceholderViolation, e.what());
    }
    return reject(RejectReason::kParseError, e.what());
  } catch (const SqlError& e) {
    return reject(RejectReason::kParseError, e.what());
  }
  rec.accepted = true;
  rec.new_template_id = out->id;
  return rec;
}

namespace {

void apply(TemplatePool& pool, ExpansionRecord& rec, SqlTemplate&& t) {
  if (!rec.accepted) return;
  if (!pool.insert(std::move(t))) {
    rec.accepted = false;
    rec.reason = RejectReason::kDuplicate;
    rec.detail = "template " + rec.new_template_id + " is already in the pool";
    rec.new_template_id.clear();
  }
}

}  // namespace

ExpansionRecord expand_once(TemplatePool& pool, const std::vector<TutorialDoc>& tutorials, LlmClient& llm,
                            std::mt19937_64& rng) {
  const SqlTemplate& parent = sample_template(pool, rng);
  const TutorialDoc& tutorial = sample_tutorial(tutorials, pool.dialect(), rng);
  SqlTemplate parent_copy = parent;  // the pool may reallocate on insert
  SqlTemplate t;
  ExpansionRecord rec = propose_expansion(parent_copy, tutorial, llm, &t);
  apply(pool, rec, std::move(t));
  return rec;
}

ExpansionResult expand_pool(TemplatePool& pool, const std::vector<TutorialDoc>& tutorials, LlmClient& llm,
                            std::size_t theta, std::size_t max_attempts, std::size_t workers, std::mt19937_64& rng,
                            const std::function<void(const ExpansionRecord&)>& on_record) {
  ExpansionResult result;
  if (pool.size() >= theta) {
    result.reached_target = true;
    return result;
  }
  if (pool.empty()) throw TemplateError(TemplateError::Kind::kEmptyPool, "template pool is empty");
  std::size_t attempts = 0;
  while (pool.size() < theta && attempts < max_attempts) {
    // Each attempt adds at most one template, so a round never overshoots θ.
    std::size_t round = std::min({kExpansionBatch, theta - pool.size(), max_attempts - attempts});
    std::vector<SqlTemplate> parents;
    std::vector<const TutorialDoc*> docs;
    for (std::size_t i = 0; i < round; ++i) {
      parents.push_back(sample_template(pool, rng));
      docs.push_back(&sample_tutorial(tutorials, pool.dialect(), rng));
    }
    std::vector<ExpansionRecord> recs(round);
    std::vector<SqlTemplate> made(round);
    util::parallel_for(round, workers,
                       [&](std::size_t i) { recs[i] = propose_expansion(parents[i], *docs[i], llm, &made[i]); });
    for (std::size_t i = 0; i < round; ++i) {
      recs[i].attempt = attempts++;
      apply(pool, recs[i], std::move(made[i]));
      if (on_record) on_record(recs[i]);
      result.records.push_back(std::move(recs[i]));
    }
  }
  result.reached_target = pool.size() >= theta;
  return result;
}

}  // namespace sqlgen
