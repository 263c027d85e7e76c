#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sqlgen/llm/client.hpp"
#include "sqlgen/templates/template.hpp"
#include "sqlgen/tutorials/tutorial.hpp"

namespace sqlgen {

/// Why an expansion attempt did not add a template.
enum class RejectReason { kNone, kLlmError, kJsonError, kParseError, kPlaceholderViolation, kDuplicate };
std::string_view to_string(RejectReason r);

struct ExpansionRecord {
  std::size_t attempt = 0;
  std::string parent_template_id;
  std::string tutorial_id;
  std::string raw_llm_text;
  bool accepted = false;
  std::string new_template_id;  // accepted only
  RejectReason reason = RejectReason::kNone;
  std::string detail;

  std::string to_json() const;
};

/// One expansion draw: the template and tutorial to combine.
struct ExpansionDraw {
  const SqlTemplate* parent = nullptr;
  const TutorialDoc* tutorial = nullptr;
};

/// Renders the template-expansion prompt for a draw.
std::string expansion_prompt(const SqlTemplate& parent, const TutorialDoc& tutorial);

/// Asks the GENERATOR for a rewrite of `parent` and validates it (JSON keys,
/// placeholder closure, dialect parse). Does not touch any pool; `out` is set
/// on success. Never throws for model or validation failures.
ExpansionRecord propose_expansion(const SqlTemplate& parent, const TutorialDoc& tutorial, LlmClient& llm,
                                  SqlTemplate* out);

/// Samples a template and a tutorial, proposes a rewrite and inserts it
/// (deduplicated) with origin EXPANDED. Throws TemplateError{kEmptyPool} or
/// TutorialError when there is nothing to sample.
ExpansionRecord expand_once(TemplatePool& pool, const std::vector<TutorialDoc>& tutorials, LlmClient& llm,
                            std::mt19937_64& rng);

struct ExpansionResult {
  std::vector<ExpansionRecord> records;  // in attempt order
  bool reached_target = false;           // false = attempt budget exhausted below θ
};

/// Attempts drawn per round of expand_pool. Fixed so that results do not
/// depend on the worker count.
inline constexpr std::size_t kExpansionBatch = 8;

inline std::size_t default_max_attempts(std::size_t theta) { return 10 * theta; }

/// Grows `pool` until it holds `theta` templates or `max_attempts` attempts
/// were made. Attempts run in rounds of up to kExpansionBatch draws whose
/// model calls run on `workers` threads; draws are taken and results applied
/// in attempt order, so the outcome depends only on the rng seed and the
/// model replies, not on the number of workers. `on_record` (optional) sees each record after it was
/// applied.
ExpansionResult expand_pool(TemplatePool& pool, const std::vector<TutorialDoc>& tutorials, LlmClient& llm,
                            std::size_t theta, std::size_t max_attempts, std::size_t workers, std::mt19937_64& rng,
                            const std::function<void(const ExpansionRecord&)>& on_record = {});

}  // namespace sqlgen
