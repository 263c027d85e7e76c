#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sqlgen {

// Prompt bodies use `{SLOT}` placeholders; `{{` and `}}` stand for literal braces.
struct PromptTemplate {
  std::string name;
  std::string body;

  /// Slot names in order of first appearance.
  std::vector<std::string> slots() const;
};

enum class PromptName { kTempGen, kGen, kQuality };

/// The three shipped prompts: template expansion, sample generation and quality check.
const PromptTemplate& builtin_prompt(PromptName name);

class MissingSlot : public std::runtime_error {
 public:
  explicit MissingSlot(std::string slot)
      : std::runtime_error("prompt slot {" + slot + "} is not bound"), slot_(std::move(slot)) {}
  const std::string& slot() const { return slot_; }

 private:
  std::string slot_;
};

using PromptBindings = std::map<std::string, std::string>;

/// Pure substitution: binding values are inserted verbatim and never rescanned.
/// Throws MissingSlot when a slot of the template has no binding.
std::string render_prompt(const PromptTemplate& tpl, const PromptBindings& bindings);

}  // namespace sqlgen
