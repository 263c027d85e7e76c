#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sqlgen {

class JsonError : public std::runtime_error {
 public:
  enum class Kind { kNoObject, kMissingKey, kMalformed };
  JsonError(Kind kind, const std::string& message, std::string key = {})
      : std::runtime_error(message), kind_(kind), key_(std::move(key)) {}
  Kind kind() const { return kind_; }
  const std::string& key() const { return key_; }

 private:
  Kind kind_;
  std::string key_;
};

std::string_view to_string(JsonError::Kind k);

/// Extracts the first balanced top-level JSON object from a model reply,
/// tolerating code fences, surrounding prose, trailing commas and raw line
/// breaks inside strings, then checks that every required key is present.
/// Never throws anything but JsonError.
nlohmann::json parse_json_object(std::string_view text, const std::vector<std::string>& required_keys = {});

}  // namespace sqlgen
