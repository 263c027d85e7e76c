#include "sqlgen/llm/json_extract.hpp"

#include <cctype>

namespace sqlgen {

using nlohmann::json;

namespace {

// End index (inclusive) of the balanced object starting at text[start] == '{',
// or npos when it never closes. Braces inside strings are ignored.
std::size_t balanced_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

// Common model slips: raw control characters inside strings and trailing
// commas before a closing bracket.
std::string repair(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
        out += c;
      } else if (c == '\\') {
        escaped = true;
        out += c;
      } else if (c == '"') {
        in_string = false;
        out += c;
      } else if (c == '\n') {
        out += "\\n";
      } else if (c == '\r') {
        out += "\\r";
      } else if (c == '\t') {
        out += "\\t";
      } else {
        out += c;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
      continue;
    }
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
    }
    out += c;
  }
  return out;
}

bool try_parse(std::string_view candidate, json* out) {
  json j = json::parse(candidate.begin(), candidate.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    std::string fixed = repair(candidate);
    j = json::parse(fixed, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return false;
  }
  *out = std::move(j);
  return true;
}

}  // namespace

std::string_view to_string(JsonError::Kind k) {
  switch (k) {
    case JsonError::Kind::kNoObject:
      return "NoObject";
    case JsonError::Kind::kMissingKey:
      return "MissingKey";
    case JsonError::Kind::kMalformed:
      return "Malformed";
  }
  return "Malformed";
}

json parse_json_object(std::string_view text, const std::vector<std::string>& required_keys) {
  json result;
  bool found = false;
  bool saw_candidate = false;
  std::size_t pos = text.find('{');
  try {
    while (pos != std::string_view::npos) {
      std::size_t end = balanced_end(text, pos);
      if (end == std::string_view::npos) {
        saw_candidate = true;
        break;
      }
      saw_candidate = true;
      if (try_parse(text.substr(pos, end - pos + 1), &result)) {
        found = true;
        break;
      }
      pos = text.find('{', end + 1);
    }
  } catch (const std::exception& e) {
    throw JsonError(JsonError::Kind::kMalformed, std::string("malformed JSON object: ") + e.what());
  }
  if (!found) {
    if (saw_candidate) throw JsonError(JsonError::Kind::kMalformed, "reply contains no well-formed JSON object");
    throw JsonError(JsonError::Kind::kNoObject, "reply contains no JSON object");
  }
  for (const auto& key : required_keys) {
    if (!result.contains(key)) throw JsonError(JsonError::Kind::kMissingKey, "missing key '" + key + "'", key);
  }
  return result;
}

}  // namespace sqlgen
