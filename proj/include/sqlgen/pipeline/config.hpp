#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "sqlgen/dialect/dialect.hpp"
#include "sqlgen/generation/candidate.hpp"
#include "sqlgen/llm/client.hpp"

namespace sqlgen {

/// Every configurable value of a pipeline run. The file form is a JSON
/// document with one section per module:
///
///   {
///     "pipeline":  {"dialect", "seed", "workers", "theta", "beta",
///                   "max_expansion_attempts", "max_generation_attempts", "tutorial_chars"},
///     "models":    {"generator": {...}, "judge": {...}, "embedder": {...}, "allow_same_judge"},
///     "filters":   {"beta1", "beta2", "alpha1", "k"},
///     "database":  {"timeout_ms", "row_limit"},
///     "icl":       {"k"}
///   }
///
/// Model sections take the ModelConfig fields (provider, base_url, model,
/// api_key_env, temperature, max_tokens, rps, timeout_ms, retry{...},
/// mock_dir, mock_synthesize). Omitted keys keep their defaults; unknown keys
/// are rejected. Secrets are never stored here: api_key_env names the
/// environment variable that holds the token.
struct PipelineConfig {
  Dialect dialect = Dialect::kSqlite;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t theta = 100;                 // target template pool size
  std::size_t beta = 100;                  // target dataset size
  std::size_t max_expansion_attempts = 0;  // 0 = 10 * theta
  std::size_t max_generation_attempts = 0; // 0 = 10 * beta
  std::size_t tutorial_chars = 8000;

  ModelConfig generator;
  ModelConfig judge;
  ModelConfig embedder;
  bool allow_same_judge = false;

  FilterConfig filters;
  std::size_t icl_k = 5;

  /// Offline defaults: rule-based mock GENERATOR and JUDGE (distinct ids),
  /// trigram fallback embedder.
  static PipelineConfig defaults();

  /// Throws ConfigError.
  static PipelineConfig from_json(const nlohmann::json& j, PipelineConfig base = defaults());
  static PipelineConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Range checks on all values. Throws ConfigError.
  void validate() const;
};

nlohmann::json model_to_json(const ModelConfig& m);

}  // namespace sqlgen
