#include "sqlgen/pipeline/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace sqlgen {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown config key '" + section + "." + it.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
  }
}

ModelConfig read_model(const json& j, ModelConfig m, const std::string& section) {
  check_keys(j, section,
             {"provider", "base_url", "model", "api_key_env", "temperature", "max_tokens", "rps", "timeout_ms", "retry",
              "mock_dir", "mock_synthesize"});
  read(j, "provider", m.provider, section);
  read(j, "base_url", m.base_url, section);
  read(j, "model", m.model, section);
  read(j, "api_key_env", m.api_key_env, section);
  read(j, "temperature", m.temperature, section);
  read(j, "max_tokens", m.max_tokens, section);
  read(j, "rps", m.rps, section);
  read(j, "timeout_ms", m.timeout_ms, section);
  read(j, "mock_dir", m.mock_dir, section);
  read(j, "mock_synthesize", m.mock_synthesize, section);
  if (j.contains("retry")) {
    const json& r = j["retry"];
    const std::string rs = section + ".retry";
    check_keys(r, rs, {"max_retries", "initial_backoff_ms", "multiplier", "max_backoff_ms"});
    read(r, "max_retries", m.retry.max_retries, rs);
    read(r, "initial_backoff_ms", m.retry.initial_backoff_ms, rs);
    read(r, "multiplier", m.retry.multiplier, rs);
    read(r, "max_backoff_ms", m.retry.max_backoff_ms, rs);
  }
  return m;
}

}  // namespace

json model_to_json(const ModelConfig& m) {
  return {{"provider", m.provider},
          {"base_url", m.base_url},
          {"model", m.model},
          {"api_key_env", m.api_key_env},
          {"temperature", m.temperature},
          {"max_tokens", m.max_tokens},
          {"rps", m.rps},
          {"timeout_ms", m.timeout_ms},
          {"retry",
           {{"max_retries", m.retry.max_retries},
            {"initial_backoff_ms", m.retry.initial_backoff_ms},
            {"multiplier", m.retry.multiplier},
            {"max_backoff_ms", m.retry.max_backoff_ms}}},
          {"mock_dir", m.mock_dir},
          {"mock_synthesize", m.mock_synthesize}};
}

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  c.generator.provider = "mock";
  c.generator.model = "generator";
  c.generator.temperature = 0.7;
  c.generator.mock_synthesize = true;
  c.judge.provider = "mock";
  c.judge.model = "judge";
  c.judge.temperature = 0.0;
  c.judge.mock_synthesize = true;
  c.embedder.provider = "fallback";
  c.embedder.model = "trigram";
  return c;
}

PipelineConfig PipelineConfig::from_json(const json& j, PipelineConfig c) {
  check_keys(j, "config", {"pipeline", "models", "filters", "database", "icl"});
  if (j.contains("pipeline")) {
    const json& p = j["pipeline"];
    check_keys(p, "pipeline",
               {"dialect", "seed", "workers", "theta", "beta", "max_expansion_attempts", "max_generation_attempts",
                "tutorial_chars"});
    if (p.contains("dialect")) {
      try {
        c.dialect = dialect_from_string(p["dialect"].get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("pipeline.dialect: ") + e.what());
      }
    }
    read(p, "seed", c.seed, "pipeline");
    read(p, "workers", c.workers, "pipeline");
    read(p, "theta", c.theta, "pipeline");
    read(p, "beta", c.beta, "pipeline");
    read(p, "max_expansion_attempts", c.max_expansion_attempts, "pipeline");
    read(p, "max_generation_attempts", c.max_generation_attempts, "pipeline");
    read(p, "tutorial_chars", c.tutorial_chars, "pipeline");
  }
  if (j.contains("models")) {
    const json& m = j["models"];
    check_keys(m, "models", {"generator", "judge", "embedder", "allow_same_judge"});
    if (m.contains("generator")) c.generator = read_model(m["generator"], c.generator, "models.generator");
    if (m.contains("judge")) c.judge = read_model(m["judge"], c.judge, "models.judge");
    if (m.contains("embedder")) c.embedder = read_model(m["embedder"], c.embedder, "models.embedder");
    read(m, "allow_same_judge", c.allow_same_judge, "models");
  }
  if (j.contains("filters")) {
    const json& f = j["filters"];
    check_keys(f, "filters", {"beta1", "beta2", "alpha1", "k"});
    read(f, "beta1", c.filters.beta1, "filters");
    read(f, "beta2", c.filters.beta2, "filters");
    read(f, "alpha1", c.filters.alpha1, "filters");
    read(f, "k", c.filters.k_rows, "filters");
  }
  if (j.contains("database")) {
    const json& d = j["database"];
    check_keys(d, "database", {"timeout_ms", "row_limit"});
    read(d, "timeout_ms", c.filters.timeout_ms, "database");
    read(d, "row_limit", c.filters.row_limit, "database");
  }
  if (j.contains("icl")) {
    const json& i = j["icl"];
    check_keys(i, "icl", {"k"});
    read(i, "k", c.icl_k, "icl");
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json PipelineConfig::to_json() const {
  return {{"pipeline",
           {{"dialect", std::string(to_string(dialect))},
            {"seed", seed},
            {"workers", workers},
            {"theta", theta},
            {"beta", beta},
            {"max_expansion_attempts", max_expansion_attempts},
            {"max_generation_attempts", max_generation_attempts},
            {"tutorial_chars", tutorial_chars}}},
          {"models",
           {{"generator", model_to_json(generator)},
            {"judge", model_to_json(judge)},
            {"embedder", model_to_json(embedder)},
            {"allow_same_judge", allow_same_judge}}},
          {"filters",
           {{"beta1", filters.beta1}, {"beta2", filters.beta2}, {"alpha1", filters.alpha1}, {"k", filters.k_rows}}},
          {"database", {{"timeout_ms", filters.timeout_ms}, {"row_limit", filters.row_limit}}},
          {"icl", {{"k", icl_k}}}};
}

void PipelineConfig::validate() const {
  try {
    filters.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("filters: ") + e.what());
  }
  if (workers < 1) throw ConfigError("pipeline.workers must be >= 1");
  if (tutorial_chars < 1) throw ConfigError("pipeline.tutorial_chars must be >= 1");
  if (icl_k < 1) throw ConfigError("icl.k must be >= 1");
  for (const ModelConfig* m : {&generator, &judge}) {
    if (m->temperature < 0 || m->temperature > 2) throw ConfigError("model " + m->id() + ": temperature out of range");
    if (m->max_tokens < 1) throw ConfigError("model " + m->id() + ": max_tokens must be >= 1");
  }
}

}  // namespace sqlgen
