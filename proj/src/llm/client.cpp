#include "sqlgen/llm/client.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using nlohmann::json;

std::string_view to_string(RoleKind r) {
  switch (r) {
    case RoleKind::kGenerator:
      return "GENERATOR";
    case RoleKind::kJudge:
      return "JUDGE";
    case RoleKind::kEmbedder:
      return "EMBEDDER";
  }
  return "GENERATOR";
}

std::string_view to_string(LlmError::Kind k) {
  switch (k) {
    case LlmError::Kind::kTransport:
      return "transport";
    case LlmError::Kind::kAuth:
      return "auth";
    case LlmError::Kind::kOverload:
      return "overload";
    case LlmError::Kind::kTimeout:
      return "timeout";
  }
  return "transport";
}

std::string ModelConfig::id() const { return provider + ":" + model; }

// ---- rate limiter ----------------------------------------------------------

RateLimiter::RateLimiter(double rps) : rps_(rps) {}

void RateLimiter::acquire() {
  if (rps_ <= 0) return;
  const std::size_t cap = rps_ >= 1 ? static_cast<std::size_t>(std::floor(rps_)) : 1;
  const auto window = rps_ >= 1 ? std::chrono::milliseconds(1000)
                                : std::chrono::milliseconds(static_cast<long>(std::ceil(1000.0 / rps_)));
  std::lock_guard<std::mutex> lock(mu_);
  while (true) {
    auto now = Clock::now();
    while (!recent_.empty() && now - recent_.front() > window) recent_.pop_front();
    if (recent_.size() < cap) {
      recent_.push_back(now);
      return;
    }
    // Holding the lock while waiting keeps acquisitions in arrival order.
    std::this_thread::sleep_until(recent_.front() + window + std::chrono::milliseconds(1));
  }
}

// ---- HTTP plumbing ----------------------------------------------------------

namespace {

enum class Outcome { kOk, kRetry, kFail };

struct Classified {
  Outcome outcome;
  LlmError::Kind kind;
};

Classified classify(const HttpResponse& r) {
  if (r.status >= 200 && r.status < 300) return {Outcome::kOk, LlmError::Kind::kTransport};
  if (r.status == 401 || r.status == 403) return {Outcome::kFail, LlmError::Kind::kAuth};
  if (r.status == 429 || r.status == 503) return {Outcome::kRetry, LlmError::Kind::kOverload};
  if (r.status == -1 || r.status == 408 || r.status == 504) return {Outcome::kRetry, LlmError::Kind::kTimeout};
  if (r.status == 0 || r.status >= 500) return {Outcome::kRetry, LlmError::Kind::kTransport};
  return {Outcome::kFail, LlmError::Kind::kTransport};
}

std::string auth_token(const ModelConfig& cfg) {
  if (cfg.api_key_env.empty()) return {};
  const char* v = std::getenv(cfg.api_key_env.c_str());
  if (!v || !*v) {
    throw LlmError(LlmError::Kind::kAuth, "environment variable " + cfg.api_key_env + " with the API token for " +
                                              cfg.id() + " is not set");
  }
  return v;
}

std::string join_url(const std::string& base, std::string_view path) {
  std::string b = base;
  while (!b.empty() && b.back() == '/') b.pop_back();
  return b + std::string(path);
}

// Sends `body` with retry/backoff; returns the parsed 2xx response body.
json post_with_retry(const ModelConfig& cfg, Transport& transport, RateLimiter& limiter,
                     const std::function<void(std::chrono::milliseconds)>& sleep, std::string_view path,
                     const json& body, std::atomic<int>* retries) {
  const std::string token = auth_token(cfg);  // fails before any request is sent
  HttpRequest req;
  req.url = join_url(cfg.base_url, path);
  req.headers["Content-Type"] = "application/json";
  if (!token.empty()) req.headers["Authorization"] = "Bearer " + token;
  req.body = body.dump();
  req.timeout_ms = cfg.timeout_ms;

  double backoff = cfg.retry.initial_backoff_ms;
  for (int attempt = 0;; ++attempt) {
    limiter.acquire();
    HttpResponse resp = transport.post(req);
    Classified c = classify(resp);
    if (c.outcome == Outcome::kOk) {
      json j = json::parse(resp.body, nullptr, false);
      if (j.is_discarded()) throw LlmError(LlmError::Kind::kTransport, "provider returned a non-JSON body");
      return j;
    }
    std::string detail = resp.status > 0 ? "HTTP " + std::to_string(resp.status) : resp.error;
    if (c.outcome == Outcome::kRetry && attempt < cfg.retry.max_retries) {
      if (retries) ++*retries;
      auto wait = std::min<double>(backoff, cfg.retry.max_backoff_ms);
      sleep(std::chrono::milliseconds(static_cast<long>(wait)));
      backoff *= cfg.retry.multiplier;
      continue;
    }
    throw LlmError(c.kind, cfg.id() + ": " + detail + (attempt > 0 ? " after " + std::to_string(attempt) + " retries" : ""));
  }
}

void default_sleep(std::chrono::milliseconds ms) { std::this_thread::sleep_for(ms); }

}  // namespace

// ---- chat model ----------------------------------------------------------

ChatModel::ChatModel(ModelConfig cfg, std::shared_ptr<Transport> transport, Sleeper sleeper)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      sleep_(sleeper ? std::move(sleeper) : Sleeper(default_sleep)),
      limiter_(cfg_.rps) {}

std::string ChatModel::complete(const std::string& prompt) {
  json body = {{"model", cfg_.model},
               {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
               {"temperature", cfg_.temperature},
               {"max_tokens", cfg_.max_tokens}};
  json resp = post_with_retry(cfg_, *transport_, limiter_, sleep_, "/chat/completions", body, &retries_);
  try {
    return resp.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw LlmError(LlmError::Kind::kTransport, cfg_.id() + ": response has no choices[0].message.content");
  }
}

// ---- mock ----------------------------------------------------------

std::string prompt_key(std::string_view prompt) { return util::hex64(util::fnv1a64(prompt)); }

MockModel::MockModel(std::string id, std::string dir, bool synthesize)
    : id_(std::move(id)), dir_(std::move(dir)), synthesize_(synthesize) {}

std::string MockModel::complete(const std::string& prompt) {
  const std::string key = prompt_key(prompt);
  if (!dir_.empty()) {
    std::ifstream in(std::filesystem::path(dir_) / (key + ".txt"), std::ios::binary);
    if (in) {
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
  }
  if (synthesize_) return synthesize_reply(prompt);
  throw LlmError(LlmError::Kind::kTransport, id_ + ": no canned reply for prompt key " + key);
}

std::unique_ptr<TextModel> make_text_model(const ModelConfig& cfg, std::shared_ptr<Transport> transport) {
  if (cfg.provider == "mock") return std::make_unique<MockModel>(cfg.id(), cfg.mock_dir, cfg.mock_synthesize);
  if (cfg.provider == "openai") {
    if (cfg.base_url.empty()) throw ConfigError("model " + cfg.id() + " needs a base_url");
    return std::make_unique<ChatModel>(cfg, transport ? std::move(transport) : make_http_transport());
  }
  throw ConfigError("unknown model provider '" + cfg.provider + "'");
}

// ---- embeddings ----------------------------------------------------------

std::vector<double> TrigramEmbedder::embed(std::string_view text) {
  std::string norm = util::to_lower(util::collapse_whitespace(text));
  if (norm.empty()) throw std::invalid_argument("cannot embed blank text");
  std::string padded = " " + norm + " ";
  std::vector<double> v(dims_, 0.0);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    v[util::fnv1a64(std::string_view(padded).substr(i, 3)) % dims_] += 1.0;
  }
  double norm2 = 0;
  for (double x : v) norm2 += x * x;
  double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

RemoteEmbedder::RemoteEmbedder(ModelConfig cfg, std::shared_ptr<Transport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), limiter_(cfg_.rps) {}

std::vector<double> RemoteEmbedder::embed(std::string_view text) {
  if (util::trim(text).empty()) throw std::invalid_argument("cannot embed blank text");
  json body = {{"model", cfg_.model}, {"input", std::string(text)}};
  json resp = post_with_retry(cfg_, *transport_, limiter_, default_sleep, "/embeddings", body, nullptr);
  std::vector<double> v;
  try {
    v = resp.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception&) {
    throw LlmError(LlmError::Kind::kTransport, cfg_.id() + ": response has no data[0].embedding");
  }
  double n2 = 0;
  for (double x : v) n2 += x * x;
  if (n2 <= 0) throw LlmError(LlmError::Kind::kTransport, cfg_.id() + ": zero embedding vector");
  double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

std::unique_ptr<Embedder> make_embedder(const ModelConfig& cfg, std::shared_ptr<Transport> transport) {
  if (cfg.provider == "fallback" || cfg.provider == "mock" || cfg.provider.empty()) {
    return std::make_unique<TrigramEmbedder>();
  }
  if (cfg.provider == "openai") {
    if (cfg.base_url.empty()) throw ConfigError("embedder " + cfg.id() + " needs a base_url");
    return std::make_unique<RemoteEmbedder>(cfg, transport ? std::move(transport) : make_http_transport());
  }
  throw ConfigError("unknown embedder provider '" + cfg.provider + "'");
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine of vectors with different dimensions");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---- roles ----------------------------------------------------------

void validate_roles(const ModelConfig& generator, const ModelConfig& judge, bool allow_same, std::ostream* warn) {
  if (generator.id() != judge.id()) return;
  if (!allow_same) {
    throw ConfigError("GENERATOR and JUDGE both use " + generator.id() +
                      "; the quality check needs a different model (set allow_same_judge to override)");
  }
  if (warn) *warn << "warning: GENERATOR and JUDGE both use " << generator.id() << "\n";
}

LlmClient::LlmClient(std::unique_ptr<TextModel> generator, std::unique_ptr<TextModel> judge,
                     std::unique_ptr<Embedder> embedder)
    : generator_(std::move(generator)), judge_(std::move(judge)), embedder_(std::move(embedder)) {}

std::string LlmClient::complete(const std::string& prompt, RoleKind role) {
  switch (role) {
    case RoleKind::kGenerator:
      ++gen_requests_;
      return generator_->complete(prompt);
    case RoleKind::kJudge:
      ++judge_requests_;
      return judge_->complete(prompt);
    case RoleKind::kEmbedder:
      break;
  }
  throw std::invalid_argument("complete() needs the GENERATOR or JUDGE role");
}

std::vector<double> LlmClient::embed(std::string_view text) {
  ++embed_requests_;
  return embedder_->embed(text);
}

long LlmClient::requests(RoleKind role) const {
  switch (role) {
    case RoleKind::kGenerator:
      return gen_requests_;
    case RoleKind::kJudge:
      return judge_requests_;
    case RoleKind::kEmbedder:
      return embed_requests_;
  }
  return 0;
}

}  // namespace sqlgen
