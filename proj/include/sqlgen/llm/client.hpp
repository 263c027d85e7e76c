#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sqlgen {

enum class RoleKind { kGenerator, kJudge, kEmbedder };
std::string_view to_string(RoleKind r);

struct RetryPolicy {
  int max_retries = 3;
  int initial_backoff_ms = 500;
  double multiplier = 2.0;
  int max_backoff_ms = 8000;
};

// Endpoint configuration for one model role.
struct ModelConfig {
  std::string provider = "mock";  // "openai" (any OpenAI-compatible endpoint), "mock", or "fallback" (embedder)
  std::string base_url;           // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key_env;  // name of the environment variable holding the token; empty = no auth header
  double temperature = 0.7;
  int max_tokens = 1024;
  double rps = 2.0;  // requests per second; <= 0 disables limiting
  RetryPolicy retry;
  int timeout_ms = 60000;
  std::string mock_dir;          // mock: directory of canned replies keyed by prompt hash
  bool mock_synthesize = false;  // mock: answer prompts without a canned reply with the built-in responder

  /// Identifier used for role-separation checks and manifests ("provider:model").
  std::string id() const;
};

class LlmError : public std::runtime_error {
 public:
  enum class Kind { kTransport, kAuth, kOverload, kTimeout };
  LlmError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};
std::string_view to_string(LlmError::Kind k);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- transport ----------------------------------------------------------

struct HttpRequest {
  std::string url;
  std::map<std::string, std::string> headers;
  std::string body;
  int timeout_ms = 60000;
};

struct HttpResponse {
  int status = 0;  // 0 = no response (connection failure); -1 = timed out
  std::string body;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// HTTP(S) transport backed by cpp-httplib.
std::shared_ptr<Transport> make_http_transport();

// ---- rate limiting ----------------------------------------------------------

/// Sliding-window limiter: at most `rps` acquisitions in any one-second window
/// (rps below 1 allows one acquisition per 1/rps seconds). Thread-safe.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;
  explicit RateLimiter(double rps);
  void acquire();

 private:
  double rps_;
  std::mutex mu_;
  std::deque<Clock::time_point> recent_;
};

// ---- text generation ----------------------------------------------------------

class TextModel {
 public:
  virtual ~TextModel() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string id() const = 0;
};

/// OpenAI-compatible chat-completion client with retry and rate limiting.
class ChatModel : public TextModel {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;
  ChatModel(ModelConfig cfg, std::shared_ptr<Transport> transport, Sleeper sleeper = {});
  std::string complete(const std::string& prompt) override;
  std::string id() const override { return cfg_.id(); }
  int retries() const { return retries_; }

 private:
  ModelConfig cfg_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleep_;
  RateLimiter limiter_;
  std::atomic<int> retries_{0};
};

/// Deterministic offline model: replies are read from `<dir>/<prompt_key>.txt`.
/// With synthesize=true, prompts without a canned reply are answered by a
/// built-in rule-based responder that understands the three shipped prompts.
class MockModel : public TextModel {
 public:
  MockModel(std::string id, std::string dir, bool synthesize);
  std::string complete(const std::string& prompt) override;
  std::string id() const override { return id_; }

 private:
  std::string id_;
  std::string dir_;
  bool synthesize_;
};

/// File stem under which the mock looks up a canned reply for `prompt`.
std::string prompt_key(std::string_view prompt);

/// Rule-based reply to one of the shipped prompts (used by MockModel).
std::string synthesize_reply(std::string_view prompt);

std::unique_ptr<TextModel> make_text_model(const ModelConfig& cfg, std::shared_ptr<Transport> transport = nullptr);

// ---- embeddings ----------------------------------------------------------

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// Unit-norm vector. Throws std::invalid_argument on blank text.
  virtual std::vector<double> embed(std::string_view text) = 0;
  virtual bool is_fallback() const { return false; }
  virtual std::string id() const = 0;
};

/// Offline fallback: hashed character-trigram term frequencies. The text is
/// lowercased (ASCII), whitespace-collapsed and padded with one space on each
/// side; every byte trigram increments bucket fnv1a64(trigram) % dims; the
/// vector is L2-normalized.
class TrigramEmbedder : public Embedder {
 public:
  static constexpr std::size_t kDefaultDims = 1024;
  explicit TrigramEmbedder(std::size_t dims = kDefaultDims) : dims_(dims) {}
  std::vector<double> embed(std::string_view text) override;
  bool is_fallback() const override { return true; }
  std::string id() const override { return "fallback:trigram-" + std::to_string(dims_); }

 private:
  std::size_t dims_;
};

/// OpenAI-compatible /embeddings endpoint; results are re-normalized.
class RemoteEmbedder : public Embedder {
 public:
  RemoteEmbedder(ModelConfig cfg, std::shared_ptr<Transport> transport);
  std::vector<double> embed(std::string_view text) override;
  std::string id() const override { return cfg_.id(); }

 private:
  ModelConfig cfg_;
  std::shared_ptr<Transport> transport_;
  RateLimiter limiter_;
};

std::unique_ptr<Embedder> make_embedder(const ModelConfig& cfg, std::shared_ptr<Transport> transport = nullptr);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// ---- role bundle ----------------------------------------------------------

/// Rejects identical GENERATOR and JUDGE models unless allow_same is set, in
/// which case a warning is written to `warn`. Throws ConfigError.
void validate_roles(const ModelConfig& generator, const ModelConfig& judge, bool allow_same, std::ostream* warn);

/// The models used by one pipeline run, addressed by role. Thread-safe.
class LlmClient {
 public:
  LlmClient(std::unique_ptr<TextModel> generator, std::unique_ptr<TextModel> judge,
            std::unique_ptr<Embedder> embedder);

  std::string complete(const std::string& prompt, RoleKind role);
  std::vector<double> embed(std::string_view text);

  TextModel& generator() { return *generator_; }
  TextModel& judge() { return *judge_; }
  Embedder& embedder() { return *embedder_; }
  long requests(RoleKind role) const;

 private:
  std::unique_ptr<TextModel> generator_;
  std::unique_ptr<TextModel> judge_;
  std::unique_ptr<Embedder> embedder_;
  std::atomic<long> gen_requests_{0};
  std::atomic<long> judge_requests_{0};
  std::atomic<long> embed_requests_{0};
};

}  // namespace sqlgen
