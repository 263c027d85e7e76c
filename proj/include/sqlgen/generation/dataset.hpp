#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlgen/db/database.hpp"
#include "sqlgen/generation/candidate.hpp"
#include "sqlgen/llm/client.hpp"
#include "sqlgen/templates/template.hpp"

namespace sqlgen {

/// A database the generator may draw from: its profile and how to connect.
struct DatabaseSource {
  DatabaseProfile profile;
  std::string url;
};

struct GenerationOptions {
  std::size_t beta = 100;          // target number of accepted pairs
  std::size_t max_attempts = 0;    // 0 = 10 * beta
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  FilterConfig filters;
  std::shared_ptr<Transport> transport;  // for gateway databases
  /// When set, no new round starts once it reads true; the running round
  /// drains first, so the state stays a valid checkpoint.
  const std::atomic<bool>* stop = nullptr;
};

/// Candidate-level funnel, one stage per filter in pipeline order.
struct FunnelStage {
  std::string name;
  std::size_t attempted = 0;
  std::size_t failed = 0;
};

/// Stage names in order: generation, parse, execution, mismatch, aggregation,
/// quality, length, dedup.
const std::vector<std::string>& funnel_stage_names();

/// Everything needed to continue an interrupted run.
struct GenerationState {
  std::size_t attempts = 0;
  std::vector<CandidatePair> accepted;
  std::vector<FunnelStage> funnel;  // empty = fresh funnel
  std::size_t empty_results = 0;
  std::size_t fixed = 0;
  std::size_t provider_errors = 0;  // attempts lost to a GENERATOR or JUDGE provider failure

  nlohmann::json checkpoint_json() const;  // everything except the pairs
  /// Restores counters from a checkpoint; `pairs` supplies the accepted pairs
  /// (extra pairs beyond the checkpointed count are dropped).
  static GenerationState from_checkpoint(const nlohmann::json& j, std::vector<CandidatePair> pairs);
};

struct GenerationReport {
  GenerationState state;
  bool reached_target = false;
  bool stopped = false;  // ended because of GenerationOptions::stop
};

struct GenerationCallbacks {
  std::function<void(const CandidatePair&)> on_accept;
  /// One quality log line per judged candidate, in attempt order.
  std::function<void(const std::string&)> on_quality;
  /// Called after each round, once the round's accepted pairs were reported.
  std::function<void(const GenerationState&)> on_checkpoint;
};

/// A dataset file line that is not a valid pair.
class DatasetFormatError : public std::runtime_error {
 public:
  DatasetFormatError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Pairs of a dataset JSON Lines text (blank lines are skipped). Throws
/// DatasetFormatError naming the first malformed line (1-based).
std::vector<CandidatePair> parse_dataset(std::string_view text);
/// Throws std::runtime_error when the file cannot be read.
std::vector<CandidatePair> load_dataset(const std::filesystem::path& path);

std::size_t default_generation_attempts(std::size_t beta);
inline constexpr std::size_t kGenerationBatch = 8;

/// Generates pairs until `beta` are accepted or the attempt budget is spent.
/// Attempt i draws its template, database and sample rows from an RNG seeded
/// with (seed, i), so a run is reproducible for a given seed irrespective of
/// the worker count, and a resumed run continues exactly where it stopped.
GenerationReport generate_dataset(const TemplatePool& pool, const std::vector<DatabaseSource>& sources,
                                  LlmClient& llm, const GenerationOptions& options, GenerationState start = {},
                                  const GenerationCallbacks& callbacks = {});

}  // namespace sqlgen
