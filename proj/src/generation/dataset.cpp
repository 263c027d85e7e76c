#include "sqlgen/generation/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <map>
#include <mutex>
#include <random>
#include <unordered_set>

#include "sqlgen/quality/quality.hpp"
#include "sqlgen/util/parallel.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using nlohmann::json;

namespace {

enum Stage : std::size_t { kGeneration, kParse, kExecution, kMismatch, kAggregation, kQuality, kLength, kDedup, kDone };

std::vector<FunnelStage> fresh_funnel() {
  std::vector<FunnelStage> f;
  for (const auto& n : funnel_stage_names()) f.push_back({n, 0, 0});
  return f;
}

// Connections are not thread-safe; each call borrows one for its duration.
class ConnectionPool {
 public:
  ConnectionPool(const std::vector<DatabaseSource>& sources, std::shared_ptr<Transport> transport)
      : sources_(sources), transport_(std::move(transport)), free_(sources.size()) {}

  std::unique_ptr<Database> acquire(std::size_t i) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (!free_[i].empty()) {
        auto db = std::move(free_[i].back());
        free_[i].pop_back();
        return db;
      }
    }
    return open_database(sources_[i].url, transport_);
  }

  void release(std::size_t i, std::unique_ptr<Database> db) {
    std::lock_guard<std::mutex> lock(mu_);
    free_[i].push_back(std::move(db));
  }

 private:
  const std::vector<DatabaseSource>& sources_;
  std::shared_ptr<Transport> transport_;
  std::mutex mu_;
  std::vector<std::vector<std::unique_ptr<Database>>> free_;
};

struct Attempt {
  std::size_t failed_at = kDone;  // first stage that rejected the candidate
  std::optional<CandidatePair> pair;
  bool empty_result = false;
  bool fixed = false;
  bool provider_error = false;
  std::string quality_log;
};

std::mt19937_64 attempt_rng(std::uint64_t seed, std::size_t attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(attempt), static_cast<std::uint32_t>(std::uint64_t(attempt) >> 32)};
  return std::mt19937_64(seq);
}

Attempt run_attempt(std::size_t index, const TemplatePool& pool, const std::vector<DatabaseSource>& sources,
                    ConnectionPool& conns, LlmClient& llm, const GenerationOptions& opt) {
  Attempt out;
  auto rng = attempt_rng(opt.seed, index);
  const SqlTemplate& tmpl = sample_template(pool, rng);
  std::size_t di = std::uniform_int_distribution<std::size_t>(0, sources.size() - 1)(rng);
  auto db = conns.acquire(di);
  struct Release {
    ConnectionPool& c;
    std::size_t i;
    std::unique_ptr<Database>& db;
    ~Release() { c.release(i, std::move(db)); }
  } release{conns, di, db};

  DatabaseProfile profile = with_sample_rows(sources[di].profile, *db, rng);
  CandidatePair pair;
  try {
    pair = generate_candidate(tmpl, profile, llm);
  } catch (const GenError& e) {
    out.failed_at = e.kind() == GenError::Kind::kParseError ? kParse : kGeneration;
    out.provider_error = e.kind() == GenError::Kind::kLlmError;
    return out;
  }
  pair.filter_trail.push_back({"parse", StepStatus::kPass, ""});
  auto rs = filter_execution(pair, *db, opt.filters);
  if (!rs) {
    out.failed_at = kExecution;
    return out;
  }
  out.empty_result = rs->rows.empty() && !rs->parse_only;
  if (!filter_mismatch(pair, llm.embedder(), opt.filters)) {
    out.failed_at = kMismatch;
    return out;
  }
  if (!filter_aggregation(pair)) {
    out.failed_at = kAggregation;
    return out;
  }
  const std::string judged_id = pair.id;
  QualityResult q = quality_check(pair, *rs, profile, *db, llm, opt.filters);
  out.quality_log = quality_log_json(judged_id, q);
  if (q.outcome == QualityOutcome::kDiscard) {
    out.failed_at = kQuality;
    out.provider_error = q.reason == "LlmError";
    return out;
  }
  out.fixed = q.outcome == QualityOutcome::kFixed;
  out.pair = std::move(pair);
  return out;
}

}  // namespace

const std::vector<std::string>& funnel_stage_names() {
  static const std::vector<std::string> names = {"generation", "parse",   "execution", "mismatch",
                                                 "aggregation", "quality", "length",    "dedup"};
  return names;
}

std::size_t default_generation_attempts(std::size_t beta) { return 10 * beta; }

std::vector<CandidatePair> parse_dataset(std::string_view text) {
  std::vector<CandidatePair> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (util::trim(line).empty()) continue;
    try {
      out.push_back(CandidatePair::from_json(line));
    } catch (const std::exception& e) {
      throw DatasetFormatError(line_no, e.what());
    }
  }
  return out;
}

std::vector<CandidatePair> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read dataset " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str());
}

json GenerationState::checkpoint_json() const {
  json f = json::array();
  for (const auto& s : funnel) f.push_back({{"stage", s.name}, {"attempted", s.attempted}, {"failed", s.failed}});
  return {{"attempts", attempts},
          {"accepted", accepted.size()},
          {"funnel", f},
          {"empty_results", empty_results},
          {"fixed", fixed},
          {"provider_errors", provider_errors}};
}

GenerationState GenerationState::from_checkpoint(const json& j, std::vector<CandidatePair> pairs) {
  GenerationState s;
  s.attempts = j.at("attempts").get<std::size_t>();
  std::size_t n = j.at("accepted").get<std::size_t>();
  if (pairs.size() < n) {
    throw std::invalid_argument("dataset holds " + std::to_string(pairs.size()) + " pairs but the checkpoint records " +
                                std::to_string(n));
  }
  pairs.resize(n);
  s.accepted = std::move(pairs);
  for (const auto& f : j.at("funnel")) {
    s.funnel.push_back({f.at("stage").get<std::string>(), f.at("attempted").get<std::size_t>(),
                        f.at("failed").get<std::size_t>()});
  }
  s.empty_results = j.value("empty_results", std::size_t{0});
  s.fixed = j.value("fixed", std::size_t{0});
  s.provider_errors = j.value("provider_errors", std::size_t{0});
  return s;
}

GenerationReport generate_dataset(const TemplatePool& pool, const std::vector<DatabaseSource>& sources,
                                  LlmClient& llm, const GenerationOptions& options, GenerationState start,
                                  const GenerationCallbacks& callbacks) {
  options.filters.validate();
  if (pool.empty()) throw TemplateError(TemplateError::Kind::kEmptyPool, "template pool is empty");
  if (sources.empty()) throw std::invalid_argument("no databases to generate from");
  for (const auto& s : sources) {
    if (s.profile.dialect != pool.dialect()) {
      throw std::invalid_argument("database " + s.profile.db_id + " is " + std::string(to_string(s.profile.dialect)) +
                                  " but the template pool is " + std::string(to_string(pool.dialect())));
    }
  }
  const std::size_t max_attempts =
      options.max_attempts ? options.max_attempts : default_generation_attempts(options.beta);

  GenerationReport report;
  GenerationState& st = report.state;
  st = std::move(start);
  if (st.funnel.empty()) st.funnel = fresh_funnel();
  if (st.funnel.size() != funnel_stage_names().size()) throw std::invalid_argument("checkpoint funnel has wrong stages");

  std::unordered_set<std::string> seen;
  for (const auto& p : st.accepted) seen.insert(normalize_sql(p.sql, p.dialect));

  ConnectionPool conns(sources, options.transport);
  while (st.accepted.size() < options.beta && st.attempts < max_attempts) {
    if (options.stop && options.stop->load()) {
      report.stopped = true;
      break;
    }
    // Each attempt yields at most one pair, so a round never overshoots beta.
    std::size_t round =
        std::min({kGenerationBatch, options.beta - st.accepted.size(), max_attempts - st.attempts});
    std::vector<Attempt> results(round);
    const std::size_t base = st.attempts;
    util::parallel_for(round, options.workers, [&](std::size_t i) {
      results[i] = run_attempt(base + i, pool, sources, conns, llm, options);
    });
    for (auto& r : results) {
      ++st.attempts;
      if (r.provider_error) ++st.provider_errors;
      if (!r.quality_log.empty() && callbacks.on_quality) callbacks.on_quality(r.quality_log);
      std::size_t reached = r.failed_at;
      if (r.pair) {
        CandidatePair& p = *r.pair;
        std::size_t words = question_length(p.question);
        if (words > static_cast<std::size_t>(options.filters.alpha1)) {
          p.filter_trail.push_back({"length", StepStatus::kFail, std::to_string(words) + " words"});
          reached = kLength;
        } else {
          p.filter_trail.push_back({"length", StepStatus::kPass, std::to_string(words) + " words"});
          if (!seen.insert(normalize_sql(p.sql, p.dialect)).second) {
            p.filter_trail.push_back({"dedup", StepStatus::kFail, "duplicate SQL"});
            reached = kDedup;
          } else {
            p.filter_trail.push_back({"dedup", StepStatus::kPass, ""});
          }
        }
      }
      for (std::size_t s = 0; s < st.funnel.size() && s <= reached; ++s) ++st.funnel[s].attempted;
      if (reached < st.funnel.size()) {
        ++st.funnel[reached].failed;
        continue;
      }
      if (r.empty_result) ++st.empty_results;
      if (r.fixed) ++st.fixed;
      st.accepted.push_back(std::move(*r.pair));
      if (callbacks.on_accept) callbacks.on_accept(st.accepted.back());
    }
    if (callbacks.on_checkpoint) callbacks.on_checkpoint(st);
  }
  report.reached_target = st.accepted.size() >= options.beta;
  return report;
}

}  // namespace sqlgen
