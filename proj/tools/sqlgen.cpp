// sqlgen: command-line front end of the synthetic text-to-SQL pipeline.
//
// Exit codes: 0 success, 1 audit found failing pairs, 2 input or
// configuration error, 3 attempt budget exhausted before the target was
// reached, 4 model provider failure, 130 interrupted (checkpoint written).

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqlgen/adaptation/icl.hpp"
#include "sqlgen/db/database.hpp"
#include "sqlgen/expansion/expansion.hpp"
#include "sqlgen/generation/dataset.hpp"
#include "sqlgen/llm/client.hpp"
#include "sqlgen/llm/prompts.hpp"
#include "sqlgen/pipeline/config.hpp"
#include "sqlgen/stats/stats.hpp"
#include "sqlgen/templates/template.hpp"
#include "sqlgen/tutorials/tutorial.hpp"
#include "sqlgen/util/strings.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sqlgen;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit : int { kOk = 0, kAuditFailed = 1, kInputError = 2, kBudgetExhausted = 3, kProviderFailure = 4,
                  kInterrupted = 130 };

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop.store(true); }

// Raised for bad inputs and configuration; maps to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes via a temporary file and rename so readers never see a partial file.
void write_text(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + p.string());
    out << content;
    if (!out.flush()) throw InputError("cannot write " + p.string());
  }
  fs::rename(tmp, p);
}

// Paths inside the output directory are recorded relative to it, so that a
// manifest does not depend on where the run directory lives.
std::string display_path(const fs::path& p, const fs::path& dir) {
  fs::path rel = p.lexically_normal().lexically_relative(dir.lexically_normal());
  if (rel.empty() || *rel.begin() == "..") return p.string();
  return rel.string();
}

std::string content_hash(const std::string& text) { return util::hex64(util::fnv1a64(text)); }

// ---- options shared by all subcommands ------------------------------------------

struct Overrides {
  std::string config_path;
  std::optional<std::string> dialect;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> generator_provider, generator_model, generator_url, generator_key_env;
  std::optional<std::string> judge_provider, judge_model, judge_url, judge_key_env;
  std::optional<std::string> embedder_provider, embedder_model, embedder_url, embedder_key_env;
  std::optional<std::string> mock_dir;
  bool allow_same_judge = false;
  std::optional<double> beta1, beta2, alpha1;
  std::optional<std::size_t> k_rows;
  std::optional<int> timeout_ms;
  std::optional<std::size_t> row_limit;
  bool quiet = false;
};

void add_common_options(CLI::App& app, Overrides& o) {
  app.add_option("-c,--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--dialect", o.dialect, "Target dialect: sqlite, postgresql or bigquery");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--workers", o.workers, "Concurrent model calls")->check(CLI::PositiveNumber);
  app.add_option("--generator-provider", o.generator_provider, "mock or openai");
  app.add_option("--generator-model", o.generator_model, "GENERATOR model name");
  app.add_option("--generator-url", o.generator_url, "GENERATOR endpoint base URL");
  app.add_option("--generator-key-env", o.generator_key_env, "Environment variable holding the GENERATOR token");
  app.add_option("--judge-provider", o.judge_provider, "mock or openai");
  app.add_option("--judge-model", o.judge_model, "JUDGE model name");
  app.add_option("--judge-url", o.judge_url, "JUDGE endpoint base URL");
  app.add_option("--judge-key-env", o.judge_key_env, "Environment variable holding the JUDGE token");
  app.add_option("--embedder-provider", o.embedder_provider, "fallback, mock or openai");
  app.add_option("--embedder-model", o.embedder_model, "EMBEDDER model name");
  app.add_option("--embedder-url", o.embedder_url, "EMBEDDER endpoint base URL");
  app.add_option("--embedder-key-env", o.embedder_key_env, "Environment variable holding the EMBEDDER token");
  app.add_option("--mock-dir", o.mock_dir, "Directory of canned replies for mock models");
  app.add_flag("--allow-same-judge", o.allow_same_judge, "Permit the JUDGE to be the GENERATOR model");
  app.add_option("--beta1", o.beta1, "Edit-distance threshold of the mismatch filter");
  app.add_option("--beta2", o.beta2, "Similarity threshold of the mismatch filter");
  app.add_option("--alpha1", o.alpha1, "Maximum question length in words");
  app.add_option("--k-rows", o.k_rows, "Result rows shown to the judge");
  app.add_option("--timeout-ms", o.timeout_ms, "Query execution timeout");
  app.add_option("--row-limit", o.row_limit, "Maximum rows fetched per query");
  app.add_flag("-q,--quiet", o.quiet, "Only print errors");
}

PipelineConfig resolve_config(const Overrides& o) {
  PipelineConfig c = o.config_path.empty() ? PipelineConfig::defaults() : PipelineConfig::load(o.config_path);
  if (o.dialect) {
    try {
      c.dialect = dialect_from_string(*o.dialect);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--dialect: ") + e.what());
    }
  }
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  auto apply = [](ModelConfig& m, const std::optional<std::string>& provider, const std::optional<std::string>& model,
                  const std::optional<std::string>& url, const std::optional<std::string>& key_env) {
    if (provider) m.provider = *provider;
    if (model) m.model = *model;
    if (url) m.base_url = *url;
    if (key_env) m.api_key_env = *key_env;
  };
  apply(c.generator, o.generator_provider, o.generator_model, o.generator_url, o.generator_key_env);
  apply(c.judge, o.judge_provider, o.judge_model, o.judge_url, o.judge_key_env);
  apply(c.embedder, o.embedder_provider, o.embedder_model, o.embedder_url, o.embedder_key_env);
  if (o.mock_dir) c.generator.mock_dir = c.judge.mock_dir = *o.mock_dir;
  if (o.allow_same_judge) c.allow_same_judge = true;
  if (o.beta1) c.filters.beta1 = *o.beta1;
  if (o.beta2) c.filters.beta2 = *o.beta2;
  if (o.alpha1) c.filters.alpha1 = *o.alpha1;
  if (o.k_rows) c.filters.k_rows = *o.k_rows;
  if (o.timeout_ms) c.filters.timeout_ms = *o.timeout_ms;
  if (o.row_limit) c.filters.row_limit = *o.row_limit;
  c.validate();
  return c;
}

struct Context {
  Overrides overrides;
  PipelineConfig cfg;
  std::ostream& log() { return overrides.quiet ? null_stream : std::cerr; }
  std::ostringstream null_stream;
};

// Builds the model bundle. The role-separation guard runs first, so a
// misconfigured run stops before any provider is contacted.
std::unique_ptr<LlmClient> make_llm(Context& ctx) {
  validate_roles(ctx.cfg.generator, ctx.cfg.judge, ctx.cfg.allow_same_judge, &std::cerr);
  auto transport = (ctx.cfg.generator.provider == "openai" || ctx.cfg.judge.provider == "openai" ||
                    ctx.cfg.embedder.provider == "openai")
                       ? make_http_transport()
                       : nullptr;
  return std::make_unique<LlmClient>(make_text_model(ctx.cfg.generator, transport),
                                     make_text_model(ctx.cfg.judge, transport),
                                     make_embedder(ctx.cfg.embedder, transport));
}

json prompt_hashes() {
  return {{"template_expansion", content_hash(builtin_prompt(PromptName::kTempGen).body)},
          {"sample_generation", content_hash(builtin_prompt(PromptName::kGen).body)},
          {"quality_check", content_hash(builtin_prompt(PromptName::kQuality).body)}};
}

// ---- extract-seeds ---------------------------------------------------------------

struct SeedArgs {
  std::string corpus;
  std::string corpus_dialect = "sqlite";
  std::string out;
};

int extract_seeds(Context& ctx, const SeedArgs& a) {
  Dialect source = dialect_from_string(a.corpus_dialect);
  std::vector<CorpusEntry> corpus;
  try {
    corpus = load_corpus(a.corpus, source);
  } catch (const std::exception& e) {
    throw InputError(std::string("cannot load corpus: ") + e.what());
  }
  SeedPoolReport rep;
  TemplatePool pool;
  try {
    pool = build_seed_pool(corpus, ctx.cfg.dialect, &rep);
  } catch (const TemplateError& e) {
    if (e.kind() != TemplateError::Kind::kEmptyPool) throw;
    std::cerr << "error: no template could be extracted from " << a.corpus << " (" << corpus.size()
              << " queries read, " << rep.parse_failed << " unparsable, " << rep.transpile_failed
              << " not transpilable)\n";
    return kInputError;
  }
  pool.save(a.out);
  ctx.log() << "seed templates: " << rep.templates << " from " << rep.input << " queries (" << rep.parse_failed
            << " unparsable, " << rep.transpile_failed << " not transpilable, " << rep.duplicates
            << " duplicates) -> " << a.out << "\n";
  return kOk;
}

// ---- expand ------------------------------------------------------------------------

struct ExpandArgs {
  std::string pool;
  std::string tutorials;
  std::optional<std::size_t> theta;
  std::optional<std::size_t> max_attempts;
  std::string out;  // default: overwrite --pool
  std::string log;  // default: expansion_log.jsonl next to the output pool
};

struct ExpandOutcome {
  int code = kOk;
  std::size_t pool_size = 0;
  std::size_t attempts = 0;
};

ExpandOutcome expand(Context& ctx, const ExpandArgs& a) {
  const std::size_t theta = a.theta.value_or(ctx.cfg.theta);
  const fs::path out = a.out.empty() ? fs::path(a.pool) : fs::path(a.out);
  const fs::path log_path = a.log.empty() ? out.parent_path() / "expansion_log.jsonl" : fs::path(a.log);

  TemplatePool pool;
  try {
    pool = TemplatePool::load(a.pool, theta);
  } catch (const std::exception& e) {
    throw InputError(std::string("cannot load template pool: ") + e.what());
  }
  if (pool.empty()) throw InputError("template pool " + a.pool + " is empty");
  auto llm = make_llm(ctx);

  ExpandOutcome outcome;
  if (pool.size() >= theta) {
    ctx.log() << "pool already holds " << pool.size() << " templates (target " << theta << "); nothing to do\n";
    if (out != fs::path(a.pool)) pool.save(out);
    write_text(log_path, "");
    outcome.pool_size = pool.size();
    return outcome;
  }
  std::vector<TutorialDoc> docs;
  try {
    docs = load_tutorials(a.tutorials, pool.dialect(), ctx.cfg.tutorial_chars);
  } catch (const std::exception& e) {
    throw InputError(std::string("cannot load tutorials: ") + e.what());
  }
  bool any = false;
  for (const auto& d : docs) any = any || d.dialect == pool.dialect();
  if (!any) throw InputError("no " + std::string(display_name(pool.dialect())) + " tutorials in " + a.tutorials);

  const std::size_t max_attempts =
      a.max_attempts.value_or(ctx.cfg.max_expansion_attempts ? ctx.cfg.max_expansion_attempts
                                                              : default_max_attempts(theta));
  std::mt19937_64 rng(ctx.cfg.seed);
  std::string log_text;
  std::size_t provider_errors = 0;
  ExpansionResult res = expand_pool(pool, docs, *llm, theta, max_attempts, ctx.cfg.workers, rng,
                                    [&](const ExpansionRecord& r) {
                                      log_text += r.to_json() + "\n";
                                      if (r.reason == RejectReason::kLlmError) ++provider_errors;
                                    });
  pool.save(out);
  write_text(log_path, log_text);
  outcome.pool_size = pool.size();
  outcome.attempts = res.records.size();
  std::size_t accepted = 0;
  for (const auto& r : res.records) accepted += r.accepted;
  ctx.log() << "expansion: " << accepted << " new templates in " << res.records.size() << " attempts; pool size "
            << pool.size() << " (target " << theta << ") -> " << out.string() << "\n";
  if (!res.reached_target) {
    if (!res.records.empty() && provider_errors == res.records.size()) {
      std::cerr << "error: every expansion attempt failed at the model provider\n";
      outcome.code = kProviderFailure;
    } else {
      std::cerr << "error: attempt budget of " << max_attempts << " exhausted with " << pool.size() << " of "
                << theta << " templates\n";
      outcome.code = kBudgetExhausted;
    }
  }
  return outcome;
}

// ---- generate ----------------------------------------------------------------------

struct GenerateArgs {
  std::string pool;
  std::vector<std::string> dbs;
  std::optional<std::size_t> beta;
  std::optional<std::size_t> max_attempts;
  std::string out;
  bool resume = false;
};

struct OpenedSources {
  std::vector<DatabaseSource> sources;
  json manifest_entries = json::array();
  std::vector<std::string> parse_only_dialects;
};

OpenedSources open_sources(const std::vector<std::string>& urls) {
  OpenedSources o;
  std::set<std::string> ids;
  for (const auto& url : urls) {
    std::unique_ptr<Database> db;
    DatabaseProfile profile;
    try {
      db = open_database(url);
      profile = db->introspect();
    } catch (const ConnError& e) {
      throw InputError("cannot open database " + url + ": " + e.what());
    }
    if (!ids.insert(profile.db_id).second) throw InputError("database id " + profile.db_id + " given twice");
    if (db->parse_only()) o.parse_only_dialects.push_back(std::string(to_string(profile.dialect)));
    o.manifest_entries.push_back({{"db_id", profile.db_id},
                                  {"url", url},
                                  {"dialect", std::string(to_string(profile.dialect))},
                                  {"parse_only", db->parse_only()},
                                  {"schema_hash", content_hash(profile.ddl)}});
    o.sources.push_back({std::move(profile), url});
  }
  return o;
}

std::vector<std::string> run_flags(const OpenedSources& src, LlmClient& llm, const PipelineConfig& cfg) {
  std::set<std::string> flags;
  if (llm.embedder().is_fallback()) flags.insert("fallback-embedder");
  for (const auto& d : src.parse_only_dialects) flags.insert("parse-only:" + d);
  if (cfg.generator.provider == "mock") flags.insert("mock-generator");
  if (cfg.judge.provider == "mock") flags.insert("mock-judge");
  if (cfg.generator.id() == cfg.judge.id()) flags.insert("same-judge");
  return {flags.begin(), flags.end()};
}

struct GenerateOutcome {
  int code = kOk;
  std::size_t accepted = 0;
  std::size_t attempts = 0;
};

// Output directory layout.
struct RunFiles {
  fs::path dataset, quality_log, manifest, report;
  explicit RunFiles(const fs::path& dir)
      : dataset(dir / "dataset.jsonl"),
        quality_log(dir / "quality_log.jsonl"),
        manifest(dir / "manifest.json"),
        report(dir / "report.json") {}
};

GenerateOutcome generate(Context& ctx, const GenerateArgs& a, std::vector<std::string> extra_flags = {}) {
  const PipelineConfig& cfg = ctx.cfg;
  const std::size_t beta = a.beta.value_or(cfg.beta);
  const std::size_t max_attempts =
      a.max_attempts.value_or(cfg.max_generation_attempts ? cfg.max_generation_attempts
                                                          : default_generation_attempts(beta));
  if (a.dbs.empty()) throw InputError("at least one --db is required");
  const RunFiles files(a.out);

  std::string pool_text = read_text(a.pool);
  TemplatePool pool;
  try {
    pool = TemplatePool::from_jsonl(pool_text);
  } catch (const std::exception& e) {
    throw InputError(std::string("cannot load template pool: ") + e.what());
  }
  if (pool.empty()) throw InputError("template pool " + a.pool + " is empty");

  auto llm = make_llm(ctx);
  OpenedSources src = open_sources(a.dbs);
  for (const auto& s : src.sources) {
    if (s.profile.dialect != pool.dialect()) {
      throw InputError("database " + s.profile.db_id + " is " + std::string(display_name(s.profile.dialect)) +
                       " but the template pool is " + std::string(display_name(pool.dialect())));
    }
  }
  std::vector<std::string> flags = run_flags(src, *llm, cfg);
  for (auto& f : extra_flags) flags.push_back(std::move(f));

  // Everything that determines the generated data; a checkpoint may only be
  // resumed under the same fingerprint. beta and the attempt budget may change.
  json identity = cfg.to_json();
  identity["pipeline"].erase("beta");
  identity["pipeline"].erase("max_generation_attempts");
  identity["pipeline"].erase("workers");
  identity["pipeline"].erase("theta");
  identity["pipeline"].erase("max_expansion_attempts");
  identity["pool_hash"] = content_hash(pool_text);
  identity["databases"] = src.manifest_entries;
  identity["prompts"] = prompt_hashes();
  const std::string fingerprint = content_hash(identity.dump());

  GenerationState start;
  std::size_t quality_lines = 0;
  if (a.resume) {
    if (!fs::exists(files.manifest)) throw InputError("nothing to resume: " + files.manifest.string() + " not found");
    json m;
    try {
      m = json::parse(read_text(files.manifest));
    } catch (const json::exception& e) {
      throw InputError("cannot read " + files.manifest.string() + ": " + e.what());
    }
    if (m.value("fingerprint", "") != fingerprint) {
      throw InputError("cannot resume: the configuration, template pool or databases differ from the checkpointed run");
    }
    std::vector<CandidatePair> pairs;
    try {
      pairs = fs::exists(files.dataset) ? load_dataset(files.dataset) : std::vector<CandidatePair>{};
      start = GenerationState::from_checkpoint(m.at("checkpoint"), std::move(pairs));
    } catch (const std::exception& e) {
      throw InputError("cannot resume from " + a.out + ": " + e.what());
    }
    quality_lines = m.at("checkpoint").value("quality_log_lines", std::size_t{0});
    // Drop anything written after the last checkpoint.
    std::string dataset_text;
    for (const auto& p : start.accepted) dataset_text += p.to_json() + "\n";
    write_text(files.dataset, dataset_text);
    std::string qtext = fs::exists(files.quality_log) ? read_text(files.quality_log) : "";
    std::size_t pos = 0;
    for (std::size_t i = 0; i < quality_lines; ++i) {
      std::size_t nl = qtext.find('\n', pos);
      if (nl == std::string::npos) throw InputError("quality log is shorter than the checkpoint records");
      pos = nl + 1;
    }
    write_text(files.quality_log, qtext.substr(0, pos));
    ctx.log() << "resuming after " << start.attempts << " attempts with " << start.accepted.size()
              << " accepted pairs\n";
  } else {
    write_text(files.dataset, "");
    write_text(files.quality_log, "");
  }

  auto manifest = [&](const GenerationState& st, const std::string& status) {
    json checkpoint = st.checkpoint_json();
    checkpoint["quality_log_lines"] = quality_lines;
    json funnel = json::array();
    for (const auto& f : st.funnel) {
      funnel.push_back({{"stage", f.name}, {"attempted", f.attempted}, {"failed", f.failed},
                        {"passed", f.attempted - f.failed}});
    }
    json config = cfg.to_json();
    config["pipeline"]["beta"] = beta;
    config["pipeline"]["max_generation_attempts"] = max_attempts;
    json m{{"tool", {{"name", "sqlgen"}, {"version", kVersion}}},
           {"status", status},
           {"fingerprint", fingerprint},
           {"config", config},
           {"model_ids",
            {{"generator", llm->generator().id()}, {"judge", llm->judge().id()}, {"embedder", llm->embedder().id()}}},
           {"inputs",
            {{"template_pool", {{"path", display_path(a.pool, a.out)}, {"size", pool.size()}, {"hash", content_hash(pool_text)}}},
             {"databases", src.manifest_entries}}},
           {"prompts", prompt_hashes()},
           {"checkpoint", checkpoint},
           {"funnel", funnel},
           {"accepted", st.accepted.size()},
           {"empty_results", st.empty_results},
           {"flags", flags},
           {"outputs",
            {{"dataset", files.dataset.filename().string()},
             {"quality_log", files.quality_log.filename().string()},
             {"report", files.report.filename().string()}}}};
    write_text(files.manifest, m.dump(2) + "\n");
  };

  std::ofstream dataset_out(files.dataset, std::ios::binary | std::ios::app);
  std::ofstream quality_out(files.quality_log, std::ios::binary | std::ios::app);
  if (!dataset_out || !quality_out) throw InputError("cannot write to " + a.out);

  GenerationOptions opt;
  opt.beta = beta;
  opt.max_attempts = max_attempts;
  opt.workers = cfg.workers;
  opt.seed = cfg.seed;
  opt.filters = cfg.filters;
  opt.stop = &g_stop;
  GenerationCallbacks cb;
  cb.on_accept = [&](const CandidatePair& p) { dataset_out << p.to_json() << "\n"; };
  cb.on_quality = [&](const std::string& line) {
    quality_out << line << "\n";
    ++quality_lines;
  };
  cb.on_checkpoint = [&](const GenerationState& st) {
    dataset_out.flush();
    quality_out.flush();
    manifest(st, "running");
  };

  const std::size_t attempts_before = start.attempts;
  const std::size_t provider_errors_before = start.provider_errors;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  GenerationReport rep;
  rep = generate_dataset(pool, src.sources, *llm, opt, std::move(start), cb);
  std::signal(SIGINT, SIG_DFL);
  std::signal(SIGTERM, SIG_DFL);
  dataset_out.close();
  quality_out.close();

  const GenerationState& st = rep.state;
  GenerateOutcome outcome;
  outcome.accepted = st.accepted.size();
  outcome.attempts = st.attempts;
  std::string status = "complete";
  if (rep.stopped) {
    status = "interrupted";
    outcome.code = kInterrupted;
  } else if (!rep.reached_target) {
    const std::size_t made = st.attempts - attempts_before;
    if (made > 0 && st.provider_errors - provider_errors_before == made) {
      status = "provider_failure";
      outcome.code = kProviderFailure;
    } else {
      status = "budget_exhausted";
      outcome.code = kBudgetExhausted;
    }
  }
  manifest(st, status);
  DatasetStats stats = compute_stats(st.accepted, KeywordCatalog::builtin(), st.funnel, flags);
  write_text(files.report, emit_report(stats, ReportFormat::kJson));

  ctx.log() << "generation: " << st.accepted.size() << " of " << beta << " pairs in " << st.attempts
            << " attempts -> " << files.dataset.string() << "\n";
  if (outcome.code == kInterrupted) {
    std::cerr << "interrupted; resume with --resume\n";
  } else if (outcome.code == kProviderFailure) {
    std::cerr << "error: every attempt failed at the model provider\n";
  } else if (outcome.code == kBudgetExhausted) {
    std::cerr << "error: attempt budget of " << max_attempts << " exhausted with " << st.accepted.size() << " of "
              << beta << " pairs\n";
  }
  return outcome;
}

// ---- stats ---------------------------------------------------------------------------

struct StatsArgs {
  std::string dataset;
  std::string manifest;  // default: manifest.json next to the dataset, when present
  std::string format = "text";
  std::string catalog;
  std::string out;
};

int stats(Context&, const StatsArgs& a) {
  std::vector<CandidatePair> pairs;
  try {
    pairs = parse_dataset(read_text(a.dataset));
  } catch (const DatasetFormatError& e) {
    std::cerr << "error: " << a.dataset << ": malformed pair at " << e.what() << "\n";
    return kInputError;
  }
  KeywordCatalog catalog = KeywordCatalog::builtin();
  if (!a.catalog.empty()) {
    try {
      catalog = KeywordCatalog::load(a.catalog);
    } catch (const std::exception& e) {
      throw InputError(std::string("cannot load keyword catalog: ") + e.what());
    }
  }
  fs::path manifest_path = a.manifest;
  if (manifest_path.empty()) {
    fs::path sibling = fs::path(a.dataset).parent_path() / "manifest.json";
    if (fs::exists(sibling)) manifest_path = sibling;
  }
  std::vector<FunnelStage> funnel;
  std::vector<std::string> flags;
  if (!manifest_path.empty()) {
    try {
      json m = json::parse(read_text(manifest_path));
      for (const auto& f : m.at("funnel")) {
        funnel.push_back({f.at("stage").get<std::string>(), f.at("attempted").get<std::size_t>(),
                          f.at("failed").get<std::size_t>()});
      }
      flags = m.value("flags", std::vector<std::string>{});
    } catch (const json::exception& e) {
      throw InputError("cannot read manifest " + manifest_path.string() + ": " + e.what());
    }
  }
  ReportFormat fmt;
  if (a.format == "json") {
    fmt = ReportFormat::kJson;
  } else if (a.format == "text") {
    fmt = ReportFormat::kText;
  } else {
    throw InputError("--format must be json or text");
  }
  std::string report = emit_report(compute_stats(pairs, catalog, funnel, flags), fmt);
  if (a.out.empty()) {
    std::cout << report;
  } else {
    write_text(a.out, report);
  }
  return kOk;
}

// ---- icl -------------------------------------------------------------------------------

struct IclArgs {
  std::string dataset;
  std::string question;
  std::optional<std::size_t> k;
  std::string db;
  std::string index;
};

int icl(Context& ctx, const IclArgs& a) {
  const std::size_t k = a.k.value_or(ctx.cfg.icl_k);
  if (k == 0) throw InputError("k must be at least 1");
  if (util::trim(a.question).empty()) throw InputError("--question is empty");
  std::vector<CandidatePair> pairs;
  try {
    pairs = parse_dataset(read_text(a.dataset));
  } catch (const DatasetFormatError& e) {
    throw InputError(a.dataset + ":" + std::to_string(e.line()) + ": malformed pair");
  }
  if (pairs.empty()) throw InputError("dataset " + a.dataset + " is empty");
  if (k > pairs.size()) {
    throw InputError("k = " + std::to_string(k) + " exceeds the pool size " + std::to_string(pairs.size()));
  }
  std::unique_ptr<Database> db;
  DatabaseProfile profile;
  try {
    db = open_database(a.db);
    std::mt19937_64 rng(ctx.cfg.seed);
    profile = with_sample_rows(db->introspect(), *db, rng);
  } catch (const ConnError& e) {
    throw InputError("cannot open database " + a.db + ": " + e.what());
  }
  auto embedder = make_embedder(ctx.cfg.embedder,
                                ctx.cfg.embedder.provider == "openai" ? make_http_transport() : nullptr);
  IclIndex index;
  if (!a.index.empty() && fs::exists(a.index)) {
    index = IclIndex::from_jsonl(read_text(a.index));
    if (index.size() != pairs.size()) throw InputError("index " + a.index + " does not match the dataset");
  } else {
    index = build_icl_index(pairs, *embedder);
    if (!a.index.empty()) write_text(a.index, index.to_jsonl());
  }
  std::vector<IclHit> hits = select_icl(a.question, index, k, *embedder);
  std::map<std::string, const CandidatePair*> by_id;
  for (const auto& p : pairs) by_id.emplace(p.id, &p);
  std::vector<CandidatePair> shots;
  for (const auto& h : hits) shots.push_back(*by_id.at(h.pair_id));
  std::cout << render_icl_prompt(a.question, shots, profile) << "\n";
  for (std::size_t i = 0; i < hits.size(); ++i) {
    ctx.log() << "shot " << (i + 1) << " " << hits[i].pair_id << " " << hits[i].score << "\n";
  }
  return kOk;
}

// ---- audit -------------------------------------------------------------------------------

struct AuditArgs {
  std::string dataset;
  std::vector<std::string> dbs;
};

int audit(Context& ctx, const AuditArgs& a) {
  std::vector<CandidatePair> pairs;
  try {
    pairs = parse_dataset(read_text(a.dataset));
  } catch (const DatasetFormatError& e) {
    throw InputError(a.dataset + ":" + std::to_string(e.line()) + ": malformed pair");
  }
  std::map<std::string, std::unique_ptr<Database>> dbs;
  for (const auto& url : a.dbs) {
    try {
      auto db = open_database(url);
      std::string id = db->db_id();
      dbs[id] = std::move(db);
    } catch (const ConnError& e) {
      throw InputError("cannot open database " + url + ": " + e.what());
    }
  }
  std::size_t failed = 0, validated_only = 0;
  for (const auto& p : pairs) {
    auto it = dbs.find(p.db_id);
    if (it == dbs.end()) {
      std::cout << "FAIL " << p.id << ": no database " << p.db_id << "\n";
      ++failed;
      continue;
    }
    if (it->second->dialect() != p.dialect) {
      std::cout << "FAIL " << p.id << ": database " << p.db_id << " is not " << display_name(p.dialect) << "\n";
      ++failed;
      continue;
    }
    try {
      ResultSet rs = execute(p.sql, *it->second, ctx.cfg.filters.timeout_ms, ctx.cfg.filters.row_limit);
      if (rs.parse_only) ++validated_only;
    } catch (const ExecError& e) {
      std::cout << "FAIL " << p.id << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
      ++failed;
    }
  }
  std::cout << "audited " << pairs.size() << " pairs: " << (pairs.size() - failed) << " ok, " << failed
            << " failed";
  if (validated_only) std::cout << " (" << validated_only << " only validated by a parse-only backend)";
  std::cout << "\n";
  return failed ? kAuditFailed : kOk;
}

// ---- run -----------------------------------------------------------------------------------

struct RunArgs {
  std::string corpus;
  std::string corpus_dialect = "sqlite";
  std::string tutorials;
  std::vector<std::string> dbs;
  std::optional<std::size_t> theta;
  std::optional<std::size_t> beta;
  std::string out;
  bool resume = false;
};

int run(Context& ctx, const RunArgs& a) {
  const fs::path dir(a.out);
  validate_roles(ctx.cfg.generator, ctx.cfg.judge, ctx.cfg.allow_same_judge, nullptr);
  fs::create_directories(dir);
  const fs::path seeds = dir / "seeds.jsonl", pool = dir / "pool.jsonl";
  std::vector<std::string> extra_flags;
  if (!a.resume || !fs::exists(pool)) {
    int code = extract_seeds(ctx, {a.corpus, a.corpus_dialect, seeds.string()});
    if (code != kOk) return code;
    ExpandArgs e;
    e.pool = seeds.string();
    e.tutorials = a.tutorials;
    e.theta = a.theta;
    e.out = pool.string();
    e.log = (dir / "expansion_log.jsonl").string();
    ExpandOutcome ex = expand(ctx, e);
    if (ex.code == kProviderFailure) return ex.code;
    if (ex.code == kBudgetExhausted) {
      std::cerr << "continuing with " << ex.pool_size << " templates\n";
    }
  }
  {
    // The flag is derived from the pool on disk so a resumed run reports it too.
    TemplatePool p = TemplatePool::load(pool);
    if (p.size() < a.theta.value_or(ctx.cfg.theta)) extra_flags.push_back("expansion-below-theta");
  }
  GenerateArgs g;
  g.pool = pool.string();
  g.dbs = a.dbs;
  g.beta = a.beta;
  g.out = a.out;
  g.resume = a.resume && fs::exists(dir / "manifest.json");
  GenerateOutcome gen = generate(ctx, g, extra_flags);
  StatsArgs s;
  s.dataset = (dir / "dataset.jsonl").string();
  s.manifest = (dir / "manifest.json").string();
  s.format = "text";
  s.out = (dir / "report.txt").string();
  stats(ctx, s);
  if (gen.code != kOk) return gen.code;
  for (const auto& f : extra_flags) {
    if (f == "expansion-below-theta") return kBudgetExhausted;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqlgen: synthetic text-to-SQL training data generation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  add_common_options(app, ctx.overrides);

  SeedArgs seed_args;
  auto* seeds_cmd = app.add_subcommand("extract-seeds", "Abstract a SQL corpus into a seed template pool");
  seeds_cmd->add_option("--corpus", seed_args.corpus, "Query corpus (one query per line, JSON Lines or JSON)")
      ->required();
  seeds_cmd->add_option("--corpus-dialect", seed_args.corpus_dialect, "Dialect of the corpus queries")
      ->capture_default_str();
  seeds_cmd->add_option("-o,--out", seed_args.out, "Output template pool (JSON Lines)")->required();

  ExpandArgs expand_args;
  auto* expand_cmd = app.add_subcommand("expand", "Grow a template pool with dialect tutorials");
  expand_cmd->add_option("--pool", expand_args.pool, "Input template pool")->required();
  expand_cmd->add_option("--tutorials", expand_args.tutorials, "Tutorial directory or cache file")->required();
  expand_cmd->add_option("--theta", expand_args.theta, "Target pool size");
  expand_cmd->add_option("--max-attempts", expand_args.max_attempts, "Attempt budget (default 10 x theta)");
  expand_cmd->add_option("-o,--out", expand_args.out, "Output pool (default: overwrite --pool)");
  expand_cmd->add_option("--log", expand_args.log, "Expansion log (default: expansion_log.jsonl beside the pool)");

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "Generate and filter question/SQL pairs");
  gen_cmd->add_option("--pool", gen_args.pool, "Template pool")->required();
  gen_cmd->add_option("--db", gen_args.dbs, "Database URL (repeatable)")->required();
  gen_cmd->add_option("--beta", gen_args.beta, "Target number of pairs");
  gen_cmd->add_option("--max-attempts", gen_args.max_attempts, "Attempt budget (default 10 x beta)");
  gen_cmd->add_option("-o,--out", gen_args.out, "Output directory")->required();
  gen_cmd->add_flag("--resume", gen_args.resume, "Continue from the checkpoint in the output directory");

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "Keyword and complexity statistics of a dataset");
  stats_cmd->add_option("--dataset", stats_args.dataset, "Dataset (JSON Lines)")->required();
  stats_cmd->add_option("--manifest", stats_args.manifest, "Run manifest (default: manifest.json beside the dataset)");
  stats_cmd->add_option("--format", stats_args.format, "json or text")->capture_default_str();
  stats_cmd->add_option("--catalog", stats_args.catalog, "Keyword catalog CSV (default: built-in)");
  stats_cmd->add_option("-o,--out", stats_args.out, "Write the report to a file instead of stdout");

  IclArgs icl_args;
  auto* icl_cmd = app.add_subcommand("icl", "Build a few-shot prompt from a synthetic pool");
  icl_cmd->add_option("--dataset", icl_args.dataset, "Synthetic pool (JSON Lines)")->required();
  icl_cmd->add_option("--question", icl_args.question, "Target question")->required();
  icl_cmd->add_option("-k,--k", icl_args.k, "Number of demonstrations");
  icl_cmd->add_option("--db", icl_args.db, "Database URL of the target question")->required();
  icl_cmd->add_option("--index", icl_args.index, "Embedding index file (loaded if present, else written)");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Seed extraction, expansion, generation and statistics in one go");
  run_cmd->add_option("--corpus", run_args.corpus, "Seed query corpus")->required();
  run_cmd->add_option("--corpus-dialect", run_args.corpus_dialect, "Dialect of the corpus queries")
      ->capture_default_str();
  run_cmd->add_option("--tutorials", run_args.tutorials, "Tutorial directory or cache file")->required();
  run_cmd->add_option("--db", run_args.dbs, "Database URL (repeatable)")->required();
  run_cmd->add_option("--theta", run_args.theta, "Target template pool size");
  run_cmd->add_option("--beta", run_args.beta, "Target number of pairs");
  run_cmd->add_option("-o,--out", run_args.out, "Output directory")->required();
  run_cmd->add_flag("--resume", run_args.resume, "Continue an interrupted run in the output directory");

  AuditArgs audit_args;
  auto* audit_cmd = app.add_subcommand("audit", "Re-execute every pair of a dataset");
  audit_cmd->add_option("--dataset", audit_args.dataset, "Dataset (JSON Lines)")->required();
  audit_cmd->add_option("--db", audit_args.dbs, "Database URL (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    ctx.cfg = resolve_config(ctx.overrides);
    if (*seeds_cmd) return extract_seeds(ctx, seed_args);
    if (*expand_cmd) return expand(ctx, expand_args).code;
    if (*gen_cmd) return generate(ctx, gen_args).code;
    if (*stats_cmd) return stats(ctx, stats_args);
    if (*icl_cmd) return icl(ctx, icl_args);
    if (*run_cmd) return run(ctx, run_args);
    if (*audit_cmd) return audit(ctx, audit_args);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kInputError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const LlmError& e) {
    std::cerr << "model provider failure (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kProviderFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
