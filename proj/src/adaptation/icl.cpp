#include "sqlgen/adaptation/icl.hpp"

#include <algorithm>

#include "json.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

using nlohmann::json;

std::string IclIndex::to_jsonl() const {
  std::string out;
  for (const auto& e : entries_) out += json{{"pair_id", e.pair_id}, {"vector", e.vector}}.dump() + "\n";
  return out;
}

IclIndex IclIndex::from_jsonl(std::string_view text) {
  std::vector<IclEntry> entries;
  std::size_t line_no = 0;
  for (const auto& line : util::split(text, '\n')) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      entries.push_back({j.at("pair_id").get<std::string>(), j.at("vector").get<std::vector<double>>()});
    } catch (const json::exception& e) {
      throw std::invalid_argument("index line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return IclIndex(std::move(entries));
}

IclIndex build_icl_index(const std::vector<CandidatePair>& pairs, Embedder& embedder) {
  if (pairs.empty()) throw std::invalid_argument("cannot build an ICL index from an empty pool");
  std::vector<IclEntry> entries;
  entries.reserve(pairs.size());
  for (const auto& p : pairs) entries.push_back({p.id, embedder.embed(p.question)});
  return IclIndex(std::move(entries));
}

std::vector<IclHit> select_icl(const std::vector<double>& query, const IclIndex& index, std::size_t k) {
  if (k > index.size()) throw KTooLarge(k, index.size());
  std::vector<IclHit> hits;
  hits.reserve(index.size());
  for (const auto& e : index.entries()) hits.push_back({e.pair_id, cosine(query, e.vector)});
  auto better = [](const IclHit& a, const IclHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.pair_id < b.pair_id;
  };
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), better);
  hits.resize(k);
  return hits;
}

std::vector<IclHit> select_icl(std::string_view question, const IclIndex& index, std::size_t k, Embedder& embedder) {
  if (k > index.size()) throw KTooLarge(k, index.size());
  return select_icl(embedder.embed(question), index, k);
}

std::string render_icl_prompt(std::string_view question, const std::vector<CandidatePair>& shots,
                              const DatabaseProfile& profile) {
  if (shots.empty()) throw std::invalid_argument("an ICL prompt needs at least one demonstration");
  const std::string dialect(display_name(profile.dialect));
  std::string out = "Database schema:\n" + render_schema_prompt(profile) + "\n";
  out += "Answer the last question with a single " + dialect +
         " SQL query, following the examples.\n\n";
  for (const auto& s : shots) out += "Question: " + s.question + "\nSQL: " + s.sql + "\n\n";
  out += "Question: " + std::string(question) + "\nSQL:";
  return out;
}

}  // namespace sqlgen
