#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sqlgen/db/database.hpp"
#include "sqlgen/generation/candidate.hpp"
#include "sqlgen/llm/client.hpp"

namespace sqlgen {

struct IclEntry {
  std::string pair_id;
  std::vector<double> vector;  // unit-norm question embedding
};

/// Question embeddings of a synthetic pool, in pool order. Immutable once built.
class IclIndex {
 public:
  IclIndex() = default;
  explicit IclIndex(std::vector<IclEntry> entries) : entries_(std::move(entries)) {}

  const std::vector<IclEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// JSON Lines, one {pair_id, vector} object per entry.
  std::string to_jsonl() const;
  static IclIndex from_jsonl(std::string_view text);

 private:
  std::vector<IclEntry> entries_;
};

class KTooLarge : public std::invalid_argument {
 public:
  KTooLarge(std::size_t k, std::size_t size)
      : std::invalid_argument("k = " + std::to_string(k) + " exceeds the index size " + std::to_string(size)) {}
};

/// Embeds every pair's question. Throws std::invalid_argument on an empty
/// pool; embedder errors (LlmError) propagate.
IclIndex build_icl_index(const std::vector<CandidatePair>& pairs, Embedder& embedder);

struct IclHit {
  std::string pair_id;
  double score = 0;
};

/// Exact top-k by cosine similarity, descending; ties broken by pair id
/// ascending. Throws KTooLarge when k exceeds the index size.
std::vector<IclHit> select_icl(const std::vector<double>& query, const IclIndex& index, std::size_t k);
std::vector<IclHit> select_icl(std::string_view question, const IclIndex& index, std::size_t k, Embedder& embedder);

/// Few-shot prompt: the schema, the demonstrations in the given order, then
/// the target question. Throws std::invalid_argument when `shots` is empty.
std::string render_icl_prompt(std::string_view question, const std::vector<CandidatePair>& shots,
                              const DatabaseProfile& profile);

}  // namespace sqlgen
