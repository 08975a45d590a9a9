#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bridg/core.hpp"
#include "bridg/gateway.hpp"
#include "bridg/text_metrics.hpp"

namespace bridg {

enum class SelectionKind { sort, filter, tops };

// S = SBERT similarity (higher is closer), L = Levenshtein distance,
// T = tree edit distance (lower is closer).
enum class SelectionMetric { sbert, lev, ted };

struct SelectionStrategy {
  SelectionKind kind = SelectionKind::sort;
  std::vector<SelectionMetric> priority;  // ignored by Tops
  int filter_width = 10;                  // Filter only

  bool operator==(const SelectionStrategy&) const = default;
};

// Parses "Sort(S-T)", "Filter(L-T)", "Tops".
SelectionStrategy parse_strategy(const std::string& name);
std::string to_string(const SelectionStrategy& strategy);

struct SelectionConfig {
  SelectionStrategy strategy;
  int k = 3;
};

void validate(const SelectionConfig& cfg);

struct ScoredCandidate {
  PoolEntry entry;
  SimilarityVector sim;
  std::size_t pool_index = 0;
};

// Computes all three metrics for every pool entry against the end
// sentence. Pool embeddings are reused when present; entries without one
// need the embedder backend.
std::vector<ScoredCandidate> score_candidates(const std::string& end, const std::vector<PoolEntry>& pool,
                                              ModelGateway& gateway, const std::string& embedder,
                                              const TreeProvider& trees);
std::vector<ScoredCandidate> score_candidates(const std::string& end, const std::vector<PoolEntry>& pool,
                                              ModelGateway& gateway, const std::string& embedder);

// Selects k starts. Sort: total order over the priority metrics. Filter:
// top filter_width by SBERT, reordered by the remaining priority metrics.
// Tops: best-by-S, best-by-L, best-by-T in that order, substituting the
// next-best entry under a metric when its winner is already picked.
// Residual ties always fall back to pool order; rng_seed is reserved for
// strategies that need randomness (none of the built-ins do).
std::vector<PoolEntry> select_starts(const std::vector<ScoredCandidate>& scored,
                                     const SelectionConfig& cfg, std::uint64_t rng_seed);

// Index-returning variant used by tests and the bindings.
std::vector<std::size_t> select_start_indices(const std::vector<ScoredCandidate>& scored,
                                              const SelectionConfig& cfg, std::uint64_t rng_seed);

}  // namespace bridg
