#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bridg/core.hpp"
#include "bridg/gateway.hpp"
#include "bridg/prompts.hpp"

namespace bridg {

enum class AggregationKind { polling, prompting };

std::string to_string(AggregationKind kind);
AggregationKind aggregation_kind_from_string(const std::string& s);

struct FilterPolicy {
  std::optional<double> pre_tau;  // present iff pre-filtering is enabled
  bool post = false;
};

// Modal candidate by exact string equality; when every candidate is
// unique, a seeded uniform choice. Deterministic given the seed.
std::string aggregate_polling(const std::vector<std::string>& candidates, std::uint64_t seed);

// Feeds all candidates back as few-shot pairs (end -> candidate, in bridge
// order) and asks for the final translation of end.
std::string aggregate_prompting(const std::string& end, const std::vector<std::string>& candidates,
                                const std::string& translator, ModelGateway& gateway,
                                const TranslationPromptAssets& prompts,
                                const std::string& target_lang_code,
                                std::optional<std::int64_t> seed);

// Nearest-rank percentile of `values`; p in (0,100].
double nearest_rank_percentile(std::vector<double> values, double p);

// Scores every holdout (source, zero-shot translation) pair with the
// reference-free QE backend and returns the p-th percentile as tau.
double compute_pre_threshold(const std::vector<std::pair<std::string, std::string>>& holdout,
                             const std::string& qe_backend, ModelGateway& gateway, double percentile);

// True when the sentence clears the pre-filter gate and keeps its
// zero-shot translation (no bridging).
bool prefilter_keeps_zero_shot(const QeScore& zero_shot_qe, const FilterPolicy& policy);

// Applies pre and post filtering to an in-progress record whose zero-shot
// output is already scored. Scores the aggregate when needed. Performs no
// bridging itself.
DecisionRecord apply_filters(DecisionRecord record, const FilterPolicy& policy,
                             const std::string& qe_backend, ModelGateway& gateway,
                             const std::string& end_source);

}  // namespace bridg
