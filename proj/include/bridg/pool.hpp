#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bridg/core.hpp"
#include "bridg/gateway.hpp"

namespace bridg {

struct TranslationPromptAssets;

struct PoolBuildConfig {
  int samples_per_sentence = 5;
  int pool_size = 100;
  std::string translator;
  std::string qe;
  std::string embedder;
  // Reference-based QE is only for the ablation harness and must be asked
  // for explicitly; the default path is reference-free.
  bool allow_reference_qe = false;
};

// Picks the representative translation among repeated samples: the modal
// translation when any exact duplicate exists (mode ties broken by higher
// mean QE, then first occurrence); otherwise the one whose QE is closest
// to the arithmetic mean (ties by first occurrence).
ScoredText pick_representative(const std::vector<ScoredText>& translations);

// Samples zero-shot translations for every source, scores them, selects
// representatives, keeps the top pool_size by QE (ties by corpus order),
// then embeds the kept sources.
std::vector<PoolEntry> build_pool(const std::vector<SentencePair>& dev_corpus, const PoolBuildConfig& cfg,
                                  ModelGateway& gateway, const TranslationPromptAssets& prompts,
                                  std::int64_t seed);

void save_pool(const std::vector<PoolEntry>& entries, const std::string& path);
std::vector<PoolEntry> load_pool(const std::string& path);

}  // namespace bridg
