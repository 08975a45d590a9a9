#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bridg/config.hpp"
#include "bridg/core.hpp"
#include "bridg/decision.hpp"
#include "bridg/gateway.hpp"
#include "bridg/prompts.hpp"

namespace bridg {

// Everything one run needs: resolved config, gateway over the configured
// backends, loaded pool, prompt assets, and the resolved filter policy.
struct PipelineContext {
  PipelineConfig cfg;
  std::shared_ptr<ModelGateway> gateway;
  std::vector<PoolEntry> pool;
  BridgingPromptAssets bridging_assets;
  TranslationPromptAssets translation_assets;
  FilterPolicy policy;

  // Builds the context: loads the pool and assets, opens the cache, and
  // resolves tau (explicit, or the configured percentile over holdout
  // zero-shot QE scores).
  static PipelineContext create(PipelineConfig cfg,
                                const std::optional<std::string>& cache_path = std::nullopt);
};

// One end sentence through the full pipeline: zero-shot + QE, pre-filter
// gate, start selection, bridging, gradual MT, aggregation, post-filter.
// Provider failures mark the record failed instead of throwing unless
// strict mode is on.
DecisionRecord translate_sentence(const SentencePair& end, PipelineContext& ctx);

// Maps translate_sentence over the corpus with bounded parallelism across
// end sentences. Records land in records.jsonl in corpus order regardless
// of completion order; already-persisted records are skipped on restart.
// Writes config.snapshot and summary.json into out_dir.
RunReport run_corpus(const std::vector<SentencePair>& corpus, PipelineContext& ctx,
                     const std::string& out_dir);

// Reads a persisted run back from its directory.
RunReport load_run(const std::string& run_dir);

// Per-stage mean/total/percentage table from a run report.
json cost_report(const RunReport& report);
std::string cost_report_text(const json& table);

// Derives the per-sentence RNG/chat seed from the run seed and sentence id.
std::int64_t sentence_seed(std::int64_t run_seed, const std::string& end_id);

// Shared run-directory plumbing (also used by the baseline harness).
struct RunWriter {
  RunWriter(const std::string& out_dir, const PipelineConfig& cfg);

  // Returns ids already persisted from an earlier interrupted run.
  const std::vector<DecisionRecord>& existing() const { return existing_; }
  void append(const DecisionRecord& record);
  void finish(const RunSummary& summary, const std::string& fingerprint, std::int64_t seed);

  std::string records_path;
  std::string summary_path;
  std::string snapshot_path;

 private:
  std::vector<DecisionRecord> existing_;
  std::unique_ptr<std::ofstream> out_;
};

}  // namespace bridg
