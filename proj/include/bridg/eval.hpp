#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bridg/config.hpp"
#include "bridg/core.hpp"
#include "bridg/orchestrator.hpp"

namespace bridg {

struct BaselineConfig {
  enum class Mode { zero_shot, k_shot };
  Mode mode = Mode::zero_shot;
  int k = 0;  // few-shot examples retrieved by SBERT similarity
};

// Runs the zero-shot or k-shot baseline over the corpus. k-shot retrieves
// the k most similar pool entries (which must carry gold translations) and
// feeds them as few-shot pairs; the baseline output is stored in each
// record's zero_shot slot.
RunReport run_baseline(const std::vector<SentencePair>& corpus, const BaselineConfig& cfg,
                       PipelineContext& ctx, const std::string& out_dir);

// Retrieval order used by the k-shot baseline (descending similarity,
// pool-order ties); exposed for tests.
std::vector<std::size_t> retrieve_most_similar(const std::vector<double>& end_embedding,
                                               const std::vector<PoolEntry>& pool, int k);

struct ProgressRecord {
  std::string bridge_id;
  std::vector<double> distances;   // d_i: bridge sentence i to the end sentence
  std::vector<double> progresses;  // d_{i-1} - d_i
  double average_progress = 0.0;
  std::optional<std::vector<double>> target_distances;  // to the gold embedding
  std::optional<double> target_average_progress;
};

struct ProgressSummary {
  std::int64_t bridge_count = 0;
  double mean_average_progress = 0.0;
  double stddev_average_progress = 0.0;
  std::optional<double> target_mean_average_progress;
  std::optional<double> target_stddev_average_progress;
};

// Pure arithmetic over a distance sequence; analyze_bridges builds on it.
ProgressRecord progress_from_distances(std::vector<double> distances);

// Embeds every bridge sentence and the end sentence, computes distances
// and progresses per bridge. When gold translations are supplied the same
// analysis runs on the target side against the gold embedding.
std::pair<std::vector<ProgressRecord>, ProgressSummary> analyze_bridges(
    const std::vector<GradualTrace>& traces, ModelGateway& gateway, const std::string& embedder,
    const std::vector<std::optional<std::string>>& golds = {});

// One CSV per bridge (index, sentence, v1..vd); returns the manifest of
// written files.
std::vector<std::string> export_trajectories(const std::vector<GradualTrace>& traces,
                                             ModelGateway& gateway, const std::string& embedder,
                                             const std::string& out_dir);

void to_json(json& j, const ProgressRecord& v);
void from_json(const json& j, ProgressRecord& v);
void to_json(json& j, const ProgressSummary& v);
void from_json(const json& j, ProgressSummary& v);

// Mean score per (method, scorer) over a run; scores are displayed x100.
// Methods: the zero-shot output and, when present, the chosen output.
struct ScoreTable {
  std::string lang_pair;
  std::vector<std::string> scorers;
  // rows: label -> scorer -> mean score (x100)
  std::vector<std::pair<std::string, std::map<std::string, double>>> rows;
};

ScoreTable score_report(const RunReport& report, const std::vector<std::string>& scorers,
                        const std::map<std::string, std::string>& source_by_id,
                        const std::map<std::string, std::string>& gold_by_id, ModelGateway& gateway,
                        const std::string& lang_pair, const std::string& label_prefix = "");

json score_table_to_json(const ScoreTable& table);
std::string score_table_to_tsv(const ScoreTable& table);

}  // namespace bridg
