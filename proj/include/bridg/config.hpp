#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bridg/bridge_engine.hpp"
#include "bridg/decision.hpp"
#include "bridg/gateway.hpp"
#include "bridg/selection.hpp"

namespace bridg {

enum class TimingMode { wall, virtual_clock };

std::string to_string(TimingMode mode);
TimingMode timing_mode_from_string(const std::string& s);

struct FilterSettings {
  bool pre = false;
  std::optional<double> tau;             // explicit threshold
  std::optional<double> tau_percentile;  // computed from holdout at run start
  std::optional<std::string> holdout;    // (source-per-line) holdout corpus path
  bool post = false;
};

struct PoolSettings {
  int samples_per_sentence = 5;
  int pool_size = 100;
  std::string corpus;
  std::optional<std::string> gold;
  bool allow_reference_qe = false;
};

struct BaselineSettings {
  std::string mode = "zero_shot";  // zero_shot | k_shot
  int k = 0;
};

struct SweepSettings {
  std::vector<std::string> strategies;
  std::vector<std::int64_t> ks;
  std::vector<std::string> aggregations;
  std::vector<std::string> filters;  // all | pre | post | prepost
};

struct EvalSettings {
  std::vector<std::string> runs;
  std::vector<std::string> labels;
  std::vector<std::string> scorers;
  std::optional<std::string> gold;
};

struct AnalyzeSettings {
  std::string run;
  bool export_csv = false;
};

struct CostSettings {
  std::string run;
};

struct PipelineConfig {
  LangPair lang_pair{"en", "ko"};
  std::int64_t seed = 0;
  int concurrency = 1;
  bool strict = false;
  TimingMode timing_mode = TimingMode::wall;

  std::string pool_path;
  std::string corpus_path;
  std::optional<std::string> gold_path;
  std::optional<std::string> cache_path;   // default: <out>/cache.jsonl
  std::optional<std::string> assets_dir;   // built-in exemplars when unset

  SelectionConfig selection;
  GradualConfig gradual;  // translator/bridger copied from the role table
  AggregationKind aggregation = AggregationKind::prompting;
  FilterSettings filters;

  std::string translator;
  std::string bridger;
  std::string embedder;
  std::string qe;

  std::map<std::string, ProviderProfile> backends;

  PoolSettings pool;
  BaselineSettings baseline;
  SweepSettings sweep;
  EvalSettings evaluate;
  AnalyzeSettings analyze;
  CostSettings cost;
};

// Parses a TOML file and applies "--set key=value" overrides in order.
// Unknown keys are configuration errors.
PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
PipelineConfig config_from_tree(const json& tree);

// Canonical tree of the fully-resolved config; also the snapshot content.
json config_to_tree(const PipelineConfig& cfg);
std::string config_to_toml(const PipelineConfig& cfg);

// Stable content hash over the canonical serialization.
std::string fingerprint_config(const PipelineConfig& cfg);

// Checks that every referenced backend role resolves to a profile of the
// right kind, paths are non-empty where required, and filter settings are
// coherent.
void validate_pipeline(const PipelineConfig& cfg);

}  // namespace bridg
