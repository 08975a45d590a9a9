#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace bridg {

using json = nlohmann::json;

struct LangPair {
  std::string source;  // e.g. "en"
  std::string target;  // e.g. "ko"

  bool operator==(const LangPair&) const = default;
};

// A source sentence with an optional gold translation; the atom of corpora
// and pools. Ids are "<corpus-name>:<line-number>" (1-based).
struct SentencePair {
  std::string id;
  std::string source;
  std::optional<std::string> gold;
  LangPair lang_pair;

  bool operator==(const SentencePair&) const = default;
};

// Normalized quality-estimation value. `value` is always in [0,1]; scorers
// with an MQM-style native scale keep their raw score in `mqm_raw` and are
// excluded from filtering decisions.
struct QeScore {
  double value = 0.0;
  std::string scorer_id;
  bool reference_based = false;
  std::optional<double> mqm_raw;

  bool operator==(const QeScore&) const = default;
};

struct PoolEntry {
  SentencePair pair;
  std::string representative_translation;
  QeScore qe;
  std::optional<std::vector<double>> embedding;

  bool operator==(const PoolEntry&) const = default;
};

enum class BridgeOrigin { full, sampled };

// Ordered sentence sequence from a start sentence to an end sentence.
struct Bridge {
  std::string start;
  std::string end;
  std::vector<std::string> sentences;
  BridgeOrigin origin = BridgeOrigin::full;

  std::size_t length() const { return sentences.size(); }
  bool operator==(const Bridge&) const = default;
};

// Throws usage_error when the bridge invariants do not hold.
void validate(const Bridge& bridge);

struct GradualStep {
  std::string source;
  std::string translation;

  bool operator==(const GradualStep&) const = default;
};

// Per-step record of one Gradual MT pass over a bridge.
struct GradualTrace {
  Bridge bridge;
  std::vector<GradualStep> steps;
  std::string final_translation;
  std::int64_t call_count = 0;

  bool operator==(const GradualTrace&) const = default;
};

void validate(const GradualTrace& trace);

struct ScoredText {
  std::string text;
  QeScore qe;

  bool operator==(const ScoredText&) const = default;
};

enum class ChosenRoute { zero_shot, bridg };

// Stage names used in DecisionRecord timings; every record carries all of
// them so that serialized records have a fixed shape.
extern const std::vector<std::string> kStageNames;

struct DecisionRecord {
  std::string end_id;
  ScoredText zero_shot;
  std::vector<GradualTrace> bridges;
  std::optional<ScoredText> aggregate;
  ChosenRoute chosen = ChosenRoute::zero_shot;
  bool prefiltered_out = false;
  std::map<std::string, double> timings;
  bool failed = false;
  std::string error;

  bool operator==(const DecisionRecord&) const = default;
};

void validate(const DecisionRecord& record);

struct RunSummary {
  std::int64_t corpus_size = 0;
  std::int64_t bridged_count = 0;      // records where bridging actually ran
  std::int64_t selected_count = 0;     // records where the bridg output won
  std::int64_t prefiltered_count = 0;
  std::int64_t failed_count = 0;
  double mean_zero_shot_qe = 0.0;
  double mean_chosen_qe = 0.0;
  std::map<std::string, double> stage_total_seconds;
  std::optional<double> pre_threshold;
  std::optional<double> pre_threshold_percentile;

  bool operator==(const RunSummary&) const = default;
};

struct RunReport {
  std::vector<DecisionRecord> per_sentence;
  RunSummary summary;
  std::string config_fingerprint;
  std::int64_t seed = 0;

  bool operator==(const RunReport&) const = default;
};

// Recomputes the summary counts/means/timing totals from the records.
RunSummary summarize(const std::vector<DecisionRecord>& records,
                     std::optional<double> pre_threshold = std::nullopt,
                     std::optional<double> pre_threshold_percentile = std::nullopt);

// JSON serialization (nlohmann ADL hooks).
void to_json(json& j, const LangPair& v);
void from_json(const json& j, LangPair& v);
void to_json(json& j, const SentencePair& v);
void from_json(const json& j, SentencePair& v);
void to_json(json& j, const QeScore& v);
void from_json(const json& j, QeScore& v);
void to_json(json& j, const PoolEntry& v);
void from_json(const json& j, PoolEntry& v);
void to_json(json& j, const Bridge& v);
void from_json(const json& j, Bridge& v);
void to_json(json& j, const GradualStep& v);
void from_json(const json& j, GradualStep& v);
void to_json(json& j, const GradualTrace& v);
void from_json(const json& j, GradualTrace& v);
void to_json(json& j, const ScoredText& v);
void from_json(const json& j, ScoredText& v);
void to_json(json& j, const DecisionRecord& v);
void from_json(const json& j, DecisionRecord& v);
void to_json(json& j, const RunSummary& v);
void from_json(const json& j, RunSummary& v);
void to_json(json& j, const RunReport& v);
void from_json(const json& j, RunReport& v);

std::string to_string(BridgeOrigin origin);
BridgeOrigin bridge_origin_from_string(const std::string& s);
std::string to_string(ChosenRoute route);
ChosenRoute chosen_route_from_string(const std::string& s);

// Loads a line-per-sentence UTF-8 corpus. Ids are "<name>:<line>" with
// 1-based line numbers; blank lines are skipped but keep numbering. When a
// gold file is given it must be line-aligned with the corpus.
std::vector<SentencePair> load_corpus(const std::string& path, const LangPair& lang_pair,
                                      const std::optional<std::string>& gold_path = std::nullopt);

}  // namespace bridg
