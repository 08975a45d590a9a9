#include "bridg/core.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bridg/errors.hpp"
#include "bridg/text.hpp"

namespace bridg {

const std::vector<std::string> kStageNames = {
    "zero_shot", "selection", "pre_filter", "bridging", "gradual_mt", "aggregation", "post_filter",
};

void validate(const Bridge& bridge) {
  if (bridge.sentences.empty()) throw usage_error("bridge has no sentences");
  if (bridge.sentences.front() != bridge.start)
    throw usage_error("bridge first sentence differs from start");
  if (bridge.sentences.back() != bridge.end)
    throw usage_error("bridge last sentence differs from end");
  if (bridge.start != bridge.end && bridge.sentences.size() < 2)
    throw usage_error("bridge of length 1 requires start == end");
}

void validate(const GradualTrace& trace) {
  validate(trace.bridge);
  if (trace.steps.size() != trace.bridge.sentences.size())
    throw usage_error("trace step count differs from bridge length");
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (trace.steps[i].source != trace.bridge.sentences[i])
      throw usage_error("trace step source differs from bridge sentence");
  }
  if (trace.final_translation != trace.steps.back().translation)
    throw usage_error("trace final differs from last step translation");
  if (trace.call_count != static_cast<std::int64_t>(trace.steps.size()))
    throw usage_error("trace call_count differs from step count");
}

void validate(const DecisionRecord& record) {
  if (record.prefiltered_out) {
    if (!record.bridges.empty()) throw usage_error("prefiltered record carries bridges");
    if (record.chosen != ChosenRoute::zero_shot)
      throw usage_error("prefiltered record must keep the zero-shot output");
  }
  if (record.chosen == ChosenRoute::bridg && !record.aggregate.has_value())
    throw usage_error("bridg route chosen without an aggregate");
  if (record.zero_shot.qe.value < 0.0 || record.zero_shot.qe.value > 1.0)
    throw usage_error("zero-shot QE outside [0,1]");
}

RunSummary summarize(const std::vector<DecisionRecord>& records, std::optional<double> pre_threshold,
                     std::optional<double> pre_threshold_percentile) {
  RunSummary s;
  s.corpus_size = static_cast<std::int64_t>(records.size());
  s.pre_threshold = pre_threshold;
  s.pre_threshold_percentile = pre_threshold_percentile;
  for (const auto& stage : kStageNames) s.stage_total_seconds[stage] = 0.0;
  double zero_sum = 0.0;
  double chosen_sum = 0.0;
  std::int64_t scored = 0;
  for (const auto& r : records) {
    if (r.failed) {
      ++s.failed_count;
      continue;
    }
    if (r.prefiltered_out) ++s.prefiltered_count;
    if (!r.bridges.empty()) ++s.bridged_count;
    if (r.chosen == ChosenRoute::bridg) ++s.selected_count;
    zero_sum += r.zero_shot.qe.value;
    chosen_sum += (r.chosen == ChosenRoute::bridg) ? r.aggregate->qe.value : r.zero_shot.qe.value;
    ++scored;
    for (const auto& [stage, seconds] : r.timings) s.stage_total_seconds[stage] += seconds;
  }
  if (scored > 0) {
    s.mean_zero_shot_qe = zero_sum / static_cast<double>(scored);
    s.mean_chosen_qe = chosen_sum / static_cast<double>(scored);
  }
  return s;
}

std::string to_string(BridgeOrigin origin) {
  return origin == BridgeOrigin::full ? "full" : "sampled";
}

BridgeOrigin bridge_origin_from_string(const std::string& s) {
  if (s == "full") return BridgeOrigin::full;
  if (s == "sampled") return BridgeOrigin::sampled;
  throw parse_error("unknown bridge origin '" + s + "'");
}

std::string to_string(ChosenRoute route) {
  return route == ChosenRoute::zero_shot ? "zero_shot" : "bridg";
}

ChosenRoute chosen_route_from_string(const std::string& s) {
  if (s == "zero_shot") return ChosenRoute::zero_shot;
  if (s == "bridg") return ChosenRoute::bridg;
  throw parse_error("unknown chosen route '" + s + "'");
}

void to_json(json& j, const LangPair& v) { j = json{{"source", v.source}, {"target", v.target}}; }

void from_json(const json& j, LangPair& v) {
  j.at("source").get_to(v.source);
  j.at("target").get_to(v.target);
}

void to_json(json& j, const SentencePair& v) {
  j = json{{"id", v.id}, {"source", v.source}, {"lang_pair", v.lang_pair}};
  if (v.gold) j["gold"] = *v.gold;
}

void from_json(const json& j, SentencePair& v) {
  j.at("id").get_to(v.id);
  j.at("source").get_to(v.source);
  j.at("lang_pair").get_to(v.lang_pair);
  if (j.contains("gold") && !j.at("gold").is_null()) v.gold = j.at("gold").get<std::string>();
  else v.gold.reset();
}

void to_json(json& j, const QeScore& v) {
  j = json{{"value", v.value}, {"scorer_id", v.scorer_id}, {"reference_based", v.reference_based}};
  if (v.mqm_raw) j["mqm_raw"] = *v.mqm_raw;
}

void from_json(const json& j, QeScore& v) {
  j.at("value").get_to(v.value);
  j.at("scorer_id").get_to(v.scorer_id);
  j.at("reference_based").get_to(v.reference_based);
  if (j.contains("mqm_raw") && !j.at("mqm_raw").is_null()) v.mqm_raw = j.at("mqm_raw").get<double>();
  else v.mqm_raw.reset();
  if (v.value < 0.0 || v.value > 1.0) throw parse_error("QE value outside [0,1]");
}

void to_json(json& j, const PoolEntry& v) {
  j = json{{"pair", v.pair}, {"representative_translation", v.representative_translation}, {"qe", v.qe}};
  if (v.embedding) j["embedding"] = *v.embedding;
}

void from_json(const json& j, PoolEntry& v) {
  j.at("pair").get_to(v.pair);
  j.at("representative_translation").get_to(v.representative_translation);
  j.at("qe").get_to(v.qe);
  if (j.contains("embedding") && !j.at("embedding").is_null())
    v.embedding = j.at("embedding").get<std::vector<double>>();
  else v.embedding.reset();
}

void to_json(json& j, const Bridge& v) {
  j = json{{"start", v.start}, {"end", v.end}, {"sentences", v.sentences}, {"origin", to_string(v.origin)}};
}

void from_json(const json& j, Bridge& v) {
  j.at("start").get_to(v.start);
  j.at("end").get_to(v.end);
  j.at("sentences").get_to(v.sentences);
  v.origin = bridge_origin_from_string(j.at("origin").get<std::string>());
}

void to_json(json& j, const GradualStep& v) {
  j = json{{"source", v.source}, {"translation", v.translation}};
}

void from_json(const json& j, GradualStep& v) {
  j.at("source").get_to(v.source);
  j.at("translation").get_to(v.translation);
}

void to_json(json& j, const GradualTrace& v) {
  j = json{{"bridge", v.bridge},
           {"steps", v.steps},
           {"final", v.final_translation},
           {"call_count", v.call_count}};
}

void from_json(const json& j, GradualTrace& v) {
  j.at("bridge").get_to(v.bridge);
  j.at("steps").get_to(v.steps);
  j.at("final").get_to(v.final_translation);
  j.at("call_count").get_to(v.call_count);
}

void to_json(json& j, const ScoredText& v) { j = json{{"text", v.text}, {"qe", v.qe}}; }

void from_json(const json& j, ScoredText& v) {
  j.at("text").get_to(v.text);
  j.at("qe").get_to(v.qe);
}

void to_json(json& j, const DecisionRecord& v) {
  j = json{{"end_id", v.end_id},
           {"zero_shot", v.zero_shot},
           {"bridges", v.bridges},
           {"chosen", to_string(v.chosen)},
           {"prefiltered_out", v.prefiltered_out},
           {"timings", v.timings},
           {"failed", v.failed},
           {"error", v.error}};
  j["aggregate"] = v.aggregate ? json(*v.aggregate) : json(nullptr);
}

void from_json(const json& j, DecisionRecord& v) {
  j.at("end_id").get_to(v.end_id);
  j.at("zero_shot").get_to(v.zero_shot);
  j.at("bridges").get_to(v.bridges);
  if (j.contains("aggregate") && !j.at("aggregate").is_null())
    v.aggregate = j.at("aggregate").get<ScoredText>();
  else v.aggregate.reset();
  v.chosen = chosen_route_from_string(j.at("chosen").get<std::string>());
  j.at("prefiltered_out").get_to(v.prefiltered_out);
  j.at("timings").get_to(v.timings);
  j.at("failed").get_to(v.failed);
  j.at("error").get_to(v.error);
}

void to_json(json& j, const RunSummary& v) {
  j = json{{"corpus_size", v.corpus_size},
           {"bridged_count", v.bridged_count},
           {"selected_count", v.selected_count},
           {"prefiltered_count", v.prefiltered_count},
           {"failed_count", v.failed_count},
           {"mean_zero_shot_qe", v.mean_zero_shot_qe},
           {"mean_chosen_qe", v.mean_chosen_qe},
           {"stage_total_seconds", v.stage_total_seconds}};
  j["pre_threshold"] = v.pre_threshold ? json(*v.pre_threshold) : json(nullptr);
  j["pre_threshold_percentile"] =
      v.pre_threshold_percentile ? json(*v.pre_threshold_percentile) : json(nullptr);
}

void from_json(const json& j, RunSummary& v) {
  j.at("corpus_size").get_to(v.corpus_size);
  j.at("bridged_count").get_to(v.bridged_count);
  j.at("selected_count").get_to(v.selected_count);
  j.at("prefiltered_count").get_to(v.prefiltered_count);
  j.at("failed_count").get_to(v.failed_count);
  j.at("mean_zero_shot_qe").get_to(v.mean_zero_shot_qe);
  j.at("mean_chosen_qe").get_to(v.mean_chosen_qe);
  j.at("stage_total_seconds").get_to(v.stage_total_seconds);
  if (j.contains("pre_threshold") && !j.at("pre_threshold").is_null())
    v.pre_threshold = j.at("pre_threshold").get<double>();
  else v.pre_threshold.reset();
  if (j.contains("pre_threshold_percentile") && !j.at("pre_threshold_percentile").is_null())
    v.pre_threshold_percentile = j.at("pre_threshold_percentile").get<double>();
  else v.pre_threshold_percentile.reset();
}

void to_json(json& j, const RunReport& v) {
  j = json{{"per_sentence", v.per_sentence},
           {"summary", v.summary},
           {"config_fingerprint", v.config_fingerprint},
           {"seed", v.seed}};
}

void from_json(const json& j, RunReport& v) {
  j.at("per_sentence").get_to(v.per_sentence);
  j.at("summary").get_to(v.summary);
  j.at("config_fingerprint").get_to(v.config_fingerprint);
  j.at("seed").get_to(v.seed);
}

std::vector<SentencePair> load_corpus(const std::string& path, const LangPair& lang_pair,
                                      const std::optional<std::string>& gold_path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open corpus file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto lines = text::split_lines(buf.str());

  std::vector<std::string> golds;
  if (gold_path) {
    std::ifstream gin(*gold_path);
    if (!gin) throw io_error("cannot open gold file '" + *gold_path + "'");
    std::stringstream gbuf;
    gbuf << gin.rdbuf();
    golds = text::split_lines(gbuf.str());
    if (golds.size() < lines.size())
      throw parse_error("gold file '" + *gold_path + "' has fewer lines than the corpus");
  }

  std::string name = std::filesystem::path(path).stem().string();
  std::vector<SentencePair> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string source = text::normalize(lines[i]);
    if (source.empty()) continue;  // blank lines keep the numbering but produce no pair
    SentencePair pair;
    pair.id = name + ":" + std::to_string(i + 1);
    pair.source = std::move(source);
    pair.lang_pair = lang_pair;
    if (gold_path) {
      std::string gold = text::normalize(golds[i]);
      if (!gold.empty()) pair.gold = std::move(gold);
    }
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace bridg
