#include "bridg/decision.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "bridg/errors.hpp"

namespace bridg {

std::string to_string(AggregationKind kind) {
  return kind == AggregationKind::polling ? "polling" : "prompting";
}

AggregationKind aggregation_kind_from_string(const std::string& s) {
  if (s == "polling") return AggregationKind::polling;
  if (s == "prompting") return AggregationKind::prompting;
  throw config_error("unknown aggregation kind '" + s + "'");
}

std::string aggregate_polling(const std::vector<std::string>& candidates, std::uint64_t seed) {
  if (candidates.empty()) throw usage_error("aggregate_polling over an empty candidate list");

  std::map<std::string, std::size_t> counts;
  for (const auto& c : candidates) ++counts[c];
  std::size_t max_count = 0;
  for (const auto& [t, n] : counts) max_count = std::max(max_count, n);

  if (max_count > 1) {
    // Modal result; ties between equally frequent candidates keep the
    // earliest one in bridge order.
    for (const auto& c : candidates) {
      if (counts[c] == max_count) return c;
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

std::string aggregate_prompting(const std::string& end, const std::vector<std::string>& candidates,
                                const std::string& translator, ModelGateway& gateway,
                                const TranslationPromptAssets& prompts,
                                const std::string& target_lang_code,
                                std::optional<std::int64_t> seed) {
  if (candidates.empty()) throw usage_error("aggregate_prompting over an empty candidate list");

  std::vector<GradualStep> examples;
  examples.reserve(candidates.size());
  for (const auto& c : candidates) examples.push_back({end, c});

  ChatRequest request;
  request.backend_id = translator;
  request.messages = translation_messages(prompts.render_system(target_lang_code), examples, end);
  request.sampling = gateway.profile(translator).default_sampling;
  request.seed = seed;
  return gateway.chat(request);
}

double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw usage_error("percentile of an empty sample");
  if (p <= 0.0 || p > 100.0) throw usage_error("percentile must lie in (0,100]");
  std::sort(values.begin(), values.end());
  std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  if (rank == 0) rank = 1;
  return values[rank - 1];
}

double compute_pre_threshold(const std::vector<std::pair<std::string, std::string>>& holdout,
                             const std::string& qe_backend, ModelGateway& gateway, double percentile) {
  if (holdout.empty()) throw usage_error("compute_pre_threshold over an empty holdout");
  std::vector<double> scores;
  scores.reserve(holdout.size());
  for (const auto& [source, translation] : holdout)
    scores.push_back(gateway.score_qe(qe_backend, source, translation).value);
  return nearest_rank_percentile(std::move(scores), percentile);
}

bool prefilter_keeps_zero_shot(const QeScore& zero_shot_qe, const FilterPolicy& policy) {
  if (zero_shot_qe.mqm_raw.has_value())
    throw usage_error("MQM-scale QE scores may not drive filtering");
  return policy.pre_tau.has_value() && zero_shot_qe.value >= *policy.pre_tau;
}

DecisionRecord apply_filters(DecisionRecord record, const FilterPolicy& policy,
                             const std::string& qe_backend, ModelGateway& gateway,
                             const std::string& end_source) {
  if (record.zero_shot.text.empty()) throw usage_error("apply_filters needs a zero-shot translation");
  if (record.zero_shot.qe.mqm_raw.has_value())
    throw usage_error("MQM-scale QE scores may not drive filtering");

  if (prefilter_keeps_zero_shot(record.zero_shot.qe, policy)) {
    record.prefiltered_out = true;
    record.bridges.clear();
    record.aggregate.reset();
    record.chosen = ChosenRoute::zero_shot;
    return record;
  }

  if (!record.aggregate) {
    record.chosen = ChosenRoute::zero_shot;
    return record;
  }

  if (record.aggregate->qe.scorer_id.empty())
    record.aggregate->qe = gateway.score_qe(qe_backend, end_source, record.aggregate->text);

  if (policy.post) {
    // Strict inequality: ties keep the zero-shot output.
    record.chosen = record.aggregate->qe.value > record.zero_shot.qe.value ? ChosenRoute::bridg
                                                                           : ChosenRoute::zero_shot;
  } else {
    record.chosen = ChosenRoute::bridg;
  }
  return record;
}

}  // namespace bridg
