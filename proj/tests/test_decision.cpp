#include <doctest.h>

#include <algorithm>
#include <random>

#include "bridg/decision.hpp"
#include "bridg/errors.hpp"
#include "testutil.hpp"

using namespace bridg;
using testutil::TempDir;
using testutil::qe;

TEST_CASE("polling returns the modal candidate") {
  CHECK(aggregate_polling({"t1", "t1", "t2"}, 0) == "t1");
  CHECK(aggregate_polling({"t2", "t1", "t1"}, 0) == "t1");
  CHECK(aggregate_polling({"only"}, 0) == "only");
  CHECK_THROWS_AS(aggregate_polling({}, 0), Error);
}

TEST_CASE("polling multiplicity of the winner is maximal") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> variant(0, 3);
  std::uniform_int_distribution<int> count(1, 9);
  for (int round = 0; round < 200; ++round) {
    std::vector<std::string> candidates;
    int n = count(rng);
    for (int i = 0; i < n; ++i) candidates.push_back("v" + std::to_string(variant(rng)));
    std::string winner = aggregate_polling(candidates, 1);
    CHECK(std::find(candidates.begin(), candidates.end(), winner) != candidates.end());
    auto mult = [&](const std::string& s) {
      return std::count(candidates.begin(), candidates.end(), s);
    };
    for (const auto& c : candidates) CHECK(mult(winner) >= mult(c));
  }
}

TEST_CASE("polling over all-unique candidates is a stable seeded choice") {
  std::vector<std::string> unique = {"a", "b", "c", "d"};
  std::string first = aggregate_polling(unique, 99);
  CHECK(aggregate_polling(unique, 99) == first);  // same seed, same pick
  CHECK(std::find(unique.begin(), unique.end(), first) != unique.end());

  // tie between two modes resolves to the earliest in bridge order
  CHECK(aggregate_polling({"t1", "t1", "t2", "t2"}, 123) == "t1");
  CHECK(aggregate_polling({"t2", "t2", "t1", "t1"}, 77) == "t2");
}

TEST_CASE("prompting feeds candidates as few-shot pairs and asks once more") {
  ModelGateway gw({testutil::chat_profile("tr", "mock://chat/echo-fewshot")});
  std::string out = aggregate_prompting("the end sentence", {"c1", "c2", "c3"}, "tr", gw,
                                        TranslationPromptAssets::builtin(), "ko", 5);
  // echo-fewshot sees exactly 3 example pairs before the query turn
  CHECK(out == "the end sentence#3");
  CHECK(gw.stats().network_calls("tr") == 1);

  // a model scripted to copy the sole example returns that candidate
  ModelGateway gw2({testutil::chat_profile("tr", "mock://chat/echo-fewshot")});
  CHECK(aggregate_prompting("end", {"sole"}, "tr", gw2, TranslationPromptAssets::builtin(), "ko", 5) ==
        "end#1");
  CHECK_THROWS_AS(
      aggregate_prompting("end", {}, "tr", gw, TranslationPromptAssets::builtin(), "ko", 5), Error);
}

TEST_CASE("nearest-rank percentile") {
  CHECK(nearest_rank_percentile({0.2, 0.4, 0.6, 0.8}, 50.0) == doctest::Approx(0.4));
  CHECK(nearest_rank_percentile({0.8, 0.2, 0.6, 0.4}, 50.0) == doctest::Approx(0.4));
  CHECK(nearest_rank_percentile({0.7, 0.7, 0.7}, 50.0) == doctest::Approx(0.7));
  CHECK(nearest_rank_percentile({0.2, 0.4, 0.6, 0.8}, 100.0) == doctest::Approx(0.8));
  CHECK(nearest_rank_percentile({0.2, 0.4, 0.6, 0.8}, 1.0) == doctest::Approx(0.2));
  CHECK_THROWS_AS(nearest_rank_percentile({}, 50.0), Error);
  CHECK_THROWS_AS(nearest_rank_percentile({0.5}, 0.0), Error);
  CHECK_THROWS_AS(nearest_rank_percentile({0.5}, 101.0), Error);
}

TEST_CASE("compute_pre_threshold scores the holdout and is permutation invariant") {
  TempDir dir;
  std::vector<std::pair<std::string, std::string>> holdout = {
      {"s1", "t1"}, {"s2", "t2"}, {"s3", "t3"}, {"s4", "t4"}};
  json scripts = {{"qe",
                   {{"rules", json::array({json{{"source", "s1"}, {"score", 0.2}},
                                           json{{"source", "s2"}, {"score", 0.4}},
                                           json{{"source", "s3"}, {"score", 0.6}},
                                           json{{"source", "s4"}, {"score", 0.8}}})}}}};
  testutil::write_file(dir.file("scripts.json"), scripts.dump());
  ModelGateway gw({testutil::qe_profile("qe", "mock://qe/table?file=" + dir.file("scripts.json"))});

  CHECK(compute_pre_threshold(holdout, "qe", gw, 50.0) == doctest::Approx(0.4));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(holdout.begin(), holdout.end(), rng);
    CHECK(compute_pre_threshold(holdout, "qe", gw, 50.0) == doctest::Approx(0.4));
  }
  CHECK_THROWS_AS(compute_pre_threshold({}, "qe", gw, 50.0), Error);
}

namespace {

DecisionRecord record_with(double zero_shot_qe, std::optional<std::string> aggregate_text) {
  DecisionRecord r;
  r.end_id = "c:1";
  r.zero_shot = {"zs translation", qe(zero_shot_qe)};
  if (aggregate_text) {
    GradualTrace trace;
    trace.bridge = {"s", "e", {"s", "e"}, BridgeOrigin::full};
    trace.steps = {{"s", "S"}, {"e", *aggregate_text}};
    trace.final_translation = *aggregate_text;
    trace.call_count = 2;
    r.bridges.push_back(trace);
    r.aggregate = ScoredText{*aggregate_text, QeScore{}};  // unscored
  }
  return r;
}

ModelGateway scored_gateway(const TempDir& dir, double aggregate_score) {
  json scripts = {{"qe", {{"default", aggregate_score}}}};
  testutil::write_file(dir.file("qe.json"), scripts.dump());
  return ModelGateway({testutil::qe_profile("qe", "mock://qe/table?file=" + dir.file("qe.json"))});
}

}  // namespace

TEST_CASE("pre-filter keeps confident zero-shot outputs and skips bridging") {
  TempDir dir;
  auto gw = scored_gateway(dir, 0.5);
  FilterPolicy policy;
  policy.pre_tau = 0.5;

  DecisionRecord kept = apply_filters(record_with(0.9, std::nullopt), policy, "qe", gw, "src");
  CHECK(kept.prefiltered_out);
  CHECK(kept.chosen == ChosenRoute::zero_shot);
  CHECK(kept.bridges.empty());
  CHECK(gw.stats().network_calls("qe") == 0);  // no aggregate scoring

  // boundary: qe == tau stays zero-shot (bridging only below tau)
  CHECK(apply_filters(record_with(0.5, std::nullopt), policy, "qe", gw, "src").prefiltered_out);
  CHECK(!apply_filters(record_with(0.49, std::nullopt), policy, "qe", gw, "src").prefiltered_out);
}

TEST_CASE("post-filter adopts the aggregate only when strictly better") {
  TempDir dir;
  FilterPolicy policy;
  policy.post = true;

  auto gw_hi = scored_gateway(dir, 0.9);
  DecisionRecord win = apply_filters(record_with(0.7, "agg"), policy, "qe", gw_hi, "src");
  CHECK(win.chosen == ChosenRoute::bridg);
  CHECK(win.aggregate->qe.value == doctest::Approx(0.9));

  auto gw_tie = scored_gateway(dir, 0.7);
  DecisionRecord tie = apply_filters(record_with(0.7, "agg"), policy, "qe", gw_tie, "src");
  CHECK(tie.chosen == ChosenRoute::zero_shot);  // ties keep zero-shot

  auto gw_lo = scored_gateway(dir, 0.4);
  CHECK(apply_filters(record_with(0.7, "agg"), policy, "qe", gw_lo, "src").chosen ==
        ChosenRoute::zero_shot);
}

TEST_CASE("with post-filtering off the aggregate wins whenever present") {
  TempDir dir;
  auto gw = scored_gateway(dir, 0.1);
  FilterPolicy policy;  // pre and post both off
  DecisionRecord r = apply_filters(record_with(0.9, "agg"), policy, "qe", gw, "src");
  CHECK(r.chosen == ChosenRoute::bridg);
  DecisionRecord no_agg = apply_filters(record_with(0.9, std::nullopt), policy, "qe", gw, "src");
  CHECK(no_agg.chosen == ChosenRoute::zero_shot);
}

TEST_CASE("MQM-scale scores cannot drive filtering") {
  TempDir dir;
  auto gw = scored_gateway(dir, 0.5);
  FilterPolicy policy;
  policy.pre_tau = 0.5;
  DecisionRecord r = record_with(0.9, std::nullopt);
  r.zero_shot.qe.mqm_raw = 3.0;
  CHECK_THROWS_AS(apply_filters(std::move(r), policy, "qe", gw, "src"), Error);
}
