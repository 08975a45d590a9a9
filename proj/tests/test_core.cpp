#include <doctest.h>

#include <random>

#include "bridg/core.hpp"
#include "bridg/errors.hpp"
#include "bridg/text.hpp"
#include "testutil.hpp"

using namespace bridg;
using bridg::testutil::TempDir;

namespace {

std::mt19937_64 rng(2024);

std::string rand_text() { return testutil::random_word(rng, 20, 26); }

QeScore rand_qe() {
  std::uniform_real_distribution<double> value(0.0, 1.0);
  return QeScore{value(rng), "scorer", rng() % 2 == 0, std::nullopt};
}

GradualTrace rand_trace() {
  std::uniform_int_distribution<int> len(1, 5);
  int n = len(rng);
  GradualTrace trace;
  trace.bridge.start = "s1";
  for (int i = 1; i <= n; ++i) trace.bridge.sentences.push_back("s" + std::to_string(i));
  trace.bridge.end = trace.bridge.sentences.back();
  trace.bridge.origin = rng() % 2 == 0 ? BridgeOrigin::full : BridgeOrigin::sampled;
  for (const auto& s : trace.bridge.sentences) trace.steps.push_back({s, rand_text()});
  trace.final_translation = trace.steps.back().translation;
  trace.call_count = n;
  return trace;
}

DecisionRecord rand_record(int i) {
  DecisionRecord r;
  r.end_id = "corpus:" + std::to_string(i);
  r.zero_shot = {rand_text(), rand_qe()};
  std::uniform_int_distribution<int> mode(0, 3);
  switch (mode(rng)) {
    case 0:
      r.prefiltered_out = true;
      r.chosen = ChosenRoute::zero_shot;
      break;
    case 1:
      r.bridges.push_back(rand_trace());
      r.aggregate = ScoredText{rand_text(), rand_qe()};
      r.chosen = ChosenRoute::bridg;
      break;
    case 2:
      r.bridges.push_back(rand_trace());
      r.aggregate = ScoredText{rand_text(), rand_qe()};
      r.chosen = ChosenRoute::zero_shot;
      break;
    default:
      r.failed = true;
      r.error = "scripted failure";
      break;
  }
  for (const auto& stage : kStageNames) r.timings[stage] = 0.25;
  return r;
}

template <typename T>
void check_roundtrip(const T& value) {
  json j = value;
  T back = j.get<T>();
  CHECK(back == value);
}

}  // namespace

TEST_CASE("serialization round-trips on randomized values") {
  for (int i = 0; i < 50; ++i) {
    check_roundtrip(QeScore{0.25, "s", true, std::nullopt});
    check_roundtrip(rand_qe());
    SentencePair pair{"c:1", rand_text() + "x", std::nullopt, {"en", "ko"}};
    check_roundtrip(pair);
    pair.gold = rand_text();
    check_roundtrip(pair);
    PoolEntry entry{pair, rand_text(), rand_qe(), std::vector<double>{0.5, -0.25}};
    check_roundtrip(entry);
    entry.embedding.reset();
    check_roundtrip(entry);
    check_roundtrip(rand_trace());
    check_roundtrip(rand_record(i));
  }
}

TEST_CASE("run report round-trip") {
  RunReport report;
  for (int i = 0; i < 10; ++i) report.per_sentence.push_back(rand_record(i));
  report.summary = summarize(report.per_sentence, 0.5, 50.0);
  report.config_fingerprint = "abc123";
  report.seed = 42;
  json j = report;
  CHECK(j.get<RunReport>() == report);
}

TEST_CASE("summary counts equal recomputation from records") {
  for (int round = 0; round < 20; ++round) {
    std::vector<DecisionRecord> records;
    std::uniform_int_distribution<int> n(0, 30);
    int count = n(rng);
    for (int i = 0; i < count; ++i) records.push_back(rand_record(i));

    RunSummary s = summarize(records);
    std::int64_t bridged = 0, selected = 0, prefiltered = 0, failed = 0;
    for (const auto& r : records) {
      if (r.failed) {
        ++failed;
        continue;
      }
      if (!r.bridges.empty()) ++bridged;
      if (r.chosen == ChosenRoute::bridg) ++selected;
      if (r.prefiltered_out) ++prefiltered;
    }
    CHECK(s.corpus_size == count);
    CHECK(s.bridged_count == bridged);
    CHECK(s.selected_count == selected);
    CHECK(s.prefiltered_count == prefiltered);
    CHECK(s.failed_count == failed);
    CHECK(s.selected_count <= s.bridged_count);
    CHECK(s.bridged_count <= s.corpus_size);
  }
}

TEST_CASE("bridge invariants") {
  Bridge b{"a", "c", {"a", "b", "c"}, BridgeOrigin::full};
  CHECK_NOTHROW(validate(b));
  CHECK_THROWS_AS(validate(Bridge{"a", "c", {}, BridgeOrigin::full}), Error);
  CHECK_THROWS_AS(validate(Bridge{"a", "c", {"x", "c"}, BridgeOrigin::full}), Error);
  CHECK_THROWS_AS(validate(Bridge{"a", "c", {"a", "x"}, BridgeOrigin::full}), Error);
  CHECK_THROWS_AS(validate(Bridge{"a", "c", {"a"}, BridgeOrigin::full}), Error);
  CHECK_NOTHROW(validate(Bridge{"a", "a", {"a"}, BridgeOrigin::full}));
}

TEST_CASE("decision record invariants") {
  DecisionRecord r;
  r.end_id = "c:1";
  r.zero_shot = {"t", testutil::qe(0.5)};
  r.prefiltered_out = true;
  r.chosen = ChosenRoute::zero_shot;
  CHECK_NOTHROW(validate(r));
  r.bridges.push_back(rand_trace());
  CHECK_THROWS_AS(validate(r), Error);
  r.bridges.clear();
  r.prefiltered_out = false;
  r.chosen = ChosenRoute::bridg;
  CHECK_THROWS_AS(validate(r), Error);  // bridg without aggregate
  r.aggregate = ScoredText{"agg", testutil::qe(0.9)};
  CHECK_NOTHROW(validate(r));
}

TEST_CASE("qe score range is enforced on parse") {
  json bad = {{"value", 1.2}, {"scorer_id", "s"}, {"reference_based", false}};
  CHECK_THROWS_AS(bad.get<QeScore>(), Error);
}

TEST_CASE("corpus loading assigns line-number ids and skips blanks") {
  TempDir dir;
  testutil::write_file(dir.file("tiny.txt"), "First sentence.\n\nThird sentence.\n");
  auto corpus = load_corpus(dir.file("tiny.txt"), {"en", "de"});
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].id == "tiny:1");
  CHECK(corpus[0].source == "First sentence.");
  CHECK(corpus[1].id == "tiny:3");  // blank line keeps numbering
  CHECK(!corpus[0].gold.has_value());

  testutil::write_file(dir.file("tiny.de"), "Erster Satz.\n\nDritter Satz.\n");
  auto with_gold = load_corpus(dir.file("tiny.txt"), {"en", "de"}, dir.file("tiny.de"));
  REQUIRE(with_gold.size() == 2);
  CHECK(with_gold[0].gold == "Erster Satz.");
  CHECK(with_gold[1].gold == "Dritter Satz.");

  testutil::write_file(dir.file("short.de"), "Nur einer.\n");
  CHECK_THROWS_AS(load_corpus(dir.file("tiny.txt"), {"en", "de"}, dir.file("short.de")), Error);
  CHECK_THROWS_AS(load_corpus(dir.file("missing.txt"), {"en", "de"}), Error);
}

TEST_CASE("ingested text is NFC-normalized when ICU is present") {
  TempDir dir;
  // e + combining acute accent; NFC composes it to U+00E9
  testutil::write_file(dir.file("nfc.txt"), "café\n");
  auto corpus = load_corpus(dir.file("nfc.txt"), {"en", "ko"});
  REQUIRE(corpus.size() == 1);
  if (text::nfc_available()) {
    CHECK(corpus[0].source == "café");
  } else {
    CHECK(corpus[0].source == "café");
  }
}
