#include <doctest.h>

#include <random>

#include "bridg/bridge_engine.hpp"
#include "bridg/errors.hpp"
#include "testutil.hpp"

using namespace bridg;
using testutil::TempDir;

namespace {

// Appendix-style sample output: numbered list ending in the target sentence.
const std::string kSampleRaw =
    "1. I am happy that there are people willing to support me.\n"
    "2. It's good to know that support is available when needed.\n"
    "3. It's reassuring to see support being provided in various situations.\n"
    "4. He mentioned seeing positive changes in different scenarios.\n"
    "5. \"We have seen positive transformations in our subjects,\" he added.\n"
    "6. \"We now have improved conditions in our test subjects,\" he added.\n"
    "7. \"We now have 4-month-old mice that are non-diabetic that used to be diabetic,\" he added.\n";

const std::string kSampleStart = "I am happy that there are people willing to support me.";
const std::string kSampleEnd =
    "\"We now have 4-month-old mice that are non-diabetic that used to be diabetic,\" he added.";

GradualConfig gradual_config(const std::string& translator = "tr", const std::string& bridger = "br") {
  GradualConfig cfg;
  cfg.translator = translator;
  cfg.bridger = bridger;
  return cfg;
}

}  // namespace

TEST_CASE("bridge prompt carries the exemplars and the query block") {
  auto assets = BridgingPromptAssets::builtin();
  SamplingParams sampling{0.6, 0.9, 1024};
  std::string start = "A perfectly unique start marker.";
  std::string end = "A perfectly unique end marker.";
  ChatRequest request = build_bridge_prompt(start, end, assets, "br", sampling, 11);

  REQUIRE(request.messages.size() == 1);  // single user message
  CHECK(request.messages[0].role == Role::user);
  CHECK(request.backend_id == "br");
  CHECK(request.sampling.temperature == doctest::Approx(0.6));
  CHECK(request.sampling.top_p == doctest::Approx(0.9));
  CHECK(request.seed == 11);

  const std::string& prompt = request.messages[0].content;
  // both query sentences appear verbatim exactly once
  auto count = [&](const std::string& needle) {
    std::size_t n = 0, pos = 0;
    while ((pos = prompt.find(needle, pos)) != std::string::npos) {
      ++n;
      pos += needle.size();
    }
    return n;
  };
  CHECK(count(start) == 1);
  CHECK(count(end) == 1);
  // exemplar 1 rendered
  CHECK(prompt.find("Surprisingly often, animals show up uninvited") != std::string::npos);
  // all three exemplars render as numbered bridges
  CHECK(count("\n1. ") >= 3);

  CHECK_THROWS_AS(build_bridge_prompt("", end, assets, "br", sampling, std::nullopt), Error);
  CHECK_THROWS_AS(build_bridge_prompt(start, "  ", assets, "br", sampling, std::nullopt), Error);
}

TEST_CASE("builtin bridging assets match the shipped asset files") {
  auto builtin = BridgingPromptAssets::builtin();
  auto loaded = BridgingPromptAssets::load(std::string(BRIDG_SOURCE_DIR) + "/assets/bridging");
  CHECK(builtin.instruction == loaded.instruction);
  REQUIRE(builtin.fewshot.size() == 3);
  REQUIRE(loaded.fewshot.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(builtin.fewshot[i].start == loaded.fewshot[i].start);
    CHECK(builtin.fewshot[i].end == loaded.fewshot[i].end);
    CHECK(builtin.fewshot[i].bridge == loaded.fewshot[i].bridge);
    CHECK_NOTHROW(validate(loaded.fewshot[i].bridge));
  }
  // exemplar bridges look like the published ones
  CHECK(builtin.fewshot[0].bridge.sentences.size() == 9);
  CHECK(builtin.fewshot[1].bridge.sentences.size() == 9);
  CHECK(builtin.fewshot[2].bridge.sentences.size() == 7);
}

TEST_CASE("parse_bridge extracts the numbered sample into a 7-sentence bridge") {
  Bridge bridge = parse_bridge(kSampleRaw, kSampleStart, kSampleEnd);
  CHECK(bridge.sentences.size() == 7);
  CHECK(bridge.sentences.front() == kSampleStart);
  CHECK(bridge.sentences.back() == kSampleEnd);
  CHECK(bridge.origin == BridgeOrigin::full);
}

TEST_CASE("parse_bridge tolerates commentary and numbering variants") {
  std::string raw =
      "Sure! Here is the bridge you asked for:\n"
      "1) alpha\n"
      "some commentary in between\n"
      "  2. beta\n"
      "3) gamma\n"
      "Hope that helps!\n";
  Bridge bridge = parse_bridge(raw, "alpha", "gamma");
  CHECK(bridge.sentences == std::vector<std::string>{"alpha", "beta", "gamma"});
}

TEST_CASE("parse_bridge normalizes drifted endpoints byte-exactly") {
  std::string raw = "1. a paraphrased start\n2. middle\n3. a paraphrased end\n";
  Bridge bridge = parse_bridge(raw, "the true start", "the true end");
  CHECK(bridge.sentences.front() == "the true start");
  CHECK(bridge.sentences.back() == "the true end");
  CHECK(bridge.sentences[1] == "middle");
}

TEST_CASE("parse_bridge errors") {
  CHECK_THROWS_AS(parse_bridge("no numbered lines here", "a", "b"), Error);
  try {
    parse_bridge("chatter\nmore chatter", "a", "b");
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
  }
  CHECK_THROWS_AS(parse_bridge("  ", "a", "b"), Error);
  // single item with distinct endpoints cannot form a bridge
  CHECK_THROWS_AS(parse_bridge("1. only", "a", "b"), Error);
  CHECK_NOTHROW(parse_bridge("1. same", "same", "same"));
}

TEST_CASE("parse_bridge clamps long outputs by uniform interior thinning") {
  std::string raw;
  for (int i = 1; i <= 30; ++i) raw += std::to_string(i) + ". sentence " + std::to_string(i) + "\n";
  Bridge bridge = parse_bridge(raw, "sentence 1", "sentence 30", 10);
  CHECK(bridge.sentences.size() == 10);
  CHECK(bridge.sentences.front() == "sentence 1");
  CHECK(bridge.sentences.back() == "sentence 30");
  // interior stays ordered and duplicate-free
  for (std::size_t i = 1; i < bridge.sentences.size(); ++i)
    CHECK(bridge.sentences[i] != bridge.sentences[i - 1]);
}

TEST_CASE("parse_bridge of a rendered bridge is the identity") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 100; ++round) {
    Bridge bridge;
    std::uniform_int_distribution<int> len(2, 12);
    int n = len(rng);
    for (int i = 1; i <= n; ++i)
      bridge.sentences.push_back("sentence " + std::to_string(i) + " " +
                                 testutil::random_word(rng, 8));
    bridge.start = bridge.sentences.front();
    bridge.end = bridge.sentences.back();
    Bridge reparsed = parse_bridge(render_numbered_bridge(bridge), bridge.start, bridge.end, 16);
    CHECK(reparsed.sentences == bridge.sentences);
  }
}

TEST_CASE("sample_bridge keeps first, middle, last") {
  auto make = [](int n) {
    Bridge b;
    for (int i = 1; i <= n; ++i) b.sentences.push_back("s" + std::to_string(i));
    b.start = b.sentences.front();
    b.end = b.sentences.back();
    return b;
  };

  Bridge seven = sample_bridge(make(7));
  CHECK(seven.sentences == std::vector<std::string>{"s1", "s4", "s7"});  // ceil(7/2) = 4
  CHECK(seven.origin == BridgeOrigin::sampled);

  CHECK(sample_bridge(make(2)).sentences == std::vector<std::string>{"s1", "s2"});
  CHECK(sample_bridge(make(3)).sentences == std::vector<std::string>{"s1", "s2", "s3"});

  Bridge one;
  one.start = one.end = "solo";
  one.sentences = {"solo"};
  CHECK(sample_bridge(one).sentences == std::vector<std::string>{"solo"});

  for (int n = 2; n <= 16; ++n) {
    Bridge sampled = sample_bridge(make(n));
    CHECK(sampled.sentences.size() <= 3);
    CHECK(sampled.sentences.front() == "s1");
    CHECK(sampled.sentences.back() == "s" + std::to_string(n));
    std::size_t middle_index = static_cast<std::size_t>((n + 1) / 2);
    if (sampled.sentences.size() == 3)
      CHECK(sampled.sentences[1] == "s" + std::to_string(middle_index));
  }
}

TEST_CASE("gradual_mt issues one call per sentence with growing few-shot") {
  ModelGateway gw({testutil::chat_profile("tr", "mock://chat/upper")});
  Bridge bridge{"a", "c", {"a", "b", "c"}, BridgeOrigin::full};
  GradualTrace trace =
      gradual_mt(bridge, gradual_config(), TranslationPromptAssets::builtin(), "ko", gw, 3);
  CHECK(trace.final_translation == "C");
  CHECK(trace.call_count == 3);
  CHECK(trace.steps[0].translation == "A");
  CHECK(trace.steps[1].translation == "B");
  CHECK(gw.stats().network_calls("tr") == 3);
}

TEST_CASE("gradual_mt few-shot context size is the step index") {
  ModelGateway gw({testutil::chat_profile("tr", "mock://chat/echo-fewshot")});
  Bridge bridge{"s1", "s4", {"s1", "s2", "s3", "s4"}, BridgeOrigin::full};
  GradualTrace trace =
      gradual_mt(bridge, gradual_config(), TranslationPromptAssets::builtin(), "ko", gw, 1);
  // echo-fewshot returns <content>#<prior pairs>
  CHECK(trace.steps[0].translation == "s1#0");
  CHECK(trace.steps[1].translation == "s2#1");
  CHECK(trace.steps[2].translation == "s3#2");
  CHECK(trace.final_translation == "s4#3");
}

TEST_CASE("gradual_mt over a single-sentence bridge is one zero-shot call") {
  ModelGateway gw({testutil::chat_profile("tr", "mock://chat/echo-fewshot")});
  Bridge bridge{"same", "same", {"same"}, BridgeOrigin::full};
  GradualTrace trace =
      gradual_mt(bridge, gradual_config(), TranslationPromptAssets::builtin(), "ko", gw, 1);
  CHECK(trace.call_count == 1);
  CHECK(trace.final_translation == "same#0");
}

TEST_CASE("gradual_mt attaches the partial trace to mid-bridge failures") {
  // every distinct request fails once; with retries off the 2nd step dies
  auto profile = testutil::chat_profile("tr", "mock://chat/flaky?fail=1&inner=upper");
  profile.max_retries = 0;
  ModelGateway gw({profile});
  Bridge bridge{"a", "c", {"a", "b", "c"}, BridgeOrigin::full};

  // first step retried by a second gradual run: warm it so step 1 succeeds
  try {
    gradual_mt(bridge, gradual_config(), TranslationPromptAssets::builtin(), "ko", gw, 1);
    FAIL("expected failure");
  } catch (const GradualMtError& e) {
    CHECK(e.partial().steps.size() < 3);
  }
}

TEST_CASE("generate_bridge retries once with a bumped seed then falls back") {
  // scripted: the seed-0 request yields garbage, the retry (seed 1) yields a
  // good bridge
  TempDir dir;
  json scripts = {{"chat",
                   {{"rules", json::array({
                        json{{"contains", "\"seed\":11"}, {"response", "no numbers here"}},
                        json{{"contains", "\"seed\":12"}, {"response", "1. one\n2. two\n3. three\n"}},
                    })},
                    {"fallback", "none"}}}};
  testutil::write_file(dir.file("scripts.json"), scripts.dump());
  ModelGateway gw({testutil::chat_profile("br", "mock://chat/script?file=" + dir.file("scripts.json"))});

  GradualConfig cfg = gradual_config();
  Bridge bridge = generate_bridge("one", "three", cfg, BridgingPromptAssets::builtin(), gw, 11);
  CHECK(bridge.sentences == std::vector<std::string>{"one", "two", "three"});
  CHECK(gw.stats().network_calls("br") == 2);  // the retry is a fresh request

  // always-garbage output degenerates to [start, end]
  ModelGateway gw2({testutil::chat_profile("br", "mock://chat/echo")});
  Bridge fallback = generate_bridge("alpha", "omega", cfg, BridgingPromptAssets::builtin(), gw2, 1);
  CHECK(fallback.sentences == std::vector<std::string>{"alpha", "omega"});
  CHECK(gw2.stats().network_calls("br") == 2);
}
