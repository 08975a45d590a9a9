#include <doctest.h>

#include "bridg/errors.hpp"
#include "bridg/pool.hpp"
#include "bridg/prompts.hpp"
#include "testutil.hpp"

using namespace bridg;
using testutil::TempDir;
using testutil::qe;

TEST_CASE("pick_representative prefers the modal translation") {
  std::vector<ScoredText> samples = {
      {"T1", qe(0.4)}, {"T2", qe(0.9)}, {"T1", qe(0.5)}, {"T2", qe(0.8)}, {"T1", qe(0.6)},
  };
  // T1 x3 beats T2 x2 regardless of scores
  ScoredText rep = pick_representative(samples);
  CHECK(rep.text == "T1");
  CHECK(rep.qe.value == doctest::Approx(0.4));  // the chosen entry's own score (first occurrence)
}

TEST_CASE("pick_representative breaks mode ties by mean QE then first occurrence") {
  std::vector<ScoredText> tie = {
      {"A", qe(0.2)}, {"B", qe(0.9)}, {"A", qe(0.4)}, {"B", qe(0.7)},
  };
  // both x2; B's mean 0.8 beats A's 0.3
  CHECK(pick_representative(tie).text == "B");

  std::vector<ScoredText> equal_means = {
      {"A", qe(0.5)}, {"B", qe(0.5)}, {"A", qe(0.5)}, {"B", qe(0.5)},
  };
  CHECK(pick_representative(equal_means).text == "A");  // first occurrence
}

TEST_CASE("pick_representative falls back to closest-to-mean") {
  std::vector<ScoredText> distinct = {
      {"t1", qe(0.5)}, {"t2", qe(0.6)}, {"t3", qe(0.7)}, {"t4", qe(0.8)}, {"t5", qe(0.9)},
  };
  // mean 0.7 -> the 0.7-scored sample
  CHECK(pick_representative(distinct).text == "t3");

  std::vector<ScoredText> gap_tie = {{"lo", qe(0.4)}, {"hi", qe(0.6)}};
  // both are 0.1 from the mean 0.5; first occurrence wins
  CHECK(pick_representative(gap_tie).text == "lo");
}

TEST_CASE("pick_representative singleton and errors") {
  CHECK(pick_representative({{"only", qe(0.3)}}).text == "only");
  CHECK_THROWS_AS(pick_representative({}), Error);
}

TEST_CASE("pick_representative output is always a member of the input") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 8);
  std::uniform_int_distribution<int> variant(0, 3);
  for (int round = 0; round < 200; ++round) {
    std::vector<ScoredText> samples;
    int n = count(rng);
    for (int i = 0; i < n; ++i)
      samples.push_back({"v" + std::to_string(variant(rng)), qe(score(rng))});
    ScoredText rep = pick_representative(samples);
    bool member = false;
    std::size_t max_mult = 0, rep_mult = 0;
    for (const auto& s : samples) {
      member |= (s.text == rep.text && s.qe == rep.qe);
      std::size_t mult = 0;
      for (const auto& t : samples) mult += (t.text == s.text);
      max_mult = std::max(max_mult, mult);
      if (s.text == rep.text) rep_mult = mult;
    }
    CHECK(member);
    if (max_mult > 1) CHECK(rep_mult == max_mult);  // modal multiplicity is maximal
  }
}

namespace {

struct PoolFixture {
  TempDir dir;
  std::vector<SentencePair> corpus;
  std::shared_ptr<ModelGateway> gateway;

  // scripted QE: per-source scores via rules; translator produces seeded
  // variants so duplicate detection has something to chew on
  PoolFixture(const std::vector<std::pair<std::string, double>>& sources, int variants_k = 1) {
    std::vector<json> rules;
    int line = 0;
    for (const auto& [source, score] : sources) {
      SentencePair pair;
      pair.id = "dev:" + std::to_string(++line);
      pair.source = source;
      pair.lang_pair = {"en", "ko"};
      corpus.push_back(pair);
      rules.push_back(json{{"source", source}, {"score", score}});
    }
    json scripts = {{"qe", {{"rules", rules}, {"default", 0.5}}}};
    testutil::write_file(dir.file("scripts.json"), json(scripts).dump());

    auto translator = testutil::chat_profile(
        "tr", "mock://chat/seeded-variants?k=" + std::to_string(variants_k));
    auto embedder = testutil::embed_profile("emb", "mock://embed/hash?dim=8");
    auto scorer = testutil::qe_profile("qe", "mock://qe/table?file=" + dir.file("scripts.json"));
    gateway = std::make_shared<ModelGateway>(
        std::vector<ProviderProfile>{translator, embedder, scorer});
  }

  PoolBuildConfig config(int pool_size, int samples = 3) {
    PoolBuildConfig cfg;
    cfg.samples_per_sentence = samples;
    cfg.pool_size = pool_size;
    cfg.translator = "tr";
    cfg.qe = "qe";
    cfg.embedder = "emb";
    return cfg;
  }
};

}  // namespace

TEST_CASE("build_pool keeps the top-k by QE in corpus order") {
  PoolFixture fx({{"one", 0.9}, {"two", 0.5}, {"three", 0.7}});
  auto entries = build_pool(fx.corpus, fx.config(2), *fx.gateway, TranslationPromptAssets::builtin(), 1);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].pair.source == "one");
  CHECK(entries[1].pair.source == "three");
  CHECK(entries[0].qe.value >= entries[1].qe.value);
  for (const auto& e : entries) {
    REQUIRE(e.embedding.has_value());
    CHECK(e.embedding->size() == 8);
  }
}

TEST_CASE("build_pool breaks QE ties by corpus order") {
  PoolFixture fx({{"first", 0.9}, {"second", 0.9}, {"third", 0.1}});
  auto entries = build_pool(fx.corpus, fx.config(1), *fx.gateway, TranslationPromptAssets::builtin(), 1);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].pair.source == "first");
}

TEST_CASE("build_pool is deterministic") {
  PoolFixture fx({{"alpha", 0.8}, {"beta", 0.6}, {"gamma", 0.4}}, 3);
  auto a = build_pool(fx.corpus, fx.config(2), *fx.gateway, TranslationPromptAssets::builtin(), 7);
  PoolFixture fx2({{"alpha", 0.8}, {"beta", 0.6}, {"gamma", 0.4}}, 3);
  auto b = build_pool(fx2.corpus, fx2.config(2), *fx2.gateway, TranslationPromptAssets::builtin(), 7);
  CHECK(a == b);
}

TEST_CASE("build_pool validates sizes and reference QE") {
  PoolFixture fx({{"a", 0.5}, {"b", 0.5}});
  CHECK_THROWS_AS(
      build_pool(fx.corpus, fx.config(3), *fx.gateway, TranslationPromptAssets::builtin(), 1), Error);
  CHECK_THROWS_AS(build_pool({}, fx.config(1), *fx.gateway, TranslationPromptAssets::builtin(), 1),
                  Error);

  auto ref = testutil::qe_profile("refqe", "mock://qe/const?value=0.5");
  ref.reference_based = true;
  ModelGateway gw({testutil::chat_profile("tr", "mock://chat/upper"),
                   testutil::embed_profile("emb", "mock://embed/hash?dim=4"), ref});
  PoolBuildConfig cfg = fx.config(1);
  cfg.qe = "refqe";
  CHECK_THROWS_AS(build_pool(fx.corpus, cfg, gw, TranslationPromptAssets::builtin(), 1), Error);

  // the ablation path must be asked for explicitly and needs gold
  cfg.allow_reference_qe = true;
  CHECK_THROWS_AS(build_pool(fx.corpus, cfg, gw, TranslationPromptAssets::builtin(), 1), Error);
  auto with_gold = fx.corpus;
  for (auto& pair : with_gold) pair.gold = "gold of " + pair.source;
  CHECK_NOTHROW(build_pool(with_gold, cfg, gw, TranslationPromptAssets::builtin(), 1));
}

TEST_CASE("pool save/load round-trip and validation") {
  PoolFixture fx({{"one", 0.9}, {"two", 0.5}});
  auto entries = build_pool(fx.corpus, fx.config(2), *fx.gateway, TranslationPromptAssets::builtin(), 1);

  TempDir dir;
  save_pool(entries, dir.file("pool.jsonl"));
  auto loaded = load_pool(dir.file("pool.jsonl"));
  CHECK(loaded == entries);

  // malformed line -> parse error with line number
  testutil::write_file(dir.file("bad.jsonl"), "{}garbage\n");
  try {
    load_pool(dir.file("bad.jsonl"));
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }

  // out-of-range qe
  json bad_entry = json(entries[0]);
  bad_entry["qe"]["value"] = 1.2;
  testutil::write_file(dir.file("range.jsonl"), bad_entry.dump() + "\n");
  CHECK_THROWS_AS(load_pool(dir.file("range.jsonl")), Error);

  // missing embedding loads as absent
  json no_embedding = json(entries[0]);
  no_embedding.erase("embedding");
  testutil::write_file(dir.file("noemb.jsonl"), no_embedding.dump() + "\n");
  auto sparse = load_pool(dir.file("noemb.jsonl"));
  REQUIRE(sparse.size() == 1);
  CHECK(!sparse[0].embedding.has_value());

  // duplicate ids are rejected
  testutil::write_file(dir.file("dup.jsonl"), json(entries[0]).dump() + "\n" + json(entries[0]).dump() + "\n");
  CHECK_THROWS_AS(load_pool(dir.file("dup.jsonl")), Error);
}
