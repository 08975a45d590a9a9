#include <doctest.h>

#include <random>

#include "bridg/errors.hpp"
#include "bridg/text_metrics.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace bridg;

TEST_CASE("levenshtein basics") {
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("abc", "") == 3);
  CHECK(levenshtein("kitten", "sitting") == oracle::levenshtein_full_matrix("kitten", "sitting"));
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "") == 0);
}

TEST_CASE("levenshtein counts unicode scalars, not bytes") {
  // two 3-byte Hangul syllables, one substitution
  CHECK(levenshtein("가각", "가갂") == 1);
  CHECK(levenshtein("café", "cafe") == 1);
}

TEST_CASE("levenshtein equals the full DP oracle on random pairs") {
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 1000; ++i) {
    std::string a = testutil::random_word(rng, 12);
    std::string b = testutil::random_word(rng, 12);
    CAPTURE(a);
    CAPTURE(b);
    REQUIRE(levenshtein(a, b) == oracle::levenshtein_full_matrix(a, b));
  }
}

TEST_CASE("levenshtein metric axioms") {
  std::mt19937_64 rng(777);
  for (int i = 0; i < 400; ++i) {
    std::string a = testutil::random_word(rng, 12);
    std::string b = testutil::random_word(rng, 12);
    std::string c = testutil::random_word(rng, 12);
    auto dab = levenshtein(a, b);
    auto dba = levenshtein(b, a);
    auto dac = levenshtein(a, c);
    auto dcb = levenshtein(c, b);
    CHECK(dab == dba);
    CHECK((dab == 0) == (a == b));
    CHECK(dab <= dac + dcb);
  }
}

namespace {

LabeledTree t(const std::string& label, std::vector<LabeledTree> children = {}) {
  return LabeledTree{label, std::move(children)};
}

}  // namespace

TEST_CASE("tree edit distance basics") {
  auto a_bc = t("a", {t("b"), t("c")});
  CHECK(tree_edit_distance(a_bc, a_bc) == 0.0);
  CHECK(tree_edit_distance(t("a"), t("b")) == 1.0);
  CHECK(tree_edit_distance(a_bc, t("a", {t("b")})) == 1.0);
  CHECK(oracle::ted_brute_force(a_bc, t("a", {t("b")})) == 1);
}

TEST_CASE("tree edit distance with custom costs") {
  TreeEditCosts costs;
  costs.remove = [](const std::string&) { return 2.0; };
  costs.insert = [](const std::string&) { return 3.0; };
  // delete c from a(b,c)
  CHECK(tree_edit_distance(t("a", {t("b"), t("c")}), t("a", {t("b")}), costs) == 2.0);
  // insert c
  CHECK(tree_edit_distance(t("a", {t("b")}), t("a", {t("b"), t("c")}), costs) == 3.0);
}

TEST_CASE("tree edit distance equals brute force on all trees with <= 4 nodes") {
  auto trees = oracle::enumerate_trees(4, {"x", "y"});
  for (const auto& t1 : trees) {
    for (const auto& t2 : trees) {
      REQUIRE(tree_edit_distance_unit(t1, t2) == oracle::ted_brute_force(t1, t2));
    }
  }
}

TEST_CASE("tree edit distance unit-cost properties") {
  auto trees = oracle::enumerate_trees(4, {"x", "y"});
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> pick(0, trees.size() - 1);
  for (int i = 0; i < 300; ++i) {
    const auto& t1 = trees[pick(rng)];
    const auto& t2 = trees[pick(rng)];
    auto d12 = tree_edit_distance_unit(t1, t2);
    auto d21 = tree_edit_distance_unit(t2, t1);
    CHECK(d12 == d21);
    CHECK((d12 == 0) == (t1 == t2));
    CHECK(d12 <= static_cast<std::int64_t>(t1.node_count() + t2.node_count()));
  }
}

TEST_CASE("cosine similarity") {
  std::vector<double> e1{1.0, 0.0};
  std::vector<double> e2{0.0, 1.0};
  std::vector<double> d{1.0, 1.0};
  CHECK(cosine_similarity(e1, e1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_similarity(e1, e2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cosine_similarity(e1, d) == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK_THROWS_AS(cosine_similarity(e1, std::vector<double>{1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(cosine_similarity(e1, std::vector<double>{0.0, 0.0}), Error);
}

TEST_CASE("cosine similarity is scale invariant") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> u(8), v(8);
    for (auto& x : u) x = coord(rng);
    for (auto& x : v) x = coord(rng);
    u[0] += 1.5;  // keep vectors away from zero
    v[0] += 1.5;
    double alpha = scale(rng), beta = scale(rng);
    std::vector<double> au(8), bv(8);
    for (int j = 0; j < 8; ++j) {
      au[j] = alpha * u[j];
      bv[j] = beta * v[j];
    }
    CHECK(cosine_similarity(au, bv) == doctest::Approx(cosine_similarity(u, v)).epsilon(1e-9));
  }
}

TEST_CASE("euclidean distance") {
  std::vector<double> v{1.0, 2.0, 3.0};
  CHECK(euclidean_distance(v, v) == 0.0);
  CHECK(euclidean_distance(std::vector<double>{0.0, 0.0}, std::vector<double>{3.0, 4.0}) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(euclidean_distance(v, std::vector<double>{1.0}), Error);

  // naive sum-of-squares oracle on random 8-dim pairs
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(8), b(8);
    for (auto& x : a) x = coord(rng);
    for (auto& x : b) x = coord(rng);
    double sum = 0.0;
    for (int j = 0; j < 8; ++j) sum += (a[j] - b[j]) * (a[j] - b[j]);
    CHECK(euclidean_distance(a, b) == doctest::Approx(std::sqrt(sum)).epsilon(1e-12));
  }
}

TEST_CASE("euclidean triangle inequality on random triples") {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(6), b(6), c(6);
    for (auto& x : a) x = coord(rng);
    for (auto& x : b) x = coord(rng);
    for (auto& x : c) x = coord(rng);
    CHECK(euclidean_distance(a, b) <= euclidean_distance(a, c) + euclidean_distance(c, b) + 1e-9);
  }
}

TEST_CASE("default tree provider builds a right-branching token chain") {
  auto tree = parse_tree("a b");
  CHECK(to_sexpr(tree) == "(ROOT (a (b)))");
  CHECK(to_sexpr(parse_tree("x")) == "(ROOT (x))");
  CHECK(parse_tree("one two three").node_count() == 4);
  CHECK(parse_tree("same sentence") == parse_tree("same sentence"));
  CHECK_THROWS_AS(parse_tree("   "), Error);
}

TEST_CASE("sexpr trees round-trip") {
  auto tree = t("S", {t("NP", {t("det"), t("n")}), t("VP", {t("v")})});
  CHECK(parse_sexpr_tree(to_sexpr(tree)) == tree);
  CHECK_THROWS_AS(parse_sexpr_tree("(a (b)"), Error);
  CHECK_THROWS_AS(parse_sexpr_tree("()"), Error);
  CHECK_THROWS_AS(parse_sexpr_tree("(a) trailing"), Error);
}
