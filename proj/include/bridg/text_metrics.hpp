#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bridg {

// Ordered labeled tree; operand of the tree edit distance.
struct LabeledTree {
  std::string label;
  std::vector<LabeledTree> children;

  std::size_t node_count() const;
  bool operator==(const LabeledTree&) const = default;
};

// Similarity metrics of one pool candidate against the end sentence.
// Higher sbert_sim is closer; lower lev_dist / ted_dist is closer.
struct SimilarityVector {
  double sbert_sim = 0.0;
  std::int64_t lev_dist = 0;
  std::int64_t ted_dist = 0;

  bool operator==(const SimilarityVector&) const = default;
};

// Minimum number of single-character edits between two strings, computed
// over Unicode scalar values. O(|a|*|b|) time, O(min(|a|,|b|)) space.
std::int64_t levenshtein(std::string_view a, std::string_view b);

// Node edit costs for the tree edit distance. Unit costs by default.
struct TreeEditCosts {
  std::function<double(const std::string&)> remove = [](const std::string&) { return 1.0; };
  std::function<double(const std::string&)> insert = [](const std::string&) { return 1.0; };
  std::function<double(const std::string&, const std::string&)> rename =
      [](const std::string& a, const std::string& b) { return a == b ? 0.0 : 1.0; };
};

// Zhang-Shasha ordered tree edit distance (keyroots / forest-distance
// recurrence). Both trees must be non-empty.
double tree_edit_distance(const LabeledTree& t1, const LabeledTree& t2,
                          const TreeEditCosts& costs = TreeEditCosts{});

// Unit-cost TED rounded to an integer; the form used by start selection.
std::int64_t tree_edit_distance_unit(const LabeledTree& t1, const LabeledTree& t2);

double cosine_similarity(std::span<const double> u, std::span<const double> v);
double euclidean_distance(std::span<const double> u, std::span<const double> v);

// Produces a parse tree for a sentence. The default provider builds a
// right-branching chain of whitespace tokens under a ROOT label, so the
// pipeline runs without any parser model; a remote provider can be plugged
// in behind the same interface.
class TreeProvider {
 public:
  virtual ~TreeProvider() = default;
  virtual LabeledTree parse(const std::string& sentence) const = 0;
};

class TokenChainTreeProvider final : public TreeProvider {
 public:
  LabeledTree parse(const std::string& sentence) const override;
};

LabeledTree parse_tree(const std::string& sentence, const TreeProvider& provider);
LabeledTree parse_tree(const std::string& sentence);  // default token-chain provider

// S-expression form used by the remote tree provider and the tests:
// "(ROOT (a (b)))". Round-trips with parse_sexpr_tree.
std::string to_sexpr(const LabeledTree& tree);
LabeledTree parse_sexpr_tree(const std::string& text);

}  // namespace bridg
