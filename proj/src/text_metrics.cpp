#include "bridg/text_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "bridg/errors.hpp"
#include "bridg/text.hpp"

namespace bridg {

std::size_t LabeledTree::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

std::int64_t levenshtein(std::string_view a, std::string_view b) {
  std::u32string ua = text::to_utf32(a);
  std::u32string ub = text::to_utf32(b);
  if (ua.size() < ub.size()) std::swap(ua, ub);  // ub is the shorter one
  const std::size_t n = ua.size();
  const std::size_t m = ub.size();
  if (m == 0) return static_cast<std::int64_t>(n);

  std::vector<std::int64_t> row(m + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= n; ++i) {
    std::int64_t diag = row[0];
    row[0] = static_cast<std::int64_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      std::int64_t sub = diag + (ua[i - 1] == ub[j - 1] ? 0 : 1);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[m];
}

namespace {

// Postorder flattening used by the Zhang-Shasha recurrence.
struct FlatTree {
  std::vector<const LabeledTree*> nodes;  // postorder
  std::vector<std::size_t> leftmost;      // l(i): postorder index of leftmost leaf
  std::vector<std::size_t> keyroots;

  explicit FlatTree(const LabeledTree& root) {
    walk(root);
    std::vector<bool> seen(nodes.size(), false);
    for (std::size_t i = nodes.size(); i-- > 0;) {
      if (!seen[leftmost[i]]) {
        seen[leftmost[i]] = true;
        keyroots.push_back(i);
      }
    }
    std::sort(keyroots.begin(), keyroots.end());
  }

 private:
  std::size_t walk(const LabeledTree& node) {
    std::size_t left = 0;
    bool first = true;
    for (const auto& child : node.children) {
      std::size_t child_left = walk(child);
      if (first) {
        left = child_left;
        first = false;
      }
    }
    nodes.push_back(&node);
    std::size_t index = nodes.size() - 1;
    leftmost.push_back(first ? index : left);
    return leftmost[index];
  }
};

}  // namespace

double tree_edit_distance(const LabeledTree& t1, const LabeledTree& t2, const TreeEditCosts& costs) {
  FlatTree a(t1);
  FlatTree b(t2);
  const std::size_t n = a.nodes.size();
  const std::size_t m = b.nodes.size();

  std::vector<std::vector<double>> treedist(n, std::vector<double>(m, 0.0));
  std::vector<std::vector<double>> fd(n + 1, std::vector<double>(m + 1, 0.0));

  for (std::size_t ki : a.keyroots) {
    for (std::size_t kj : b.keyroots) {
      const std::size_t li = a.leftmost[ki];
      const std::size_t lj = b.leftmost[kj];
      fd[li][lj] = 0.0;
      for (std::size_t i = li; i <= ki; ++i)
        fd[i + 1][lj] = fd[i][lj] + costs.remove(a.nodes[i]->label);
      for (std::size_t j = lj; j <= kj; ++j)
        fd[li][j + 1] = fd[li][j] + costs.insert(b.nodes[j]->label);
      for (std::size_t i = li; i <= ki; ++i) {
        for (std::size_t j = lj; j <= kj; ++j) {
          if (a.leftmost[i] == li && b.leftmost[j] == lj) {
            fd[i + 1][j + 1] = std::min({fd[i][j + 1] + costs.remove(a.nodes[i]->label),
                                         fd[i + 1][j] + costs.insert(b.nodes[j]->label),
                                         fd[i][j] + costs.rename(a.nodes[i]->label, b.nodes[j]->label)});
            treedist[i][j] = fd[i + 1][j + 1];
          } else {
            fd[i + 1][j + 1] = std::min({fd[i][j + 1] + costs.remove(a.nodes[i]->label),
                                         fd[i + 1][j] + costs.insert(b.nodes[j]->label),
                                         fd[a.leftmost[i]][b.leftmost[j]] + treedist[i][j]});
          }
        }
      }
    }
  }
  return treedist[n - 1][m - 1];
}

std::int64_t tree_edit_distance_unit(const LabeledTree& t1, const LabeledTree& t2) {
  return static_cast<std::int64_t>(std::llround(tree_edit_distance(t1, t2)));
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw usage_error("cosine_similarity dimension mismatch (" + std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()) + ")");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0)
    throw usage_error("cosine_similarity over a zero vector (broken embedding provider)");
  double value = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(value, -1.0, 1.0);
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw usage_error("euclidean_distance dimension mismatch (" + std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()) + ")");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double d = u[i] - v[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

LabeledTree TokenChainTreeProvider::parse(const std::string& sentence) const {
  auto tokens = text::split_whitespace(sentence);
  if (tokens.empty()) throw usage_error("parse_tree over an empty sentence");
  LabeledTree chain{tokens.back(), {}};
  for (std::size_t i = tokens.size() - 1; i-- > 0;) {
    chain = LabeledTree{tokens[i], {std::move(chain)}};
  }
  return LabeledTree{"ROOT", {std::move(chain)}};
}

LabeledTree parse_tree(const std::string& sentence, const TreeProvider& provider) {
  return provider.parse(sentence);
}

LabeledTree parse_tree(const std::string& sentence) {
  static const TokenChainTreeProvider provider;
  return provider.parse(sentence);
}

std::string to_sexpr(const LabeledTree& tree) {
  std::string out = "(" + tree.label;
  for (const auto& c : tree.children) out += " " + to_sexpr(c);
  out += ")";
  return out;
}

namespace {

LabeledTree parse_sexpr_at(std::string_view s, std::size_t& pos) {
  auto skip_ws = [&] {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  };
  skip_ws();
  if (pos >= s.size() || s[pos] != '(') throw parse_error("expected '(' in tree expression");
  ++pos;
  skip_ws();
  std::size_t start = pos;
  while (pos < s.size() && s[pos] != '(' && s[pos] != ')' &&
         !std::isspace(static_cast<unsigned char>(s[pos])))
    ++pos;
  if (pos == start) throw parse_error("missing node label in tree expression");
  LabeledTree node{std::string(s.substr(start, pos - start)), {}};
  skip_ws();
  while (pos < s.size() && s[pos] == '(') {
    node.children.push_back(parse_sexpr_at(s, pos));
    skip_ws();
  }
  if (pos >= s.size() || s[pos] != ')') throw parse_error("expected ')' in tree expression");
  ++pos;
  return node;
}

}  // namespace

LabeledTree parse_sexpr_tree(const std::string& s) {
  std::size_t pos = 0;
  LabeledTree tree = parse_sexpr_at(s, pos);
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size()) throw parse_error("trailing characters after tree expression");
  return tree;
}

}  // namespace bridg
