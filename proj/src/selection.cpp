#include "bridg/selection.hpp"

#include <algorithm>

#include "bridg/errors.hpp"
#include "bridg/text.hpp"

namespace bridg {

namespace {

SelectionMetric metric_from_letter(char c) {
  switch (c) {
    case 'S': return SelectionMetric::sbert;
    case 'L': return SelectionMetric::lev;
    case 'T': return SelectionMetric::ted;
    default: throw config_error(std::string("unknown selection metric '") + c + "'");
  }
}

char metric_letter(SelectionMetric m) {
  switch (m) {
    case SelectionMetric::sbert: return 'S';
    case SelectionMetric::lev: return 'L';
    case SelectionMetric::ted: return 'T';
  }
  return '?';
}

// Returns negative when `a` is closer than `b` under the metric, positive
// when farther, zero on ties. Similarities sort descending, distances
// ascending.
int compare_metric(SelectionMetric m, const SimilarityVector& a, const SimilarityVector& b) {
  switch (m) {
    case SelectionMetric::sbert:
      if (a.sbert_sim > b.sbert_sim) return -1;
      if (a.sbert_sim < b.sbert_sim) return 1;
      return 0;
    case SelectionMetric::lev:
      if (a.lev_dist < b.lev_dist) return -1;
      if (a.lev_dist > b.lev_dist) return 1;
      return 0;
    case SelectionMetric::ted:
      if (a.ted_dist < b.ted_dist) return -1;
      if (a.ted_dist > b.ted_dist) return 1;
      return 0;
  }
  return 0;
}

bool closer_by_priority(const std::vector<SelectionMetric>& priority, const ScoredCandidate& a,
                        const ScoredCandidate& b) {
  for (auto m : priority) {
    int c = compare_metric(m, a.sim, b.sim);
    if (c != 0) return c < 0;
  }
  return a.pool_index < b.pool_index;
}

}  // namespace

SelectionStrategy parse_strategy(const std::string& name) {
  std::string s = text::trim(name);
  SelectionStrategy strategy;
  std::string kind;
  std::string metrics;
  auto paren = s.find('(');
  if (paren == std::string::npos) {
    kind = s;
  } else {
    if (s.back() != ')') throw config_error("malformed strategy '" + name + "'");
    kind = s.substr(0, paren);
    metrics = s.substr(paren + 1, s.size() - paren - 2);
  }

  if (kind == "Sort" || kind == "sort") strategy.kind = SelectionKind::sort;
  else if (kind == "Filter" || kind == "filter") strategy.kind = SelectionKind::filter;
  else if (kind == "Tops" || kind == "tops") strategy.kind = SelectionKind::tops;
  else throw config_error("unknown selection strategy '" + name + "'");

  for (char c : metrics) {
    if (c == '-' || c == ' ' || c == ',') continue;
    strategy.priority.push_back(metric_from_letter(c));
  }
  if (strategy.kind == SelectionKind::tops) {
    if (!strategy.priority.empty())
      throw config_error("Tops takes no metric priority: '" + name + "'");
  } else if (strategy.priority.empty()) {
    throw config_error("strategy '" + name + "' needs at least one metric");
  }
  return strategy;
}

std::string to_string(const SelectionStrategy& strategy) {
  if (strategy.kind == SelectionKind::tops) return "Tops";
  std::string metrics;
  for (auto m : strategy.priority) {
    if (!metrics.empty()) metrics += '-';
    metrics += metric_letter(m);
  }
  return (strategy.kind == SelectionKind::sort ? std::string("Sort(") : std::string("Filter(")) +
         metrics + ")";
}

void validate(const SelectionConfig& cfg) {
  if (cfg.k < 1) throw usage_error("selection k must be >= 1");
  if (cfg.strategy.kind == SelectionKind::tops && cfg.k > 3)
    throw usage_error("Tops selects at most 3 starts");
  if (cfg.strategy.kind != SelectionKind::tops && cfg.strategy.priority.empty())
    throw usage_error("Sort/Filter need at least one priority metric");
  if (cfg.strategy.kind == SelectionKind::filter && cfg.strategy.filter_width < 1)
    throw usage_error("filter_width must be >= 1");
}

std::vector<ScoredCandidate> score_candidates(const std::string& end, const std::vector<PoolEntry>& pool,
                                              ModelGateway& gateway, const std::string& embedder,
                                              const TreeProvider& trees) {
  if (pool.empty()) throw usage_error("score_candidates over an empty pool");
  if (text::trim(end).empty()) throw usage_error("score_candidates with empty end sentence");

  bool missing_embedding = false;
  for (const auto& e : pool) missing_embedding |= !e.embedding.has_value();
  if (missing_embedding && (embedder.empty() || !gateway.has_profile(embedder)))
    throw usage_error("pool entries lack embeddings and no embedder backend is configured");

  std::vector<double> end_embedding = gateway.embed(embedder, {end})[0];
  LabeledTree end_tree = trees.parse(end);

  std::vector<ScoredCandidate> scored;
  scored.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ScoredCandidate c;
    c.entry = pool[i];
    c.pool_index = i;
    if (!c.entry.embedding) c.entry.embedding = gateway.embed(embedder, {c.entry.pair.source})[0];
    c.sim.sbert_sim = cosine_similarity(*c.entry.embedding, end_embedding);
    c.sim.lev_dist = levenshtein(end, c.entry.pair.source);
    c.sim.ted_dist = tree_edit_distance_unit(end_tree, trees.parse(c.entry.pair.source));
    scored.push_back(std::move(c));
  }
  return scored;
}

std::vector<ScoredCandidate> score_candidates(const std::string& end, const std::vector<PoolEntry>& pool,
                                              ModelGateway& gateway, const std::string& embedder) {
  static const TokenChainTreeProvider provider;
  return score_candidates(end, pool, gateway, embedder, provider);
}

std::vector<std::size_t> select_start_indices(const std::vector<ScoredCandidate>& scored,
                                              const SelectionConfig& cfg, std::uint64_t /*rng_seed*/) {
  validate(cfg);
  const std::size_t k = static_cast<std::size_t>(cfg.k);
  if (scored.size() < k)
    throw usage_error("k=" + std::to_string(cfg.k) + " exceeds " + std::to_string(scored.size()) +
                      " scored candidates");

  std::vector<std::size_t> order(scored.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto sort_by_priority = [&](std::vector<std::size_t>& idx, const std::vector<SelectionMetric>& prio) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return closer_by_priority(prio, scored[a], scored[b]);
    });
  };

  switch (cfg.strategy.kind) {
    case SelectionKind::sort: {
      sort_by_priority(order, cfg.strategy.priority);
      order.resize(k);
      return order;
    }
    case SelectionKind::filter: {
      sort_by_priority(order, {SelectionMetric::sbert});
      order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(cfg.strategy.filter_width)));
      if (order.size() < k)
        throw usage_error("filter_width leaves fewer candidates than k");
      sort_by_priority(order, cfg.strategy.priority);
      order.resize(k);
      return order;
    }
    case SelectionKind::tops: {
      std::vector<std::size_t> picks;
      for (auto metric : {SelectionMetric::sbert, SelectionMetric::lev, SelectionMetric::ted}) {
        std::vector<std::size_t> ranked = order;
        sort_by_priority(ranked, {metric});
        for (std::size_t candidate : ranked) {
          if (std::find(picks.begin(), picks.end(), candidate) == picks.end()) {
            picks.push_back(candidate);
            break;
          }
        }
      }
      if (picks.size() < k) throw usage_error("pool too small for Tops deduplication");
      picks.resize(k);
      return picks;
    }
  }
  throw usage_error("unreachable selection kind");
}

std::vector<PoolEntry> select_starts(const std::vector<ScoredCandidate>& scored,
                                     const SelectionConfig& cfg, std::uint64_t rng_seed) {
  std::vector<PoolEntry> out;
  for (std::size_t idx : select_start_indices(scored, cfg, rng_seed)) out.push_back(scored[idx].entry);
  return out;
}

}  // namespace bridg
