#include "bridg/pool.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "bridg/errors.hpp"
#include "bridg/hash.hpp"
#include "bridg/prompts.hpp"
#include "bridg/text.hpp"

namespace bridg {

ScoredText pick_representative(const std::vector<ScoredText>& translations) {
  if (translations.empty()) throw usage_error("pick_representative over an empty list");

  struct Group {
    std::size_t first_index;
    std::size_t count = 0;
    double qe_sum = 0.0;
  };
  std::map<std::string, Group> groups;
  for (std::size_t i = 0; i < translations.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(translations[i].text, Group{i});
    ++it->second.count;
    it->second.qe_sum += translations[i].qe.value;
  }

  std::size_t max_count = 0;
  for (const auto& [t, g] : groups) max_count = std::max(max_count, g.count);

  if (max_count > 1) {
    // Modal translation; mode ties broken by higher mean QE, then first occurrence.
    const Group* best = nullptr;
    for (const auto& [t, g] : groups) {
      if (g.count != max_count) continue;
      if (best == nullptr) {
        best = &g;
        continue;
      }
      double mean = g.qe_sum / static_cast<double>(g.count);
      double best_mean = best->qe_sum / static_cast<double>(best->count);
      if (mean > best_mean || (mean == best_mean && g.first_index < best->first_index)) best = &g;
    }
    return translations[best->first_index];
  }

  double mean = 0.0;
  for (const auto& t : translations) mean += t.qe.value;
  mean /= static_cast<double>(translations.size());
  std::size_t best = 0;
  double best_gap = std::abs(translations[0].qe.value - mean);
  for (std::size_t i = 1; i < translations.size(); ++i) {
    double gap = std::abs(translations[i].qe.value - mean);
    if (gap < best_gap) {
      best = i;
      best_gap = gap;
    }
  }
  return translations[best];
}

std::vector<PoolEntry> build_pool(const std::vector<SentencePair>& dev_corpus, const PoolBuildConfig& cfg,
                                  ModelGateway& gateway, const TranslationPromptAssets& prompts,
                                  std::int64_t seed) {
  if (dev_corpus.empty()) throw usage_error("build_pool over an empty corpus");
  if (cfg.samples_per_sentence < 1) throw usage_error("samples_per_sentence must be >= 1");
  if (cfg.pool_size < 1) throw usage_error("pool_size must be >= 1");
  if (cfg.pool_size > static_cast<int>(dev_corpus.size()))
    throw usage_error("pool_size " + std::to_string(cfg.pool_size) + " exceeds corpus size " +
                      std::to_string(dev_corpus.size()));

  const auto& qe_profile = gateway.profile(cfg.qe);
  if (qe_profile.reference_based && !cfg.allow_reference_qe)
    throw usage_error("QE backend '" + cfg.qe +
                      "' is reference-based; pass allow_reference_qe for the ablation path");

  const auto& translator_profile = gateway.profile(cfg.translator);
  std::vector<PoolEntry> entries;
  entries.reserve(dev_corpus.size());
  for (const auto& pair : dev_corpus) {
    const std::string system_prompt = prompts.render_system(pair.lang_pair.target);
    std::vector<ScoredText> samples;
    samples.reserve(static_cast<std::size_t>(cfg.samples_per_sentence));
    for (int s = 0; s < cfg.samples_per_sentence; ++s) {
      ChatRequest request;
      request.backend_id = cfg.translator;
      request.messages = translation_messages(system_prompt, {}, pair.source);
      request.sampling = translator_profile.default_sampling;
      // distinct per-sample seeds keep repeated sampling out of the cache
      request.seed = static_cast<std::int64_t>(mix64(static_cast<std::uint64_t>(seed), s));
      std::string translation = text::normalize(gateway.chat(request));
      std::optional<std::string> reference;
      if (qe_profile.reference_based) {
        if (!pair.gold) throw usage_error("reference-based pool QE needs gold for '" + pair.id + "'");
        reference = pair.gold;
      }
      QeScore score = gateway.score_qe(cfg.qe, pair.source, translation, reference);
      samples.push_back({std::move(translation), score});
    }
    ScoredText representative = pick_representative(samples);
    PoolEntry entry;
    entry.pair = pair;
    entry.representative_translation = representative.text;
    entry.qe = representative.qe;
    entries.push_back(std::move(entry));
  }

  // Top pool_size by representative QE; ties keep corpus order.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const PoolEntry& a, const PoolEntry& b) { return a.qe.value > b.qe.value; });
  entries.resize(static_cast<std::size_t>(cfg.pool_size));

  std::vector<std::string> sources;
  sources.reserve(entries.size());
  for (const auto& e : entries) sources.push_back(e.pair.source);
  auto vectors = gateway.embed(cfg.embedder, sources);
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].embedding = vectors[i];
  return entries;
}

void save_pool(const std::vector<PoolEntry>& entries, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open pool file for writing '" + path + "'");
  for (const auto& entry : entries) {
    out << json(entry).dump() << "\n";
  }
  if (!out) throw io_error("failed writing pool file '" + path + "'");
}

std::vector<PoolEntry> load_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open pool file '" + path + "'");
  std::vector<PoolEntry> entries;
  std::string line;
  int lineno = 0;
  std::optional<std::size_t> dim;
  std::map<std::string, bool> seen_ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    PoolEntry entry;
    try {
      entry = json::parse(line).get<PoolEntry>();
    } catch (const json::exception& e) {
      throw parse_error("pool file '" + path + "' line " + std::to_string(lineno) + ": " + e.what());
    }
    if (text::trim(entry.pair.source).empty())
      throw parse_error("pool file '" + path + "' line " + std::to_string(lineno) + ": empty source");
    if (entry.qe.value < 0.0 || entry.qe.value > 1.0)
      throw parse_error("pool file '" + path + "' line " + std::to_string(lineno) + ": qe outside [0,1]");
    if (seen_ids.count(entry.pair.id))
      throw parse_error("pool file '" + path + "' line " + std::to_string(lineno) + ": duplicate id '" +
                        entry.pair.id + "'");
    seen_ids[entry.pair.id] = true;
    if (entry.embedding) {
      if (dim && entry.embedding->size() != *dim)
        throw parse_error("pool file '" + path + "' line " + std::to_string(lineno) +
                          ": embedding dimension mismatch");
      dim = entry.embedding->size();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace bridg
