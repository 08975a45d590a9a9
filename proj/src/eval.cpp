#include "bridg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bridg/errors.hpp"
#include "bridg/text.hpp"
#include "bridg/text_metrics.hpp"

namespace bridg {

namespace fs = std::filesystem;

std::vector<std::size_t> retrieve_most_similar(const std::vector<double>& end_embedding,
                                               const std::vector<PoolEntry>& pool, int k) {
  if (k < 1) throw usage_error("retrieval needs k >= 1");
  if (static_cast<std::size_t>(k) > pool.size())
    throw usage_error("k=" + std::to_string(k) + " exceeds pool size " + std::to_string(pool.size()));
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!pool[i].embedding) throw usage_error("pool entry '" + pool[i].pair.id + "' lacks an embedding");
    ranked.emplace_back(cosine_similarity(*pool[i].embedding, end_embedding), i);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;  // ties keep pool order via stable_sort
  });
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(ranked[static_cast<std::size_t>(i)].second);
  return out;
}

RunReport run_baseline(const std::vector<SentencePair>& corpus, const BaselineConfig& cfg,
                       PipelineContext& ctx, const std::string& out_dir) {
  if (cfg.mode == BaselineConfig::Mode::k_shot && cfg.k > 0) {
    if (static_cast<std::size_t>(cfg.k) > ctx.pool.size())
      throw usage_error("baseline k exceeds the pool size");
    for (const auto& entry : ctx.pool) {
      if (!entry.pair.gold)
        throw usage_error("k-shot baseline needs gold translations in the pool (missing for '" +
                          entry.pair.id + "')");
    }
  }

  RunWriter writer(out_dir, ctx.cfg);
  std::map<std::string, DecisionRecord> done;
  for (const auto& r : writer.existing()) done[r.end_id] = r;

  RunReport report;
  report.seed = ctx.cfg.seed;
  report.config_fingerprint = fingerprint_config(ctx.cfg);

  const auto& translator_profile = ctx.gateway->profile(ctx.cfg.translator);
  for (const auto& end : corpus) {
    if (auto it = done.find(end.id); it != done.end()) {
      report.per_sentence.push_back(it->second);
      continue;
    }
    DecisionRecord record;
    record.end_id = end.id;
    for (const auto& stage : kStageNames) record.timings[stage] = 0.0;
    const std::int64_t seed = sentence_seed(ctx.cfg.seed, end.id);
    try {
      std::vector<GradualStep> examples;
      if (cfg.mode == BaselineConfig::Mode::k_shot && cfg.k > 0) {
        auto end_embedding = ctx.gateway->embed(ctx.cfg.embedder, {end.source})[0];
        for (std::size_t idx : retrieve_most_similar(end_embedding, ctx.pool, cfg.k))
          examples.push_back({ctx.pool[idx].pair.source, *ctx.pool[idx].pair.gold});
      }
      ChatRequest request;
      request.backend_id = ctx.cfg.translator;
      request.messages = translation_messages(
          ctx.translation_assets.render_system(end.lang_pair.target), examples, end.source);
      request.sampling = translator_profile.default_sampling;
      request.seed = seed;
      std::string translation = text::normalize(ctx.gateway->chat(request));
      record.zero_shot = {translation, ctx.gateway->score_qe(ctx.cfg.qe, end.source, translation)};
      record.chosen = ChosenRoute::zero_shot;
    } catch (const Error& e) {
      if (ctx.cfg.strict) throw;
      record.failed = true;
      record.error = e.what();
    }
    writer.append(record);
    report.per_sentence.push_back(std::move(record));
  }

  report.summary = summarize(report.per_sentence);
  writer.finish(report.summary, report.config_fingerprint, report.seed);
  return report;
}

ProgressRecord progress_from_distances(std::vector<double> distances) {
  if (distances.empty()) throw usage_error("progress over an empty distance list");
  ProgressRecord record;
  record.distances = std::move(distances);
  for (std::size_t i = 1; i < record.distances.size(); ++i)
    record.progresses.push_back(record.distances[i - 1] - record.distances[i]);
  if (!record.progresses.empty()) {
    record.average_progress =
        std::accumulate(record.progresses.begin(), record.progresses.end(), 0.0) /
        static_cast<double>(record.progresses.size());
  }
  return record;
}

namespace {

std::pair<double, double> mean_stddev(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

std::pair<std::vector<ProgressRecord>, ProgressSummary> analyze_bridges(
    const std::vector<GradualTrace>& traces, ModelGateway& gateway, const std::string& embedder,
    const std::vector<std::optional<std::string>>& golds) {
  if (traces.empty()) throw usage_error("analyze_bridges over an empty trace list");
  if (!golds.empty() && golds.size() != traces.size())
    throw usage_error("golds list must match the trace list");

  std::vector<ProgressRecord> records;
  std::vector<double> averages;
  std::vector<double> target_averages;

  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& trace = traces[t];
    const auto& sentences = trace.bridge.sentences;
    std::vector<std::string> to_embed = sentences;
    to_embed.push_back(trace.bridge.end);
    auto vectors = gateway.embed(embedder, to_embed);
    const auto& end_vec = vectors.back();

    std::vector<double> distances;
    distances.reserve(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i)
      distances.push_back(euclidean_distance(vectors[i], end_vec));
    ProgressRecord record = progress_from_distances(std::move(distances));
    record.bridge_id = "bridge:" + std::to_string(t + 1);

    if (!golds.empty() && golds[t]) {
      // Target side: each step translation against the gold embedding.
      std::vector<std::string> target_texts;
      for (const auto& step : trace.steps) target_texts.push_back(step.translation);
      target_texts.push_back(*golds[t]);
      auto tvecs = gateway.embed(embedder, target_texts);
      const auto& gold_vec = tvecs.back();
      std::vector<double> tdist;
      for (std::size_t i = 0; i + 1 < tvecs.size(); ++i)
        tdist.push_back(euclidean_distance(tvecs[i], gold_vec));
      ProgressRecord target = progress_from_distances(std::move(tdist));
      record.target_distances = target.distances;
      record.target_average_progress = target.average_progress;
      target_averages.push_back(target.average_progress);
    }

    averages.push_back(record.average_progress);
    records.push_back(std::move(record));
  }

  ProgressSummary summary;
  summary.bridge_count = static_cast<std::int64_t>(records.size());
  auto [mean, stddev] = mean_stddev(averages);
  summary.mean_average_progress = mean;
  summary.stddev_average_progress = stddev;
  if (!target_averages.empty()) {
    auto [tmean, tstd] = mean_stddev(target_averages);
    summary.target_mean_average_progress = tmean;
    summary.target_stddev_average_progress = tstd;
  }
  return {std::move(records), summary};
}

std::vector<std::string> export_trajectories(const std::vector<GradualTrace>& traces,
                                             ModelGateway& gateway, const std::string& embedder,
                                             const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::string> manifest;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& sentences = traces[t].bridge.sentences;
    auto vectors = gateway.embed(embedder, sentences);
    char name[32];
    std::snprintf(name, sizeof(name), "trajectory_%04zu.csv", t + 1);
    fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    out << "index,sentence";
    for (std::size_t d = 0; d < vectors[0].size(); ++d) out << ",v" << (d + 1);
    out << "\n";
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      std::string quoted = sentences[i];
      std::string escaped;
      for (char c : quoted) {
        if (c == '"') escaped += "\"\"";
        else escaped += c;
      }
      out << (i + 1) << ",\"" << escaped << "\"";
      char buf[32];
      for (double v : vectors[i]) {
        std::snprintf(buf, sizeof(buf), ",%.17g", v);
        out << buf;
      }
      out << "\n";
    }
    manifest.push_back(path.string());
  }
  return manifest;
}

void to_json(json& j, const ProgressRecord& v) {
  j = json{{"bridge_id", v.bridge_id},
           {"distances", v.distances},
           {"progresses", v.progresses},
           {"average_progress", v.average_progress}};
  if (v.target_distances) j["target_distances"] = *v.target_distances;
  if (v.target_average_progress) j["target_average_progress"] = *v.target_average_progress;
}

void from_json(const json& j, ProgressRecord& v) {
  j.at("bridge_id").get_to(v.bridge_id);
  j.at("distances").get_to(v.distances);
  j.at("progresses").get_to(v.progresses);
  j.at("average_progress").get_to(v.average_progress);
  if (j.contains("target_distances"))
    v.target_distances = j.at("target_distances").get<std::vector<double>>();
  if (j.contains("target_average_progress"))
    v.target_average_progress = j.at("target_average_progress").get<double>();
}

void to_json(json& j, const ProgressSummary& v) {
  j = json{{"bridge_count", v.bridge_count},
           {"mean_average_progress", v.mean_average_progress},
           {"stddev_average_progress", v.stddev_average_progress}};
  if (v.target_mean_average_progress) {
    j["target_mean_average_progress"] = *v.target_mean_average_progress;
    j["target_stddev_average_progress"] = *v.target_stddev_average_progress;
  }
}

void from_json(const json& j, ProgressSummary& v) {
  j.at("bridge_count").get_to(v.bridge_count);
  j.at("mean_average_progress").get_to(v.mean_average_progress);
  j.at("stddev_average_progress").get_to(v.stddev_average_progress);
  if (j.contains("target_mean_average_progress")) {
    v.target_mean_average_progress = j.at("target_mean_average_progress").get<double>();
    v.target_stddev_average_progress = j.at("target_stddev_average_progress").get<double>();
  }
}

ScoreTable score_report(const RunReport& report, const std::vector<std::string>& scorers,
                        const std::map<std::string, std::string>& source_by_id,
                        const std::map<std::string, std::string>& gold_by_id, ModelGateway& gateway,
                        const std::string& lang_pair, const std::string& label_prefix) {
  ScoreTable table;
  table.lang_pair = lang_pair;
  table.scorers = scorers;

  bool any_bridg = false;
  for (const auto& r : report.per_sentence) any_bridg |= r.aggregate.has_value();

  auto method_rows = std::vector<std::pair<std::string, bool>>{{"zero_shot", false}};
  if (any_bridg) method_rows.emplace_back("bridg", true);

  for (const auto& [method, use_chosen] : method_rows) {
    std::map<std::string, double> row;
    for (const auto& scorer : scorers) {
      const auto& profile = gateway.profile(scorer);
      double sum = 0.0;
      std::int64_t n = 0;
      for (const auto& r : report.per_sentence) {
        if (r.failed) continue;
        std::string translation;
        if (!use_chosen) {
          translation = r.zero_shot.text;
        } else {
          translation = r.chosen == ChosenRoute::bridg ? r.aggregate->text : r.zero_shot.text;
        }
        if (translation.empty()) continue;

        auto src_it = source_by_id.find(r.end_id);
        if (src_it == source_by_id.end())
          throw usage_error("no source sentence for record '" + r.end_id + "'");
        std::optional<std::string> reference;
        if (profile.reference_based) {
          auto it = gold_by_id.find(r.end_id);
          if (it == gold_by_id.end())
            throw usage_error("scorer '" + scorer + "' is reference-based but no gold exists for '" +
                              r.end_id + "'");
          reference = it->second;
        }
        QeScore score = gateway.score_qe(scorer, src_it->second, translation, reference);
        sum += profile.qe_scale == QeScale::mqm ? *score.mqm_raw : score.value;
        ++n;
      }
      // DA-style means are displayed x100; MQM means stay on their raw scale.
      row[scorer] = n > 0 ? (profile.qe_scale == QeScale::mqm ? sum / static_cast<double>(n)
                                                              : sum / static_cast<double>(n) * 100.0)
                          : 0.0;
    }
    table.rows.emplace_back(label_prefix.empty() ? method : label_prefix + ":" + method, row);
  }
  return table;
}

json score_table_to_json(const ScoreTable& table) {
  json j{{"lang_pair", table.lang_pair}, {"scorers", table.scorers}};
  json rows = json::array();
  for (const auto& [label, cells] : table.rows) rows.push_back(json{{"method", label}, {"scores", cells}});
  j["rows"] = rows;
  return j;
}

std::string score_table_to_tsv(const ScoreTable& table) {
  std::ostringstream out;
  out << "method";
  for (const auto& s : table.scorers) out << "\t" << s;
  out << "\n";
  for (const auto& [label, cells] : table.rows) {
    out << label;
    for (const auto& s : table.scorers) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "\t%.2f", cells.at(s));
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace bridg
