#include "bridg/orchestrator.hpp"

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "bridg/bridge_engine.hpp"
#include "bridg/errors.hpp"
#include "bridg/hash.hpp"
#include "bridg/pool.hpp"
#include "bridg/selection.hpp"
#include "bridg/text.hpp"

namespace bridg {

namespace {

namespace fs = std::filesystem;

// Measures one pipeline stage: wall time from the steady clock, or the
// virtual cost of the provider calls issued while the stage ran.
class StageClock {
 public:
  explicit StageClock(TimingMode mode) : mode_(mode) {}

  void start() {
    if (mode_ == TimingMode::wall) {
      begin_ = std::chrono::steady_clock::now();
    } else {
      ModelGateway::meter_reset();
    }
  }

  double stop() {
    if (mode_ == TimingMode::wall) {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count();
    }
    return ModelGateway::meter_read().seconds;
  }

 private:
  TimingMode mode_;
  std::chrono::steady_clock::time_point begin_;
};

std::string zero_shot_translate(const SentencePair& end, PipelineContext& ctx, std::int64_t seed) {
  ChatRequest request;
  request.backend_id = ctx.cfg.translator;
  request.messages = translation_messages(
      ctx.translation_assets.render_system(end.lang_pair.target), {}, end.source);
  request.sampling = ctx.gateway->profile(ctx.cfg.translator).default_sampling;
  request.seed = seed;
  return text::normalize(ctx.gateway->chat(request));
}

}  // namespace

std::int64_t sentence_seed(std::int64_t run_seed, const std::string& end_id) {
  return static_cast<std::int64_t>(mix64(static_cast<std::uint64_t>(run_seed), fnv1a64(end_id)));
}

PipelineContext PipelineContext::create(PipelineConfig cfg, const std::optional<std::string>& cache_path) {
  validate_pipeline(cfg);

  PipelineContext ctx;
  std::vector<ProviderProfile> profiles;
  for (const auto& [id, p] : cfg.backends) profiles.push_back(p);
  std::shared_ptr<ResponseCache> cache;
  std::optional<std::string> effective = cache_path ? cache_path : cfg.cache_path;
  if (effective && !effective->empty()) cache = std::make_shared<ResponseCache>(fs::path(*effective));
  ctx.gateway = std::make_shared<ModelGateway>(std::move(profiles), cache);

  if (cfg.pool_path.empty()) throw config_error("paths.pool is required for pipeline runs");
  ctx.pool = load_pool(cfg.pool_path);
  if (ctx.pool.empty()) throw config_error("pool '" + cfg.pool_path + "' is empty");

  ctx.bridging_assets =
      cfg.assets_dir ? BridgingPromptAssets::load(*cfg.assets_dir) : BridgingPromptAssets::builtin();
  ctx.translation_assets = TranslationPromptAssets::builtin();
  ctx.cfg = std::move(cfg);

  if (ctx.cfg.filters.pre) {
    if (ctx.cfg.filters.tau) {
      ctx.policy.pre_tau = *ctx.cfg.filters.tau;
    } else {
      // tau from the holdout: zero-shot translate each sentence, score it,
      // take the configured percentile (the holdout split exists for this).
      auto holdout = load_corpus(*ctx.cfg.filters.holdout, ctx.cfg.lang_pair);
      if (holdout.empty()) throw config_error("holdout corpus is empty");
      std::vector<std::pair<std::string, std::string>> scored;
      scored.reserve(holdout.size());
      for (const auto& pair : holdout) {
        std::int64_t seed = sentence_seed(ctx.cfg.seed, pair.id);
        scored.emplace_back(pair.source, zero_shot_translate(pair, ctx, seed));
      }
      ctx.policy.pre_tau =
          compute_pre_threshold(scored, ctx.cfg.qe, *ctx.gateway, *ctx.cfg.filters.tau_percentile);
    }
  }
  ctx.policy.post = ctx.cfg.filters.post;
  return ctx;
}

DecisionRecord translate_sentence(const SentencePair& end, PipelineContext& ctx) {
  const PipelineConfig& cfg = ctx.cfg;
  const std::int64_t seed = sentence_seed(cfg.seed, end.id);

  DecisionRecord record;
  record.end_id = end.id;
  for (const auto& stage : kStageNames) record.timings[stage] = 0.0;

  StageClock clock(cfg.timing_mode);
  try {
    clock.start();
    std::string zero_shot = zero_shot_translate(end, ctx, seed);
    record.timings["zero_shot"] = clock.stop();

    clock.start();
    record.zero_shot = {zero_shot, ctx.gateway->score_qe(cfg.qe, end.source, zero_shot)};
    if (prefilter_keeps_zero_shot(record.zero_shot.qe, ctx.policy)) {
      record.prefiltered_out = true;
      record.chosen = ChosenRoute::zero_shot;
      record.timings["pre_filter"] = clock.stop();
      return record;
    }
    record.timings["pre_filter"] = clock.stop();

    clock.start();
    auto scored = score_candidates(end.source, ctx.pool, *ctx.gateway, cfg.embedder);
    auto starts = select_starts(scored, cfg.selection, static_cast<std::uint64_t>(seed));
    record.timings["selection"] = clock.stop();

    clock.start();
    std::vector<Bridge> bridges;
    bridges.reserve(starts.size());
    for (const auto& start : starts) {
      Bridge bridge =
          generate_bridge(start.pair.source, end.source, cfg.gradual, ctx.bridging_assets,
                          *ctx.gateway, seed);
      if (cfg.gradual.sampling_mode == SamplingMode::sampled) bridge = sample_bridge(bridge);
      bridges.push_back(std::move(bridge));
    }
    record.timings["bridging"] = clock.stop();

    clock.start();
    for (const auto& bridge : bridges) {
      record.bridges.push_back(gradual_mt(bridge, cfg.gradual, ctx.translation_assets,
                                          end.lang_pair.target, *ctx.gateway, seed));
    }
    record.timings["gradual_mt"] = clock.stop();

    clock.start();
    std::vector<std::string> candidates;
    candidates.reserve(record.bridges.size());
    for (const auto& trace : record.bridges) candidates.push_back(trace.final_translation);
    std::string aggregate;
    if (candidates.size() == 1) {
      aggregate = candidates.front();  // aggregation is skipped for a single start
    } else if (cfg.aggregation == AggregationKind::polling) {
      aggregate = aggregate_polling(candidates, static_cast<std::uint64_t>(seed));
    } else {
      aggregate = text::normalize(aggregate_prompting(end.source, candidates, cfg.translator,
                                                      *ctx.gateway, ctx.translation_assets,
                                                      end.lang_pair.target, seed));
    }
    record.aggregate = ScoredText{aggregate, QeScore{}};
    record.timings["aggregation"] = clock.stop();

    clock.start();
    record = apply_filters(std::move(record), ctx.policy, cfg.qe, *ctx.gateway, end.source);
    record.timings["post_filter"] = clock.stop();
  } catch (const GradualMtError& e) {
    if (cfg.strict) throw;
    record.failed = true;
    record.error = e.what();
    record.bridges.push_back(e.partial());  // partial trace kept for diagnostics
    record.chosen = ChosenRoute::zero_shot;
    record.aggregate.reset();
  } catch (const Error& e) {
    if (cfg.strict) throw;
    record.failed = true;
    record.error = e.what();
    record.chosen = ChosenRoute::zero_shot;
    record.aggregate.reset();
  }
  return record;
}

// --- run directory plumbing --------------------------------------------------

RunWriter::RunWriter(const std::string& out_dir, const PipelineConfig& cfg) {
  fs::create_directories(out_dir);
  records_path = (fs::path(out_dir) / "records.jsonl").string();
  summary_path = (fs::path(out_dir) / "summary.json").string();
  snapshot_path = (fs::path(out_dir) / "config.snapshot").string();

  const std::string fingerprint = fingerprint_config(cfg);
  if (fs::exists(snapshot_path)) {
    PipelineConfig previous = load_config(snapshot_path);
    if (fingerprint_config(previous) != fingerprint)
      throw config_error("run directory '" + out_dir +
                         "' holds a different configuration; use a fresh --out");
  } else {
    std::ofstream snap(snapshot_path);
    if (!snap) throw io_error("cannot write '" + snapshot_path + "'");
    snap << config_to_toml(cfg);
  }

  if (fs::exists(records_path)) {
    std::ifstream in(records_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      try {
        existing_.push_back(json::parse(line).get<DecisionRecord>());
      } catch (const json::exception& e) {
        throw parse_error("records file '" + records_path + "' line " + std::to_string(lineno) +
                          ": " + e.what());
      }
    }
  }
  out_ = std::make_unique<std::ofstream>(records_path, std::ios::app);
  if (!*out_) throw io_error("cannot open '" + records_path + "' for append");
}

void RunWriter::append(const DecisionRecord& record) {
  *out_ << json(record).dump() << "\n";
  out_->flush();
}

void RunWriter::finish(const RunSummary& summary, const std::string& fingerprint, std::int64_t seed) {
  json doc{{"summary", summary}, {"config_fingerprint", fingerprint}, {"seed", seed}};
  std::ofstream out(summary_path);
  if (!out) throw io_error("cannot write '" + summary_path + "'");
  out << doc.dump(2) << "\n";
}

RunReport run_corpus(const std::vector<SentencePair>& corpus, PipelineContext& ctx,
                     const std::string& out_dir) {
  RunWriter writer(out_dir, ctx.cfg);

  std::map<std::string, DecisionRecord> done;
  for (const auto& r : writer.existing()) done[r.end_id] = r;

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!done.count(corpus[i].id)) todo.push_back(i);
  }

  // Bounded worker pool; records are emitted in corpus order by a single
  // writer regardless of completion order.
  std::mutex mu;
  std::condition_variable cv;
  std::map<std::size_t, DecisionRecord> completed;
  std::size_t next_task = 0;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      std::size_t task;
      {
        std::lock_guard lock(mu);
        if (failure || next_task >= todo.size()) return;
        task = next_task++;
      }
      try {
        DecisionRecord record = translate_sentence(corpus[todo[task]], ctx);
        std::lock_guard lock(mu);
        completed[task] = std::move(record);
        cv.notify_all();
      } catch (...) {
        std::lock_guard lock(mu);
        failure = std::current_exception();
        cv.notify_all();
        return;
      }
    }
  };

  std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, ctx.cfg.concurrency)), todo.size());
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);

  std::vector<DecisionRecord> fresh(todo.size());
  {
    std::unique_lock lock(mu);
    for (std::size_t emit = 0; emit < todo.size(); ++emit) {
      cv.wait(lock, [&] { return failure || completed.count(emit) > 0; });
      if (failure) break;
      fresh[emit] = std::move(completed.at(emit));
      completed.erase(emit);
      lock.unlock();
      writer.append(fresh[emit]);
      lock.lock();
    }
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);

  RunReport report;
  report.seed = ctx.cfg.seed;
  report.config_fingerprint = fingerprint_config(ctx.cfg);
  report.per_sentence.reserve(corpus.size());
  std::map<std::size_t, const DecisionRecord*> fresh_by_index;
  for (std::size_t t = 0; t < todo.size(); ++t) fresh_by_index[todo[t]] = &fresh[t];
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto it = fresh_by_index.find(i);
    if (it != fresh_by_index.end()) report.per_sentence.push_back(*it->second);
    else report.per_sentence.push_back(done.at(corpus[i].id));
  }

  std::optional<double> percentile;
  if (ctx.cfg.filters.pre && !ctx.cfg.filters.tau) percentile = ctx.cfg.filters.tau_percentile;
  report.summary = summarize(report.per_sentence, ctx.policy.pre_tau, percentile);
  writer.finish(report.summary, report.config_fingerprint, report.seed);
  return report;
}

RunReport load_run(const std::string& run_dir) {
  fs::path dir(run_dir);
  std::ifstream summary_in(dir / "summary.json");
  if (!summary_in) throw io_error("cannot open '" + (dir / "summary.json").string() + "'");
  json summary_doc;
  try {
    summary_in >> summary_doc;
  } catch (const json::exception& e) {
    throw parse_error("summary.json: " + std::string(e.what()));
  }

  RunReport report;
  summary_doc.at("summary").get_to(report.summary);
  summary_doc.at("config_fingerprint").get_to(report.config_fingerprint);
  summary_doc.at("seed").get_to(report.seed);

  std::ifstream records_in(dir / "records.jsonl");
  if (!records_in) throw io_error("cannot open '" + (dir / "records.jsonl").string() + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(records_in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      report.per_sentence.push_back(json::parse(line).get<DecisionRecord>());
    } catch (const json::exception& e) {
      throw parse_error("records.jsonl line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return report;
}

json cost_report(const RunReport& report) {
  json table;
  table["corpus_size"] = report.summary.corpus_size;
  json stages = json::array();
  double grand_total = 0.0;
  for (const auto& [stage, total] : report.summary.stage_total_seconds) grand_total += total;
  for (const auto& stage : kStageNames) {
    auto it = report.summary.stage_total_seconds.find(stage);
    double total = it == report.summary.stage_total_seconds.end() ? 0.0 : it->second;
    json row{{"stage", stage}, {"total_s", total}};
    row["mean_s"] =
        report.summary.corpus_size > 0 ? total / static_cast<double>(report.summary.corpus_size) : 0.0;
    row["percent"] = grand_total > 0.0 ? total / grand_total * 100.0 : 0.0;
    stages.push_back(row);
  }
  table["stages"] = stages;
  table["total_s"] = grand_total;
  return table;
}

std::string cost_report_text(const json& table) {
  std::ostringstream out;
  out << "stage            total_s      mean_s     percent\n";
  for (const auto& row : table.at("stages")) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-14s %9.4f   %9.5f   %8.2f%%\n",
                  row.at("stage").get<std::string>().c_str(), row.at("total_s").get<double>(),
                  row.at("mean_s").get<double>(), row.at("percent").get<double>());
    out << line;
  }
  char total[64];
  std::snprintf(total, sizeof(total), "total          %9.4f\n", table.at("total_s").get<double>());
  out << total;
  return out.str();
}

}  // namespace bridg
