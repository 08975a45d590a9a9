#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bridg/bridge_engine.hpp"
#include "bridg/config.hpp"
#include "bridg/errors.hpp"
#include "bridg/eval.hpp"
#include "bridg/mock_server.hpp"
#include "bridg/orchestrator.hpp"
#include "bridg/pool.hpp"
#include "bridg/toml.hpp"

namespace fs = std::filesystem;
using namespace bridg;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  std::optional<std::int64_t> seed;
  bool strict = false;
  std::optional<int> concurrency;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
  auto* config = cmd->add_option("--config", args.config_path, "TOML configuration file");
  if (needs_config) config->required();
  cmd->add_option("--set", args.overrides, "Override a config key (dotted.key=value); repeatable");
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Override run.seed");
  cmd->add_flag("--strict", args.strict, "Fail the run on the first provider error");
  cmd->add_option("--concurrency", args.concurrency, "Override run.concurrency");
}

PipelineConfig load_effective_config(const CommonArgs& args) {
  std::vector<std::string> overrides = args.overrides;
  if (args.seed) overrides.push_back("run.seed=" + std::to_string(*args.seed));
  if (args.strict) overrides.push_back("run.strict=true");
  if (args.concurrency) overrides.push_back("run.concurrency=" + std::to_string(*args.concurrency));
  return load_config(args.config_path, overrides);
}

std::string default_cache_path(const PipelineConfig& cfg, const std::string& out_dir) {
  if (cfg.cache_path && !cfg.cache_path->empty()) return *cfg.cache_path;
  return (fs::path(out_dir) / "cache.jsonl").string();
}

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(c));
    else if (!out.empty() && out.back() != '-') out += '-';
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

int run_build_pool(const CommonArgs& args) {
  PipelineConfig cfg = load_effective_config(args);
  if (cfg.pool.corpus.empty()) throw config_error("[pool].corpus is required for build-pool");

  std::vector<ProviderProfile> profiles;
  for (const auto& [id, p] : cfg.backends) profiles.push_back(p);
  fs::create_directories(args.out_dir);
  auto cache = std::make_shared<ResponseCache>(fs::path(default_cache_path(cfg, args.out_dir)));
  ModelGateway gateway(profiles, cache);

  auto corpus = load_corpus(cfg.pool.corpus, cfg.lang_pair, cfg.pool.gold);
  std::cerr << "building pool from " << corpus.size() << " dev sentences\n";

  PoolBuildConfig pool_cfg;
  pool_cfg.samples_per_sentence = cfg.pool.samples_per_sentence;
  pool_cfg.pool_size = cfg.pool.pool_size;
  pool_cfg.translator = cfg.translator;
  pool_cfg.qe = cfg.qe;
  pool_cfg.embedder = cfg.embedder;
  pool_cfg.allow_reference_qe = cfg.pool.allow_reference_qe;

  auto entries = build_pool(corpus, pool_cfg, gateway, TranslationPromptAssets::builtin(), cfg.seed);
  std::string pool_path = cfg.pool_path.empty() ? (fs::path(args.out_dir) / "pool.jsonl").string()
                                                : cfg.pool_path;
  save_pool(entries, pool_path);
  std::cerr << "wrote " << entries.size() << " pool entries to " << pool_path << "\n";
  return 0;
}

int run_translate_once(PipelineConfig cfg, const std::string& out_dir) {
  std::string cache_path = default_cache_path(cfg, out_dir);
  PipelineContext ctx = PipelineContext::create(std::move(cfg), cache_path);
  auto corpus = load_corpus(ctx.cfg.corpus_path, ctx.cfg.lang_pair, ctx.cfg.gold_path);
  std::cerr << "translating " << corpus.size() << " sentences into " << out_dir << "\n";
  RunReport report = run_corpus(corpus, ctx, out_dir);
  std::cerr << "done: " << report.summary.corpus_size << " records, " << report.summary.bridged_count
            << " bridged, " << report.summary.selected_count << " selected, "
            << report.summary.failed_count << " failed\n";
  return report.summary.failed_count > 0 && ctx.cfg.strict ? 1 : 0;
}

int run_translate(const CommonArgs& args, bool sweep) {
  PipelineConfig cfg = load_effective_config(args);
  if (cfg.corpus_path.empty()) throw config_error("paths.corpus is required for translate");
  if (!sweep) return run_translate_once(std::move(cfg), args.out_dir);

  if (cfg.sweep.strategies.empty() || cfg.sweep.ks.empty() || cfg.sweep.aggregations.empty() ||
      cfg.sweep.filters.empty())
    throw config_error("--sweep needs [sweep] strategies, ks, aggregations, and filters");

  json grid = json::array();
  for (const auto& strategy : cfg.sweep.strategies) {
    for (std::int64_t k : cfg.sweep.ks) {
      for (const auto& aggregation : cfg.sweep.aggregations) {
        for (const auto& filter_name : cfg.sweep.filters) {
          PipelineConfig combo = cfg;
          combo.selection.strategy = parse_strategy(strategy);
          combo.selection.k = static_cast<int>(k);
          combo.aggregation = aggregation_kind_from_string(aggregation);
          if (filter_name == "all") {
            combo.filters.pre = false;
            combo.filters.post = false;
          } else if (filter_name == "pre") {
            combo.filters.pre = true;
            combo.filters.post = false;
          } else if (filter_name == "post") {
            combo.filters.pre = false;
            combo.filters.post = true;
          } else if (filter_name == "prepost") {
            combo.filters.pre = true;
            combo.filters.post = true;
          } else {
            throw config_error("unknown sweep filter '" + filter_name + "'");
          }
          if (combo.selection.strategy.kind == SelectionKind::tops && combo.selection.k > 3) continue;
          std::string name = slug(strategy) + "_k" + std::to_string(k) + "_" + aggregation + "_" +
                             filter_name;
          std::string combo_dir = (fs::path(args.out_dir) / name).string();
          std::cerr << "sweep: " << name << "\n";
          // one shared cache across the whole sweep
          combo.cache_path = default_cache_path(cfg, args.out_dir);
          PipelineContext ctx = PipelineContext::create(combo);
          auto corpus = load_corpus(ctx.cfg.corpus_path, ctx.cfg.lang_pair, ctx.cfg.gold_path);
          RunReport report = run_corpus(corpus, ctx, combo_dir);
          grid.push_back(json{{"name", name},
                              {"strategy", strategy},
                              {"k", k},
                              {"aggregation", aggregation},
                              {"filters", filter_name},
                              {"mean_chosen_qe", report.summary.mean_chosen_qe},
                              {"mean_zero_shot_qe", report.summary.mean_zero_shot_qe},
                              {"bridged_count", report.summary.bridged_count},
                              {"selected_count", report.summary.selected_count}});
        }
      }
    }
  }
  std::ofstream grid_out(fs::path(args.out_dir) / "sweep_summary.json");
  grid_out << grid.dump(2) << "\n";
  std::ofstream tsv_out(fs::path(args.out_dir) / "sweep_summary.tsv");
  tsv_out << "name\tstrategy\tk\taggregation\tfilters\tmean_chosen_qe\tbridged\tselected\n";
  for (const auto& row : grid) {
    tsv_out << row.at("name").get<std::string>() << "\t" << row.at("strategy").get<std::string>()
            << "\t" << row.at("k").get<std::int64_t>() << "\t"
            << row.at("aggregation").get<std::string>() << "\t"
            << row.at("filters").get<std::string>() << "\t" << row.at("mean_chosen_qe").get<double>()
            << "\t" << row.at("bridged_count").get<std::int64_t>() << "\t"
            << row.at("selected_count").get<std::int64_t>() << "\n";
  }
  std::cerr << "sweep grid written to " << (fs::path(args.out_dir) / "sweep_summary.tsv").string()
            << "\n";
  return 0;
}

int run_baseline_cmd(const CommonArgs& args) {
  PipelineConfig cfg = load_effective_config(args);
  if (cfg.corpus_path.empty()) throw config_error("paths.corpus is required for baseline");
  BaselineConfig bl;
  if (cfg.baseline.mode == "zero_shot") bl.mode = BaselineConfig::Mode::zero_shot;
  else if (cfg.baseline.mode == "k_shot") bl.mode = BaselineConfig::Mode::k_shot;
  else throw config_error("[baseline].mode must be zero_shot or k_shot");
  bl.k = cfg.baseline.k;
  if (bl.mode == BaselineConfig::Mode::k_shot && bl.k < 1)
    throw config_error("[baseline].k must be >= 1 for k_shot");

  std::string cache_path = default_cache_path(cfg, args.out_dir);
  PipelineContext ctx = PipelineContext::create(std::move(cfg), cache_path);
  auto corpus = load_corpus(ctx.cfg.corpus_path, ctx.cfg.lang_pair, ctx.cfg.gold_path);
  std::cerr << "baseline (" << ctx.cfg.baseline.mode << ", k=" << bl.k << ") over " << corpus.size()
            << " sentences\n";
  RunReport report = run_baseline(corpus, bl, ctx, args.out_dir);
  std::cerr << "done: mean QE " << report.summary.mean_zero_shot_qe << "\n";
  return 0;
}

int run_evaluate(const CommonArgs& args) {
  PipelineConfig cfg = load_effective_config(args);
  if (cfg.evaluate.runs.empty()) throw config_error("[evaluate].runs is required");
  if (cfg.evaluate.scorers.empty()) throw config_error("[evaluate].scorers is required");
  if (cfg.corpus_path.empty()) throw config_error("paths.corpus is required to recover sources");

  for (const auto& scorer : cfg.evaluate.scorers) {
    auto it = cfg.backends.find(scorer);
    if (it == cfg.backends.end()) throw config_error("unknown scorer backend '" + scorer + "'");
    if (it->second.reference_based && !cfg.evaluate.gold)
      throw usage_error("scorer '" + scorer + "' is reference-based but [evaluate].gold is unset");
  }

  std::vector<ProviderProfile> profiles;
  for (const auto& [id, p] : cfg.backends) profiles.push_back(p);
  fs::create_directories(args.out_dir);
  auto cache = std::make_shared<ResponseCache>(fs::path(default_cache_path(cfg, args.out_dir)));
  ModelGateway gateway(profiles, cache);

  auto corpus = load_corpus(cfg.corpus_path, cfg.lang_pair, cfg.evaluate.gold);
  std::map<std::string, std::string> sources;
  std::map<std::string, std::string> golds;
  for (const auto& pair : corpus) {
    sources[pair.id] = pair.source;
    if (pair.gold) golds[pair.id] = *pair.gold;
  }

  json all = json::array();
  std::string tsv;
  for (std::size_t i = 0; i < cfg.evaluate.runs.size(); ++i) {
    const std::string& run_dir = cfg.evaluate.runs[i];
    std::string label = i < cfg.evaluate.labels.size() ? cfg.evaluate.labels[i]
                                                       : fs::path(run_dir).filename().string();
    RunReport report = load_run(run_dir);
    ScoreTable table = score_report(report, cfg.evaluate.scorers, sources, golds, gateway,
                                    cfg.lang_pair.source + "-" + cfg.lang_pair.target, label);
    all.push_back(score_table_to_json(table));
    tsv += score_table_to_tsv(table);
  }
  std::ofstream json_out(fs::path(args.out_dir) / "score_table.json");
  json_out << all.dump(2) << "\n";
  std::ofstream tsv_out(fs::path(args.out_dir) / "score_table.tsv");
  tsv_out << tsv;
  std::cout << tsv;
  return 0;
}

int run_analyze(const CommonArgs& args) {
  PipelineConfig cfg = load_effective_config(args);
  if (cfg.analyze.run.empty()) throw config_error("[analyze].run is required");

  std::vector<ProviderProfile> profiles;
  for (const auto& [id, p] : cfg.backends) profiles.push_back(p);
  fs::create_directories(args.out_dir);
  auto cache = std::make_shared<ResponseCache>(fs::path(default_cache_path(cfg, args.out_dir)));
  ModelGateway gateway(profiles, cache);

  RunReport report = load_run(cfg.analyze.run);
  std::vector<GradualTrace> traces;
  std::vector<std::optional<std::string>> golds;
  std::map<std::string, std::string> gold_by_id;
  if (cfg.gold_path && !cfg.corpus_path.empty()) {
    for (const auto& pair : load_corpus(cfg.corpus_path, cfg.lang_pair, cfg.gold_path)) {
      if (pair.gold) gold_by_id[pair.id] = *pair.gold;
    }
  }
  for (const auto& record : report.per_sentence) {
    if (record.failed) continue;
    for (const auto& trace : record.bridges) {
      traces.push_back(trace);
      auto it = gold_by_id.find(record.end_id);
      golds.push_back(it == gold_by_id.end() ? std::optional<std::string>{}
                                             : std::optional<std::string>{it->second});
    }
  }
  if (traces.empty()) {
    std::cerr << "no bridges in run '" << cfg.analyze.run << "'\n";
    std::ofstream manifest(fs::path(args.out_dir) / "trajectories_manifest.json");
    manifest << "[]\n";
    return 0;
  }

  auto [records, summary] = analyze_bridges(traces, gateway, cfg.embedder, golds);
  std::ofstream records_out(fs::path(args.out_dir) / "progress.jsonl");
  for (const auto& r : records) records_out << json(r).dump() << "\n";
  std::ofstream summary_out(fs::path(args.out_dir) / "progress_summary.json");
  summary_out << json(summary).dump(2) << "\n";
  if (cfg.analyze.export_csv) {
    auto manifest =
        export_trajectories(traces, gateway, cfg.embedder, (fs::path(args.out_dir) / "trajectories").string());
    std::ofstream manifest_out(fs::path(args.out_dir) / "trajectories_manifest.json");
    manifest_out << json(manifest).dump(2) << "\n";
  }
  std::cerr << "analyzed " << summary.bridge_count << " bridges; mean progress "
            << summary.mean_average_progress << " (stddev " << summary.stddev_average_progress
            << ")\n";
  return 0;
}

int run_cost_report(const CommonArgs& args) {
  PipelineConfig cfg = load_effective_config(args);
  if (cfg.cost.run.empty()) throw config_error("[cost].run is required");
  RunReport report = load_run(cfg.cost.run);
  json table = cost_report(report);
  fs::create_directories(args.out_dir);
  std::ofstream out(fs::path(args.out_dir) / "cost_report.json");
  out << table.dump(2) << "\n";
  std::cout << cost_report_text(table);
  return 0;
}

int run_mock_server(const std::string& scripts_path, const std::string& host, int port) {
  auto engine = MockEngine::from_scripts_file(scripts_path);
  MockServer server(engine);
  std::cerr << "mock server listening on " << host << ":" << port << "\n";
  server.run(host, port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BridG MT pipeline"};
  app.require_subcommand(1);

  CommonArgs build_pool_args, translate_args, baseline_args, evaluate_args, analyze_args, cost_args;
  bool sweep = false;

  auto* build_pool_cmd = app.add_subcommand("build-pool", "Construct the start sentence pool");
  add_common(build_pool_cmd, build_pool_args);

  auto* translate_cmd = app.add_subcommand("translate", "Run the full pipeline over a corpus");
  add_common(translate_cmd, translate_args);
  translate_cmd->add_flag("--sweep", sweep, "Expand the [sweep] grid of configurations");

  auto* baseline_cmd = app.add_subcommand("baseline", "Run the zero-shot or k-shot baseline");
  add_common(baseline_cmd, baseline_args);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score persisted runs with QE backends");
  add_common(evaluate_cmd, evaluate_args);

  auto* analyze_cmd = app.add_subcommand("analyze-bridges", "Progress analysis and CSV export");
  add_common(analyze_cmd, analyze_args);

  auto* cost_cmd = app.add_subcommand("cost-report", "Per-stage timing table for a run");
  add_common(cost_cmd, cost_args);

  std::string scripts_path, host = "127.0.0.1";
  int port = 8080;
  auto* server_cmd = app.add_subcommand("mock-server", "Serve scripted providers over HTTP");
  server_cmd->add_option("--scripts", scripts_path, "Scripts JSON file")->required();
  server_cmd->add_option("--port", port, "Port to listen on");
  server_cmd->add_option("--host", host, "Host to bind");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (build_pool_cmd->parsed()) return run_build_pool(build_pool_args);
    if (translate_cmd->parsed()) return run_translate(translate_args, sweep);
    if (baseline_cmd->parsed()) return run_baseline_cmd(baseline_args);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate_args);
    if (analyze_cmd->parsed()) return run_analyze(analyze_args);
    if (cost_cmd->parsed()) return run_cost_report(cost_args);
    if (server_cmd->parsed()) return run_mock_server(scripts_path, host, port);
  } catch (const Error& e) {
    std::cerr << "bridg: " << e.what() << "\n";
    return (e.kind() == ErrorKind::usage || e.kind() == ErrorKind::config) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "bridg: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
