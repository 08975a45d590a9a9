#include "bridg/config.hpp"

#include <fstream>
#include <set>

#include "bridg/errors.hpp"
#include "bridg/hash.hpp"
#include "bridg/toml.hpp"

namespace bridg {

std::string to_string(TimingMode mode) {
  return mode == TimingMode::wall ? "wall" : "virtual";
}

TimingMode timing_mode_from_string(const std::string& s) {
  if (s == "wall") return TimingMode::wall;
  if (s == "virtual") return TimingMode::virtual_clock;
  throw config_error("unknown timing mode '" + s + "' (expected wall|virtual)");
}

namespace {

// Typed readers that reject unknown keys per section.
class Section {
 public:
  Section(const json& tree, std::string name) : name_(std::move(name)) {
    if (tree.contains(name_)) {
      if (!tree.at(name_).is_object()) throw config_error("[" + name_ + "] must be a table");
      table_ = &tree.at(name_);
    }
  }

  bool present() const { return table_ != nullptr; }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!table_ || !table_->contains(key)) return fallback;
    try {
      return table_->at(key).get<T>();
    } catch (const json::exception&) {
      throw config_error("[" + name_ + "]." + key + " has the wrong type");
    }
  }

  template <typename T>
  std::optional<T> get_optional(const std::string& key) {
    used_.insert(key);
    if (!table_ || !table_->contains(key)) return std::nullopt;
    try {
      return table_->at(key).get<T>();
    } catch (const json::exception&) {
      throw config_error("[" + name_ + "]." + key + " has the wrong type");
    }
  }

  template <typename T>
  T require(const std::string& key) {
    auto v = get_optional<T>(key);
    if (!v) throw config_error("[" + name_ + "]." + key + " is required");
    return *v;
  }

  void finish() {
    if (!table_) return;
    for (auto it = table_->begin(); it != table_->end(); ++it) {
      if (!used_.count(it.key()))
        throw config_error("unknown key [" + name_ + "]." + it.key());
    }
  }

 private:
  std::string name_;
  const json* table_ = nullptr;
  std::set<std::string> used_;
};

LangPair parse_lang_pair(const std::string& s) {
  auto dash = s.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 >= s.size())
    throw config_error("lang_pair must look like 'en-ko', got '" + s + "'");
  return LangPair{s.substr(0, dash), s.substr(dash + 1)};
}

ProviderProfile backend_from_tree(const std::string& id, const json& table) {
  static const std::set<std::string> known = {
      "kind",          "endpoint",       "model",      "api_key_env",       "temperature",
      "top_p",         "max_tokens",     "rate_limit", "max_retries",       "retry_base_delay_s",
      "retry_max_delay_s", "timeout_s",  "virtual_cost_s", "qe_scale",      "reference_based"};
  for (auto it = table.begin(); it != table.end(); ++it) {
    if (!known.count(it.key()))
      throw config_error("unknown key [backends." + id + "]." + it.key());
  }
  ProviderProfile p;
  p.backend_id = id;
  p.kind = provider_kind_from_string(table.value("kind", std::string("chat")));
  if (!table.contains("endpoint")) throw config_error("[backends." + id + "].endpoint is required");
  p.endpoint = table.at("endpoint").get<std::string>();
  p.model = table.value("model", std::string());
  p.api_key_env = table.value("api_key_env", std::string());
  p.default_sampling.temperature = table.value("temperature", 0.3);
  p.default_sampling.top_p = table.value("top_p", 1.0);
  p.default_sampling.max_tokens = table.value("max_tokens", 512);
  p.rate_limit = table.value("rate_limit", 4);
  p.max_retries = table.value("max_retries", 3);
  p.retry_base_delay_s = table.value("retry_base_delay_s", 0.05);
  p.retry_max_delay_s = table.value("retry_max_delay_s", 2.0);
  p.timeout_s = table.value("timeout_s", 60.0);
  p.virtual_cost_s = table.value("virtual_cost_s", 0.0);
  p.qe_scale = qe_scale_from_string(table.value("qe_scale", std::string("unit")));
  p.reference_based = table.value("reference_based", false);
  if (p.rate_limit < 1) throw config_error("[backends." + id + "].rate_limit must be >= 1");
  if (p.default_sampling.max_tokens < 1)
    throw config_error("[backends." + id + "].max_tokens must be >= 1");
  if (p.default_sampling.temperature < 0.0)
    throw config_error("[backends." + id + "].temperature must be >= 0");
  if (p.default_sampling.top_p <= 0.0 || p.default_sampling.top_p > 1.0)
    throw config_error("[backends." + id + "].top_p must lie in (0,1]");
  return p;
}

}  // namespace

PipelineConfig config_from_tree(const json& tree) {
  static const std::set<std::string> known_sections = {
      "run",     "paths",   "selection", "gradual", "aggregation", "filters", "pipeline",
      "backends", "pool",   "baseline",  "sweep",   "evaluate",    "analyze", "cost"};
  for (auto it = tree.begin(); it != tree.end(); ++it) {
    if (!known_sections.count(it.key())) throw config_error("unknown config section [" + it.key() + "]");
  }

  PipelineConfig cfg;

  Section run(tree, "run");
  cfg.lang_pair = parse_lang_pair(run.get<std::string>("lang_pair", "en-ko"));
  cfg.seed = run.get<std::int64_t>("seed", 0);
  cfg.concurrency = static_cast<int>(run.get<std::int64_t>("concurrency", 1));
  cfg.strict = run.get<bool>("strict", false);
  cfg.timing_mode = timing_mode_from_string(run.get<std::string>("timing_mode", "wall"));
  run.finish();

  Section paths(tree, "paths");
  cfg.pool_path = paths.get<std::string>("pool", "");
  cfg.corpus_path = paths.get<std::string>("corpus", "");
  cfg.gold_path = paths.get_optional<std::string>("gold");
  cfg.cache_path = paths.get_optional<std::string>("cache");
  cfg.assets_dir = paths.get_optional<std::string>("assets");
  paths.finish();

  Section selection(tree, "selection");
  cfg.selection.strategy = parse_strategy(selection.get<std::string>("strategy", "Sort(S-T)"));
  cfg.selection.strategy.filter_width =
      static_cast<int>(selection.get<std::int64_t>("filter_width", 10));
  cfg.selection.k = static_cast<int>(selection.get<std::int64_t>("k", 3));
  selection.finish();

  Section gradual(tree, "gradual");
  cfg.gradual.sampling_mode =
      sampling_mode_from_string(gradual.get<std::string>("sampling_mode", "full"));
  cfg.gradual.max_bridge_len = static_cast<int>(gradual.get<std::int64_t>("max_bridge_len", 16));
  gradual.finish();

  Section aggregation(tree, "aggregation");
  cfg.aggregation = aggregation_kind_from_string(aggregation.get<std::string>("kind", "prompting"));
  aggregation.finish();

  Section filters(tree, "filters");
  cfg.filters.pre = filters.get<bool>("pre", false);
  cfg.filters.tau = filters.get_optional<double>("tau");
  cfg.filters.tau_percentile = filters.get_optional<double>("tau_percentile");
  cfg.filters.holdout = filters.get_optional<std::string>("holdout");
  cfg.filters.post = filters.get<bool>("post", false);
  filters.finish();

  Section pipeline(tree, "pipeline");
  cfg.translator = pipeline.get<std::string>("translator", "translator");
  cfg.bridger = pipeline.get<std::string>("bridger", "bridger");
  cfg.embedder = pipeline.get<std::string>("embedder", "embedder");
  cfg.qe = pipeline.get<std::string>("qe", "qe");
  pipeline.finish();
  cfg.gradual.translator = cfg.translator;
  cfg.gradual.bridger = cfg.bridger;

  if (tree.contains("backends")) {
    const json& backends = tree.at("backends");
    if (!backends.is_object()) throw config_error("[backends] must be a table of tables");
    for (auto it = backends.begin(); it != backends.end(); ++it) {
      cfg.backends[it.key()] = backend_from_tree(it.key(), it.value());
    }
  }

  Section pool(tree, "pool");
  cfg.pool.samples_per_sentence = static_cast<int>(pool.get<std::int64_t>("samples_per_sentence", 5));
  cfg.pool.pool_size = static_cast<int>(pool.get<std::int64_t>("pool_size", 100));
  cfg.pool.corpus = pool.get<std::string>("corpus", "");
  cfg.pool.gold = pool.get_optional<std::string>("gold");
  cfg.pool.allow_reference_qe = pool.get<bool>("allow_reference_qe", false);
  pool.finish();

  Section baseline(tree, "baseline");
  cfg.baseline.mode = baseline.get<std::string>("mode", "zero_shot");
  cfg.baseline.k = static_cast<int>(baseline.get<std::int64_t>("k", 0));
  baseline.finish();

  Section sweep(tree, "sweep");
  cfg.sweep.strategies = sweep.get<std::vector<std::string>>("strategies", {});
  cfg.sweep.ks = sweep.get<std::vector<std::int64_t>>("ks", {});
  cfg.sweep.aggregations = sweep.get<std::vector<std::string>>("aggregations", {});
  cfg.sweep.filters = sweep.get<std::vector<std::string>>("filters", {});
  sweep.finish();

  Section evaluate(tree, "evaluate");
  cfg.evaluate.runs = evaluate.get<std::vector<std::string>>("runs", {});
  cfg.evaluate.labels = evaluate.get<std::vector<std::string>>("labels", {});
  cfg.evaluate.scorers = evaluate.get<std::vector<std::string>>("scorers", {});
  cfg.evaluate.gold = evaluate.get_optional<std::string>("gold");
  evaluate.finish();

  Section analyze(tree, "analyze");
  cfg.analyze.run = analyze.get<std::string>("run", "");
  cfg.analyze.export_csv = analyze.get<bool>("export_csv", false);
  analyze.finish();

  Section cost(tree, "cost");
  cfg.cost.run = cost.get<std::string>("run", "");
  cost.finish();

  return cfg;
}

PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json tree = toml::parse_file(path);
  for (const auto& override_spec : overrides) {
    auto eq = override_spec.find('=');
    if (eq == std::string::npos)
      throw config_error("override '" + override_spec + "' must look like key=value");
    toml::set_dotted(tree, override_spec.substr(0, eq), override_spec.substr(eq + 1));
  }
  return config_from_tree(tree);
}

json config_to_tree(const PipelineConfig& cfg) {
  json tree;
  tree["run"] = {
      {"lang_pair", cfg.lang_pair.source + "-" + cfg.lang_pair.target},
      {"seed", cfg.seed},
      {"concurrency", cfg.concurrency},
      {"strict", cfg.strict},
      {"timing_mode", to_string(cfg.timing_mode)},
  };
  json paths = json::object();
  if (!cfg.pool_path.empty()) paths["pool"] = cfg.pool_path;
  if (!cfg.corpus_path.empty()) paths["corpus"] = cfg.corpus_path;
  if (cfg.gold_path) paths["gold"] = *cfg.gold_path;
  if (cfg.cache_path) paths["cache"] = *cfg.cache_path;
  if (cfg.assets_dir) paths["assets"] = *cfg.assets_dir;
  tree["paths"] = paths;
  tree["selection"] = {
      {"strategy", to_string(cfg.selection.strategy)},
      {"k", cfg.selection.k},
      {"filter_width", cfg.selection.strategy.filter_width},
  };
  tree["gradual"] = {
      {"sampling_mode", to_string(cfg.gradual.sampling_mode)},
      {"max_bridge_len", cfg.gradual.max_bridge_len},
  };
  tree["aggregation"] = {{"kind", to_string(cfg.aggregation)}};
  json filters = {{"pre", cfg.filters.pre}, {"post", cfg.filters.post}};
  if (cfg.filters.tau) filters["tau"] = *cfg.filters.tau;
  if (cfg.filters.tau_percentile) filters["tau_percentile"] = *cfg.filters.tau_percentile;
  if (cfg.filters.holdout) filters["holdout"] = *cfg.filters.holdout;
  tree["filters"] = filters;
  tree["pipeline"] = {
      {"translator", cfg.translator},
      {"bridger", cfg.bridger},
      {"embedder", cfg.embedder},
      {"qe", cfg.qe},
  };
  json backends = json::object();
  for (const auto& [id, p] : cfg.backends) {
    json b = {
        {"kind", to_string(p.kind)},
        {"endpoint", p.endpoint},
        {"temperature", p.default_sampling.temperature},
        {"top_p", p.default_sampling.top_p},
        {"max_tokens", p.default_sampling.max_tokens},
        {"rate_limit", p.rate_limit},
        {"max_retries", p.max_retries},
        {"retry_base_delay_s", p.retry_base_delay_s},
        {"retry_max_delay_s", p.retry_max_delay_s},
        {"timeout_s", p.timeout_s},
        {"virtual_cost_s", p.virtual_cost_s},
        {"qe_scale", to_string(p.qe_scale)},
        {"reference_based", p.reference_based},
    };
    if (!p.model.empty()) b["model"] = p.model;
    if (!p.api_key_env.empty()) b["api_key_env"] = p.api_key_env;
    backends[id] = b;
  }
  tree["backends"] = backends;
  json pool = {
      {"samples_per_sentence", cfg.pool.samples_per_sentence},
      {"pool_size", cfg.pool.pool_size},
      {"allow_reference_qe", cfg.pool.allow_reference_qe},
  };
  if (!cfg.pool.corpus.empty()) pool["corpus"] = cfg.pool.corpus;
  if (cfg.pool.gold) pool["gold"] = *cfg.pool.gold;
  tree["pool"] = pool;
  tree["baseline"] = {{"mode", cfg.baseline.mode}, {"k", cfg.baseline.k}};
  if (!cfg.sweep.strategies.empty() || !cfg.sweep.ks.empty() || !cfg.sweep.aggregations.empty() ||
      !cfg.sweep.filters.empty()) {
    tree["sweep"] = {
        {"strategies", cfg.sweep.strategies},
        {"ks", cfg.sweep.ks},
        {"aggregations", cfg.sweep.aggregations},
        {"filters", cfg.sweep.filters},
    };
  }
  if (!cfg.evaluate.runs.empty() || !cfg.evaluate.scorers.empty()) {
    json ev = {{"runs", cfg.evaluate.runs}, {"scorers", cfg.evaluate.scorers}};
    if (!cfg.evaluate.labels.empty()) ev["labels"] = cfg.evaluate.labels;
    if (cfg.evaluate.gold) ev["gold"] = *cfg.evaluate.gold;
    tree["evaluate"] = ev;
  }
  if (!cfg.analyze.run.empty())
    tree["analyze"] = {{"run", cfg.analyze.run}, {"export_csv", cfg.analyze.export_csv}};
  if (!cfg.cost.run.empty()) tree["cost"] = {{"run", cfg.cost.run}};
  return tree;
}

std::string config_to_toml(const PipelineConfig& cfg) { return toml::serialize(config_to_tree(cfg)); }

std::string fingerprint_config(const PipelineConfig& cfg) {
  return content_hash(config_to_tree(cfg).dump());
}

void validate_pipeline(const PipelineConfig& cfg) {
  auto check_role = [&](const std::string& role, const std::string& id, ProviderKind kind) {
    auto it = cfg.backends.find(id);
    if (it == cfg.backends.end())
      throw config_error("pipeline role '" + role + "' references unknown backend '" + id + "'");
    if (it->second.kind != kind)
      throw config_error("backend '" + id + "' has kind " + to_string(it->second.kind) +
                         " but role '" + role + "' needs " + to_string(kind));
  };
  check_role("translator", cfg.translator, ProviderKind::chat);
  check_role("bridger", cfg.bridger, ProviderKind::chat);
  check_role("embedder", cfg.embedder, ProviderKind::embedding);
  check_role("qe", cfg.qe, ProviderKind::qe);
  if (cfg.backends.at(cfg.qe).qe_scale == QeScale::mqm)
    throw config_error("MQM-scale scorers cannot drive pipeline filtering; use a DA-style backend");
  if (cfg.backends.at(cfg.qe).reference_based)
    throw config_error("the pipeline QE role must be reference-free");

  validate(cfg.selection);
  if (cfg.concurrency < 1) throw config_error("concurrency must be >= 1");
  if (cfg.gradual.max_bridge_len < 2) throw config_error("max_bridge_len must be >= 2");
  if (cfg.filters.pre && !cfg.filters.tau && !cfg.filters.tau_percentile)
    throw config_error("pre-filtering needs filters.tau or filters.tau_percentile");
  if (cfg.filters.tau && (*cfg.filters.tau < 0.0 || *cfg.filters.tau > 1.0))
    throw config_error("filters.tau must lie in [0,1]");
  if (cfg.filters.tau_percentile &&
      (*cfg.filters.tau_percentile <= 0.0 || *cfg.filters.tau_percentile > 100.0))
    throw config_error("filters.tau_percentile must lie in (0,100]");
  if (cfg.filters.tau_percentile && !cfg.filters.tau && !cfg.filters.holdout)
    throw config_error("filters.tau_percentile needs filters.holdout to compute tau from");
}

}  // namespace bridg
