#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bridg/bridge_engine.hpp"
#include "bridg/config.hpp"
#include "bridg/decision.hpp"
#include "bridg/eval.hpp"
#include "bridg/mocks.hpp"
#include "bridg/orchestrator.hpp"
#include "bridg/pool.hpp"
#include "bridg/selection.hpp"
#include "bridg/text_metrics.hpp"

namespace py = pybind11;
using namespace bridg;

namespace {

// Trees cross the boundary as nested (label, [children]) pairs.
LabeledTree tree_from_py(const py::handle& obj) {
  if (py::isinstance<py::str>(obj)) return LabeledTree{obj.cast<std::string>(), {}};
  auto seq = obj.cast<py::sequence>();
  if (py::len(seq) != 2) throw py::value_error("tree nodes are (label, [children]) pairs");
  LabeledTree node{seq[0].cast<std::string>(), {}};
  for (const auto& child : seq[1].cast<py::sequence>()) node.children.push_back(tree_from_py(child));
  return node;
}

py::object tree_to_py(const LabeledTree& tree) {
  py::list children;
  for (const auto& c : tree.children) children.append(tree_to_py(c));
  return py::make_tuple(tree.label, children);
}

}  // namespace

PYBIND11_MODULE(_bridg, m) {
  m.doc() = "Core operations of the BridG MT pipeline";

  m.def("levenshtein",
        [](const std::string& a, const std::string& b) { return levenshtein(a, b); },
        py::arg("a"), py::arg("b"));

  m.def("tree_edit_distance",
        [](const py::handle& t1, const py::handle& t2) {
          return tree_edit_distance(tree_from_py(t1), tree_from_py(t2));
        },
        py::arg("t1"), py::arg("t2"));

  m.def("parse_tree",
        [](const std::string& sentence) { return tree_to_py(parse_tree(sentence)); },
        py::arg("sentence"));

  m.def("cosine_similarity",
        [](const std::vector<double>& u, const std::vector<double>& v) {
          return cosine_similarity(u, v);
        },
        py::arg("u"), py::arg("v"));

  m.def("euclidean_distance",
        [](const std::vector<double>& u, const std::vector<double>& v) {
          return euclidean_distance(u, v);
        },
        py::arg("u"), py::arg("v"));

  m.def("parse_bridge",
        [](const std::string& raw, const std::string& start, const std::string& end, int max_len) {
          return parse_bridge(raw, start, end, max_len).sentences;
        },
        py::arg("raw"), py::arg("start"), py::arg("end"), py::arg("max_len") = 16);

  m.def("sample_bridge_indices",
        [](int n) {
          if (n < 1) throw py::value_error("bridge length must be >= 1");
          Bridge bridge;
          bridge.start = "s1";
          bridge.end = n == 1 ? "s1" : "s" + std::to_string(n);
          for (int i = 1; i <= n; ++i) bridge.sentences.push_back("s" + std::to_string(i));
          std::vector<int> indices;
          for (const auto& s : sample_bridge(bridge).sentences)
            indices.push_back(std::stoi(s.substr(1)));
          return indices;
        },
        py::arg("n"));

  m.def("sample_bridge",
        [](const std::vector<std::string>& sentences) {
          if (sentences.empty()) throw py::value_error("empty bridge");
          Bridge bridge;
          bridge.start = sentences.front();
          bridge.end = sentences.back();
          bridge.sentences = sentences;
          return sample_bridge(bridge).sentences;
        },
        py::arg("sentences"));

  m.def("pick_representative",
        [](const std::vector<std::pair<std::string, double>>& translations) {
          std::vector<ScoredText> scored;
          for (const auto& [text, value] : translations)
            scored.push_back({text, QeScore{value, "py", false, std::nullopt}});
          ScoredText best = pick_representative(scored);
          return std::make_pair(best.text, best.qe.value);
        },
        py::arg("translations"));

  m.def("aggregate_polling",
        [](const std::vector<std::string>& candidates, std::uint64_t seed) {
          return aggregate_polling(candidates, seed);
        },
        py::arg("candidates"), py::arg("seed") = 0);

  m.def("nearest_rank_percentile",
        [](std::vector<double> values, double p) {
          return nearest_rank_percentile(std::move(values), p);
        },
        py::arg("values"), py::arg("p"));

  m.def("progress_from_distances",
        [](std::vector<double> distances) {
          ProgressRecord r = progress_from_distances(std::move(distances));
          return py::make_tuple(r.progresses, r.average_progress);
        },
        py::arg("distances"));

  m.def("select_start_indices",
        [](const std::vector<std::tuple<double, std::int64_t, std::int64_t>>& scored,
           const std::string& strategy, int k, int filter_width) {
          std::vector<ScoredCandidate> candidates;
          for (std::size_t i = 0; i < scored.size(); ++i) {
            ScoredCandidate c;
            c.pool_index = i;
            c.sim.sbert_sim = std::get<0>(scored[i]);
            c.sim.lev_dist = std::get<1>(scored[i]);
            c.sim.ted_dist = std::get<2>(scored[i]);
            candidates.push_back(std::move(c));
          }
          SelectionConfig cfg;
          cfg.strategy = parse_strategy(strategy);
          cfg.strategy.filter_width = filter_width;
          cfg.k = k;
          std::vector<std::size_t> picked = select_start_indices(candidates, cfg, 0);
          return std::vector<std::int64_t>(picked.begin(), picked.end());
        },
        py::arg("scored"), py::arg("strategy"), py::arg("k"), py::arg("filter_width") = 10);

  m.def("char_f1", &char_f1, py::arg("a"), py::arg("b"));

  m.def("fingerprint_config_file",
        [](const std::string& path, const std::vector<std::string>& overrides) {
          return fingerprint_config(load_config(path, overrides));
        },
        py::arg("path"), py::arg("overrides") = std::vector<std::string>{});

  m.def("run_translate",
        [](const std::string& config_path, const std::string& out_dir,
           const std::vector<std::string>& overrides) {
          PipelineConfig cfg = load_config(config_path, overrides);
          std::string cache = cfg.cache_path && !cfg.cache_path->empty()
                                  ? *cfg.cache_path
                                  : out_dir + "/cache.jsonl";
          PipelineContext ctx = PipelineContext::create(std::move(cfg), cache);
          auto corpus = load_corpus(ctx.cfg.corpus_path, ctx.cfg.lang_pair, ctx.cfg.gold_path);
          RunReport report = run_corpus(corpus, ctx, out_dir);
          return json(report.summary).dump();
        },
        py::arg("config_path"), py::arg("out_dir"),
        py::arg("overrides") = std::vector<std::string>{},
        "Runs the translate pipeline; returns the run summary as a JSON string.");

  py::register_exception<Error>(m, "BridgError");
}
