#include "bridg/bridge_engine.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "bridg/hash.hpp"
#include "bridg/text.hpp"

namespace bridg {

std::string to_string(SamplingMode mode) {
  return mode == SamplingMode::full ? "full" : "sampled";
}

SamplingMode sampling_mode_from_string(const std::string& s) {
  if (s == "full") return SamplingMode::full;
  if (s == "sampled") return SamplingMode::sampled;
  throw config_error("unknown sampling mode '" + s + "'");
}

std::vector<std::string> extract_numbered_items(const std::string& raw) {
  std::vector<std::string> items;
  for (const auto& line : text::split_lines(raw)) {
    std::string t = text::trim(line);
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i == 0 || i >= t.size()) continue;          // commentary line
    if (t[i] != '.' && t[i] != ')') continue;       // not "N." / "N)"
    std::string item = text::trim(t.substr(i + 1));
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

namespace {

std::string replace_all(std::string s, const std::string& slot, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = s.find(slot, pos)) != std::string::npos) {
    s.replace(pos, slot.size(), value);
    pos += value.size();
  }
  return s;
}

std::string render_instruction(const std::string& instruction, const std::string& s1,
                               const std::string& s2) {
  std::string out = replace_all(instruction, "{sentence1}", s1);
  return replace_all(out, "{sentence2}", s2);
}

std::vector<std::string> thin_uniform(const std::vector<std::string>& sentences, int max_len) {
  const std::size_t n = sentences.size();
  const std::size_t m = static_cast<std::size_t>(max_len);
  if (n <= m || m < 2) return sentences;
  std::vector<std::string> kept;
  kept.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(n - 1) / static_cast<double>(m - 1)));
    kept.push_back(sentences[idx]);
  }
  return kept;
}

}  // namespace

ChatRequest build_bridge_prompt(const std::string& start, const std::string& end,
                                const BridgingPromptAssets& assets, const std::string& bridger_backend,
                                const SamplingParams& sampling, std::optional<std::int64_t> seed) {
  if (text::trim(start).empty()) throw usage_error("build_bridge_prompt with empty start");
  if (text::trim(end).empty()) throw usage_error("build_bridge_prompt with empty end");

  std::ostringstream prompt;
  for (const auto& ex : assets.fewshot) {
    prompt << render_instruction(assets.instruction, ex.start, ex.end) << "\n";
    prompt << render_numbered_bridge(ex.bridge) << "\n";
  }
  prompt << render_instruction(assets.instruction, start, end) << "\n";

  ChatRequest request;
  request.backend_id = bridger_backend;
  request.messages = {{Role::user, prompt.str()}};
  request.sampling = sampling;
  request.seed = seed;
  return request;
}

Bridge parse_bridge(const std::string& raw, const std::string& start, const std::string& end,
                    int max_len) {
  if (text::trim(raw).empty()) throw usage_error("parse_bridge over empty text");
  auto items = extract_numbered_items(raw);
  if (items.empty()) throw format_error("bridging output contains no numbered sentences");

  items.front() = start;  // endpoint normalization, byte-exact
  items.back() = end;
  if (items.size() == 1 && start != end) throw format_error("bridge has a single sentence but start != end");
  if (max_len >= 2) items = thin_uniform(items, max_len);

  Bridge bridge;
  bridge.start = start;
  bridge.end = end;
  bridge.sentences = std::move(items);
  bridge.origin = BridgeOrigin::full;
  validate(bridge);
  return bridge;
}

Bridge sample_bridge(const Bridge& bridge) {
  validate(bridge);
  const std::size_t n = bridge.sentences.size();
  const std::size_t middle = (n + 1) / 2;  // ceil(n/2), 1-based
  std::vector<std::size_t> indices;
  for (std::size_t idx : {std::size_t{1}, middle, n}) {
    if (indices.empty() || indices.back() != idx) indices.push_back(idx);
  }
  Bridge out;
  out.start = bridge.start;
  out.end = bridge.end;
  out.origin = BridgeOrigin::sampled;
  for (std::size_t idx : indices) out.sentences.push_back(bridge.sentences[idx - 1]);
  validate(out);
  return out;
}

Bridge generate_bridge(const std::string& start, const std::string& end, const GradualConfig& cfg,
                       const BridgingPromptAssets& assets, ModelGateway& gateway,
                       std::optional<std::int64_t> seed) {
  const auto& profile = gateway.profile(cfg.bridger);
  for (int attempt = 0; attempt < 2; ++attempt) {
    // Retry with a bumped seed so the request is not served from cache.
    std::optional<std::int64_t> attempt_seed = seed;
    if (attempt > 0 && seed) attempt_seed = *seed + attempt;
    if (attempt > 0 && !seed) attempt_seed = attempt;
    ChatRequest request =
        build_bridge_prompt(start, end, assets, cfg.bridger, profile.default_sampling, attempt_seed);
    std::string raw = gateway.chat(request);
    try {
      return parse_bridge(raw, start, end, cfg.max_bridge_len);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::format) throw;
    }
  }
  // Degenerate fallback still exercises one-shot transfer.
  Bridge fallback;
  fallback.start = start;
  fallback.end = end;
  fallback.sentences = {start, end};
  fallback.origin = BridgeOrigin::full;
  if (start == end) fallback.sentences = {start};
  validate(fallback);
  return fallback;
}

GradualTrace gradual_mt(const Bridge& bridge, const GradualConfig& cfg,
                        const TranslationPromptAssets& prompts, const std::string& target_lang_code,
                        ModelGateway& gateway, std::optional<std::int64_t> seed) {
  validate(bridge);
  const auto& profile = gateway.profile(cfg.translator);
  const std::string system_prompt = prompts.render_system(target_lang_code);

  GradualTrace trace;
  trace.bridge = bridge;
  std::vector<GradualStep> fewshot;
  for (const auto& sentence : bridge.sentences) {
    ChatRequest request;
    request.backend_id = cfg.translator;
    request.messages = translation_messages(system_prompt, fewshot, sentence);
    request.sampling = profile.default_sampling;
    request.seed = seed;
    std::string translation;
    try {
      translation = gateway.chat(request);
    } catch (const Error& e) {
      trace.call_count = static_cast<std::int64_t>(trace.steps.size());
      throw GradualMtError(e, std::move(trace));
    }
    fewshot.push_back({sentence, translation});
    trace.steps.push_back({sentence, translation});
  }
  trace.final_translation = trace.steps.back().translation;
  trace.call_count = static_cast<std::int64_t>(trace.steps.size());
  validate(trace);
  return trace;
}

}  // namespace bridg
