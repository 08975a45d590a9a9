#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bridg/core.hpp"
#include "bridg/errors.hpp"
#include "bridg/gateway.hpp"
#include "bridg/prompts.hpp"

namespace bridg {

enum class SamplingMode { full, sampled };

std::string to_string(SamplingMode mode);
SamplingMode sampling_mode_from_string(const std::string& s);

struct GradualConfig {
  std::string translator;
  std::string bridger;
  SamplingMode sampling_mode = SamplingMode::full;
  int max_bridge_len = 16;
};

// Extracts numbered items ("1. ...", "2) ...") from model output, dropping
// commentary lines.
std::vector<std::string> extract_numbered_items(const std::string& raw);

// Single user message carrying the three exemplars and the query block.
// The bridging sampling profile (temperature 0.6, top_p 0.9) applies
// unless the backend profile overrides it.
ChatRequest build_bridge_prompt(const std::string& start, const std::string& end,
                                const BridgingPromptAssets& assets, const std::string& bridger_backend,
                                const SamplingParams& sampling, std::optional<std::int64_t> seed);

// Parses raw bridging output into a Bridge: numbered lines extracted,
// endpoints normalized to start/end verbatim, interior thinned uniformly
// when the result exceeds max_len.
Bridge parse_bridge(const std::string& raw, const std::string& start, const std::string& end,
                    int max_len = 16);

// Keeps 1-based indices {1, ceil(n/2), n}, deduplicated, order preserved.
Bridge sample_bridge(const Bridge& bridge);

// Generates the bridge for (start, end): one bridging chat call, one retry
// with a bumped seed on format errors, then the degenerate [start, end]
// bridge as a final fallback.
Bridge generate_bridge(const std::string& start, const std::string& end, const GradualConfig& cfg,
                       const BridgingPromptAssets& assets, ModelGateway& gateway,
                       std::optional<std::int64_t> seed);

// Runs Algorithm-style gradual translation over the bridge: each sentence
// is translated with all prior (source, translation) pairs as few-shot
// context; exactly |bridge| chat calls.
GradualTrace gradual_mt(const Bridge& bridge, const GradualConfig& cfg,
                        const TranslationPromptAssets& prompts, const std::string& target_lang_code,
                        ModelGateway& gateway, std::optional<std::int64_t> seed);

// Carries the partial trace when a chat call fails mid-bridge.
class GradualMtError : public Error {
 public:
  GradualMtError(const Error& cause, GradualTrace partial)
      : Error(cause.kind(), cause.what()), partial_(std::move(partial)) {}
  const GradualTrace& partial() const { return partial_; }

 private:
  GradualTrace partial_;
};

}  // namespace bridg
