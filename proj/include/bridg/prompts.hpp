#pragma once

#include <string>
#include <vector>

#include "bridg/core.hpp"
#include "bridg/gateway.hpp"

namespace bridg {

// Maps an ISO language code ("ko") to a display name ("Korean"); unknown
// codes fall back to the code itself.
std::string language_name(const std::string& code);

struct TranslationPromptAssets {
  // "{target_language}" slot is replaced by the display name.
  std::string system_template;

  std::string render_system(const std::string& target_language_code) const;
  static TranslationPromptAssets builtin();
};

struct BridgingExemplar {
  std::string start;
  std::string end;
  Bridge bridge;  // endpoint-normalized on load
};

struct BridgingPromptAssets {
  // Instruction with "{sentence1}" / "{sentence2}" slots.
  std::string instruction;
  std::vector<BridgingExemplar> fewshot;  // exactly 3

  static BridgingPromptAssets builtin();
  // Loads instruction.txt and example1..3.txt from a directory. Each
  // example file holds "Sentence1: ...", "Sentence2: ...", then the
  // numbered bridge lines.
  static BridgingPromptAssets load(const std::string& dir);
};

// Renders a bridge as the numbered list format the bridging model emits.
std::string render_numbered_bridge(const Bridge& bridge);

// Builds the chat messages for one zero-shot or few-shot translation:
// system prompt, alternating (source, translation) example pairs, then the
// query sentence as the final user turn.
std::vector<ChatMessage> translation_messages(const std::string& system_prompt,
                                              const std::vector<GradualStep>& examples,
                                              const std::string& query);

}  // namespace bridg
