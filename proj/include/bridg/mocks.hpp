#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridg/errors.hpp"

namespace bridg {

// Scripted provider behaviors. One MockEngine can back all three provider
// kinds; it speaks exactly the JSON wire protocol of the HTTP transport, so
// the same engine serves both the in-process mock:// endpoints and the
// `mock-server` CLI over real HTTP.

struct ChatRule {
  std::optional<std::string> equals_last_user;
  std::optional<std::string> contains;
  std::optional<std::string> regex_last_user;
  std::string response;
};

struct ChatScript {
  std::vector<ChatRule> rules;
  // Built-in fallbacks: "upper", "echo", "echo-fewshot", "bridge",
  // "seeded-variants", "none" (unscripted requests are rejected).
  std::string fallback = "none";
  int bridge_n = 5;        // bridge fallback: sentences per bridge
  int variants_k = 3;      // seeded-variants fallback: distinct variants
  int fail_first = 0;      // fail each distinct request this many times
};

struct EmbedScript {
  std::string function = "hash";  // "hash" or "charcount"
  int dim = 16;
  std::string alphabet = "ab";
};

struct QeRule {
  std::optional<std::string> source;
  std::optional<std::string> translation;
  double score = 0.0;
};

struct QeScript {
  std::map<std::string, std::string> gold;  // oracle mode: source -> gold translation
  std::vector<QeRule> rules;
  std::optional<double> default_score;
  std::optional<double> const_score;
};

// Character-level F1 between two strings over Unicode scalar multisets.
// Identical strings score 1.0. The oracle QE mock scores translations by
// char F1 against the configured gold.
double char_f1(const std::string& a, const std::string& b);

class MockEngine {
 public:
  // Builds an engine from a mock:// endpoint, e.g.
  //   mock://chat/upper, mock://chat/script?file=scripts.json,
  //   mock://embed/hash?dim=16, mock://qe/oracle?gold=golds.tsv
  static std::shared_ptr<MockEngine> from_endpoint(const std::string& url);
  // Builds an engine from a scripts JSON file (all three sections optional).
  static std::shared_ptr<MockEngine> from_scripts_file(const std::string& path);
  static std::shared_ptr<MockEngine> from_scripts_json(const nlohmann::json& scripts,
                                                       const std::string& base_dir);

  // Routes: "chat/completions", "embeddings", "qe/score". The body and the
  // returned document follow the HTTP wire schema. Unscripted requests
  // throw provider errors carrying a diagnostic message.
  nlohmann::json handle(const std::string& route, const nlohmann::json& body);

  bool has_chat() const { return chat_.has_value(); }
  bool has_embed() const { return embed_.has_value(); }
  bool has_qe() const { return qe_.has_value(); }

 private:
  nlohmann::json handle_chat(const nlohmann::json& body);
  nlohmann::json handle_embed(const nlohmann::json& body);
  nlohmann::json handle_qe(const nlohmann::json& body);

  std::optional<ChatScript> chat_;
  std::optional<EmbedScript> embed_;
  std::optional<QeScript> qe_;
  std::mutex mu_;
  std::map<std::string, int> failure_counts_;
};

}  // namespace bridg
