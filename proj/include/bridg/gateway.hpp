#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridg/core.hpp"

namespace bridg {

enum class Role { system, user, assistant };

std::string to_string(Role role);
Role role_from_string(const std::string& s);

struct ChatMessage {
  Role role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct SamplingParams {
  double temperature = 0.3;
  double top_p = 1.0;
  int max_tokens = 512;

  bool operator==(const SamplingParams&) const = default;
};

struct ChatRequest {
  std::string backend_id;
  std::vector<ChatMessage> messages;
  SamplingParams sampling;
  std::optional<std::int64_t> seed;
};

enum class ProviderKind { chat, embedding, qe };

std::string to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(const std::string& s);

// Native scale of a QE provider. `unit` scores are already in [0,1];
// `da100` scores are divided by 100; `mqm` scores (0-25, lower is better)
// are kept raw in QeScore::mqm_raw and may not drive filtering.
enum class QeScale { unit, da100, mqm };

std::string to_string(QeScale scale);
QeScale qe_scale_from_string(const std::string& s);

struct ProviderProfile {
  std::string backend_id;
  ProviderKind kind = ProviderKind::chat;
  std::string endpoint;     // http(s)://... or mock://...
  std::string model;        // model name sent on the wire
  std::string api_key_env;  // env var holding the secret; never the secret itself
  SamplingParams default_sampling;
  int rate_limit = 4;  // max in-flight requests
  int max_retries = 3;
  double retry_base_delay_s = 0.05;
  double retry_max_delay_s = 2.0;
  double timeout_s = 60.0;
  double virtual_cost_s = 0.0;  // per-call cost charged by the virtual clock
  QeScale qe_scale = QeScale::unit;
  bool reference_based = false;  // QE providers only
};

// Canonical request payload; the cache key is its content hash. Lookups
// compare the stored payload so hash collisions cannot alias responses.
json chat_payload(const ProviderProfile& profile, const ChatRequest& request);
json embed_payload(const ProviderProfile& profile, const std::string& sentence);
json qe_payload(const ProviderProfile& profile, const std::string& source, const std::string& translation,
                const std::optional<std::string>& reference);
std::string cache_key(const json& payload);

// JSONL-backed response cache, safe for concurrent use. A miss runs the
// fetch under a per-key lock so each distinct key hits the network once.
class ResponseCache {
 public:
  ResponseCache();  // in-memory only
  explicit ResponseCache(const std::filesystem::path& file);

  std::optional<json> lookup(const std::string& key, const json& payload) const;
  void store(const std::string& key, const json& payload, const json& response);
  json fetch_or_compute(const std::string& key, const json& payload,
                        const std::function<json()>& compute, bool* was_hit = nullptr);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::pair<json, json>> entries_;  // key -> (payload, response)
  std::unique_ptr<std::ofstream> out_;
  std::mutex key_locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> key_locks_;
};

struct ProfileStats {
  std::atomic<std::int64_t> network_calls{0};
  std::atomic<std::int64_t> cache_hits{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> max_in_flight{0};
};

class GatewayStats {
 public:
  std::int64_t network_calls(const std::string& backend_id) const;
  std::int64_t cache_hits(const std::string& backend_id) const;
  std::int64_t total_network_calls() const;
  int max_in_flight(const std::string& backend_id) const;

 private:
  friend class ModelGateway;
  ProfileStats& profile(const std::string& backend_id);
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<ProfileStats>> per_profile_;
};

// Per-thread accounting of provider calls, used by the orchestrator's
// virtual timing mode. Network (non-cached) calls only.
struct CallMeter {
  double seconds = 0.0;
  std::int64_t calls = 0;
};

class MockEngine;

// Uniform client over chat, embedding, and QE providers with deterministic
// caching, capped-exponential retries, and bounded in-flight requests.
// Endpoints with a mock:// scheme are served by in-process scripted mocks
// speaking the same JSON protocol as the HTTP transport.
class ModelGateway {
 public:
  explicit ModelGateway(std::vector<ProviderProfile> profiles,
                        std::shared_ptr<ResponseCache> cache = nullptr);
  ~ModelGateway();

  std::string chat(const ChatRequest& request);
  std::vector<std::vector<double>> embed(const std::string& backend_id,
                                         const std::vector<std::string>& sentences);
  QeScore score_qe(const std::string& backend_id, const std::string& source,
                   const std::string& translation,
                   const std::optional<std::string>& reference = std::nullopt);

  const ProviderProfile& profile(const std::string& backend_id) const;
  bool has_profile(const std::string& backend_id) const;
  const GatewayStats& stats() const { return stats_; }
  ResponseCache& cache() { return *cache_; }

  static void meter_reset();
  static CallMeter meter_read();

 private:
  json dispatch(const ProviderProfile& profile, const std::string& route, const json& body);
  json post_with_retries(const ProviderProfile& profile, const std::string& route, const json& body);

  std::map<std::string, ProviderProfile> profiles_;
  std::shared_ptr<ResponseCache> cache_;
  GatewayStats stats_;
  std::map<std::string, std::shared_ptr<MockEngine>> mock_engines_;
  std::map<std::string, std::unique_ptr<class RateGate>> gates_;
  std::mutex mu_;
};

void validate(const ChatRequest& request);

}  // namespace bridg
