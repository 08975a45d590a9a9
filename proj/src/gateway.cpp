#include "bridg/gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <thread>

#include <httplib.h>

#include "bridg/errors.hpp"
#include "bridg/hash.hpp"
#include "bridg/mocks.hpp"
#include "bridg/text.hpp"

namespace bridg {

std::string to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw parse_error("unknown chat role '" + s + "'");
}

std::string to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::chat: return "chat";
    case ProviderKind::embedding: return "embedding";
    case ProviderKind::qe: return "qe";
  }
  return "chat";
}

ProviderKind provider_kind_from_string(const std::string& s) {
  if (s == "chat") return ProviderKind::chat;
  if (s == "embedding") return ProviderKind::embedding;
  if (s == "qe") return ProviderKind::qe;
  throw config_error("unknown provider kind '" + s + "'");
}

std::string to_string(QeScale scale) {
  switch (scale) {
    case QeScale::unit: return "unit";
    case QeScale::da100: return "da100";
    case QeScale::mqm: return "mqm";
  }
  return "unit";
}

QeScale qe_scale_from_string(const std::string& s) {
  if (s == "unit") return QeScale::unit;
  if (s == "da100") return QeScale::da100;
  if (s == "mqm") return QeScale::mqm;
  throw config_error("unknown qe scale '" + s + "'");
}

void validate(const ChatRequest& request) {
  bool has_user = false;
  Role prev = Role::system;
  bool first = true;
  for (const auto& m : request.messages) {
    if (m.role == Role::user) has_user = true;
    if (!first && m.role == Role::assistant && prev == Role::assistant)
      throw usage_error("chat request has two consecutive assistant messages");
    if (!first && m.role == Role::system) throw usage_error("system message after the first position");
    prev = m.role;
    first = false;
  }
  if (!has_user) throw usage_error("chat request has no user message");
}

json chat_payload(const ProviderProfile& profile, const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages)
    messages.push_back(json{{"role", to_string(m.role)}, {"content", m.content}});
  json body{{"model", profile.model.empty() ? profile.backend_id : profile.model},
            {"messages", std::move(messages)},
            {"temperature", request.sampling.temperature},
            {"top_p", request.sampling.top_p},
            {"max_tokens", request.sampling.max_tokens}};
  if (request.seed) body["seed"] = *request.seed;
  json payload{{"kind", "chat"}, {"backend_id", request.backend_id}, {"body", std::move(body)}};
  return payload;
}

json embed_payload(const ProviderProfile& profile, const std::string& sentence) {
  json body{{"model", profile.model.empty() ? profile.backend_id : profile.model},
            {"input", json::array({sentence})}};
  return json{{"kind", "embedding"}, {"backend_id", profile.backend_id}, {"body", std::move(body)}};
}

json qe_payload(const ProviderProfile& profile, const std::string& source, const std::string& translation,
                const std::optional<std::string>& reference) {
  json body{{"model", profile.model.empty() ? profile.backend_id : profile.model},
            {"source", source},
            {"translation", translation}};
  if (reference) body["reference"] = *reference;
  return json{{"kind", "qe"}, {"backend_id", profile.backend_id}, {"body", std::move(body)}};
}

std::string cache_key(const json& payload) { return content_hash(payload.dump()); }

// --- ResponseCache ---------------------------------------------------------

ResponseCache::ResponseCache() = default;

ResponseCache::ResponseCache(const std::filesystem::path& file) {
  if (std::filesystem::exists(file)) {
    std::ifstream in(file);
    if (!in) throw io_error("cannot open cache file '" + file.string() + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        json record = json::parse(line);
        entries_[record.at("key").get<std::string>()] = {record.at("payload"), record.at("response")};
      } catch (const json::exception& e) {
        throw parse_error("cache file '" + file.string() + "' line " + std::to_string(lineno) + ": " +
                          e.what());
      }
    }
  } else if (file.has_parent_path()) {
    std::filesystem::create_directories(file.parent_path());
  }
  out_ = std::make_unique<std::ofstream>(file, std::ios::app);
  if (!*out_) throw io_error("cannot open cache file for append '" + file.string() + "'");
}

std::optional<json> ResponseCache::lookup(const std::string& key, const json& payload) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  if (it->second.first != payload) return std::nullopt;  // hash collision; treat as miss
  return std::make_optional<json>(it->second.second);
}

void ResponseCache::store(const std::string& key, const json& payload, const json& response) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = entries_.emplace(key, std::make_pair(payload, response));
  if (!inserted) it->second = {payload, response};  // last writer wins; identical by construction
  if (out_) {
    json record{{"key", key}, {"payload", payload}, {"response", response}};
    *out_ << record.dump() << "\n";
    out_->flush();
  }
}

json ResponseCache::fetch_or_compute(const std::string& key, const json& payload,
                                     const std::function<json()>& compute, bool* was_hit) {
  if (auto hit = lookup(key, payload)) {
    if (was_hit) *was_hit = true;
    return *hit;
  }
  std::shared_ptr<std::mutex> key_lock;
  {
    std::lock_guard lock(key_locks_mu_);
    auto& slot = key_locks_[key];
    if (!slot) slot = std::make_shared<std::mutex>();
    key_lock = slot;
  }
  std::lock_guard fetch_lock(*key_lock);
  if (auto hit = lookup(key, payload)) {  // another thread fetched while we waited
    if (was_hit) *was_hit = true;
    return *hit;
  }
  if (was_hit) *was_hit = false;
  json response = compute();
  store(key, payload, response);
  return response;
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// --- stats and metering -----------------------------------------------------

ProfileStats& GatewayStats::profile(const std::string& backend_id) {
  std::lock_guard lock(mu_);
  auto& slot = per_profile_[backend_id];
  if (!slot) slot = std::make_unique<ProfileStats>();
  return *slot;
}

std::int64_t GatewayStats::network_calls(const std::string& backend_id) const {
  std::lock_guard lock(mu_);
  auto it = per_profile_.find(backend_id);
  return it == per_profile_.end() ? 0 : it->second->network_calls.load();
}

std::int64_t GatewayStats::cache_hits(const std::string& backend_id) const {
  std::lock_guard lock(mu_);
  auto it = per_profile_.find(backend_id);
  return it == per_profile_.end() ? 0 : it->second->cache_hits.load();
}

std::int64_t GatewayStats::total_network_calls() const {
  std::lock_guard lock(mu_);
  std::int64_t total = 0;
  for (const auto& [id, stats] : per_profile_) total += stats->network_calls.load();
  return total;
}

int GatewayStats::max_in_flight(const std::string& backend_id) const {
  std::lock_guard lock(mu_);
  auto it = per_profile_.find(backend_id);
  return it == per_profile_.end() ? 0 : it->second->max_in_flight.load();
}

namespace {
thread_local CallMeter tl_meter;
}

void ModelGateway::meter_reset() { tl_meter = CallMeter{}; }
CallMeter ModelGateway::meter_read() { return tl_meter; }

// Bounded in-flight gate (counting semaphore with runtime capacity).
class RateGate {
 public:
  explicit RateGate(int capacity) : capacity_(capacity > 0 ? capacity : 1) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return used_ < capacity_; });
    ++used_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      --used_;
    }
    cv_.notify_one();
  }

 private:
  int capacity_;
  int used_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

// --- gateway ----------------------------------------------------------------

ModelGateway::ModelGateway(std::vector<ProviderProfile> profiles, std::shared_ptr<ResponseCache> cache)
    : cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()) {
  for (auto& p : profiles) {
    std::string id = p.backend_id;
    if (profiles_.count(id)) throw config_error("duplicate backend_id '" + id + "'");
    gates_[id] = std::make_unique<RateGate>(p.rate_limit);
    profiles_[id] = std::move(p);
  }
}

ModelGateway::~ModelGateway() = default;

const ProviderProfile& ModelGateway::profile(const std::string& backend_id) const {
  auto it = profiles_.find(backend_id);
  if (it == profiles_.end()) throw usage_error("no provider profile for backend '" + backend_id + "'");
  return it->second;
}

bool ModelGateway::has_profile(const std::string& backend_id) const {
  return profiles_.count(backend_id) > 0;
}

namespace {

bool retryable_status(int status) {
  return status == 408 || status == 429 || (status >= 500 && status < 600);
}

json http_post(const ProviderProfile& profile, const std::string& route, const json& body) {
  std::string base = profile.endpoint;
  while (!base.empty() && base.back() == '/') base.pop_back();

  // split scheme://host[:port] from the path prefix
  auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos)
    throw config_error("endpoint '" + profile.endpoint + "' has no scheme");
  auto path_start = base.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? base : base.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(std::chrono::duration<double>(profile.timeout_s));
  client.set_read_timeout(std::chrono::duration<double>(profile.timeout_s));
  client.set_write_timeout(std::chrono::duration<double>(profile.timeout_s));

  httplib::Headers headers;
  if (!profile.api_key_env.empty()) {
    const char* secret = std::getenv(profile.api_key_env.c_str());
    if (secret != nullptr && *secret != '\0')
      headers.emplace("Authorization", std::string("Bearer ") + secret);
  }

  auto result = client.Post(prefix + "/" + route, headers, body.dump(), "application/json");
  if (!result)
    throw transport_error("POST " + origin + prefix + "/" + route + ": " + to_string(result.error()));
  if (result->status < 200 || result->status >= 300) {
    std::string detail = result->body.substr(0, 200);
    if (retryable_status(result->status))
      throw transport_error("HTTP " + std::to_string(result->status) + " from " + route + ": " + detail);
    throw provider_error("HTTP " + std::to_string(result->status) + " from " + route + ": " + detail);
  }
  try {
    return json::parse(result->body);
  } catch (const json::exception& e) {
    throw protocol_error(std::string("malformed JSON response body: ") + e.what());
  }
}

}  // namespace

json ModelGateway::post_with_retries(const ProviderProfile& profile, const std::string& route,
                                     const json& body) {
  std::shared_ptr<MockEngine> mock;
  if (text::starts_with(profile.endpoint, "mock://")) {
    std::lock_guard lock(mu_);
    auto& slot = mock_engines_[profile.backend_id];
    if (!slot) slot = MockEngine::from_endpoint(profile.endpoint);
    mock = slot;
  }

  auto& pstats = stats_.profile(profile.backend_id);
  auto& gate = *gates_.at(profile.backend_id);

  double delay = profile.retry_base_delay_s;
  for (int attempt = 0;; ++attempt) {
    try {
      gate.acquire();
      int now_in_flight = ++pstats.in_flight;
      int prev_max = pstats.max_in_flight.load();
      while (now_in_flight > prev_max &&
             !pstats.max_in_flight.compare_exchange_weak(prev_max, now_in_flight)) {
      }
      json response;
      try {
        response = mock ? mock->handle(route, body.at("body")) : http_post(profile, route, body.at("body"));
      } catch (...) {
        --pstats.in_flight;
        gate.release();
        throw;
      }
      --pstats.in_flight;
      gate.release();
      ++pstats.network_calls;
      tl_meter.calls += 1;
      tl_meter.seconds += profile.virtual_cost_s;
      return response;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::transport || attempt >= profile.max_retries) throw;
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      delay = std::min(delay * 2.0, profile.retry_max_delay_s);
    }
  }
}

json ModelGateway::dispatch(const ProviderProfile& profile, const std::string& route, const json& payload) {
  bool was_hit = false;
  json response = cache_->fetch_or_compute(cache_key(payload), payload, [&] {
    return post_with_retries(profile, route, payload);
  }, &was_hit);
  if (was_hit) ++stats_.profile(profile.backend_id).cache_hits;
  return response;
}

std::string ModelGateway::chat(const ChatRequest& request) {
  const auto& prof = profile(request.backend_id);
  if (prof.kind != ProviderKind::chat)
    throw usage_error("backend '" + request.backend_id + "' is not a chat provider");
  validate(request);
  json payload = chat_payload(prof, request);
  json response = dispatch(prof, "chat/completions", payload);
  try {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw protocol_error(std::string("chat response missing choices[0].message.content: ") + e.what());
  }
}

std::vector<std::vector<double>> ModelGateway::embed(const std::string& backend_id,
                                                     const std::vector<std::string>& sentences) {
  const auto& prof = profile(backend_id);
  if (prof.kind != ProviderKind::embedding)
    throw usage_error("backend '" + backend_id + "' is not an embedding provider");
  if (sentences.empty()) throw usage_error("embed over an empty sentence list");
  for (const auto& s : sentences)
    if (text::trim(s).empty()) throw usage_error("embed over an empty sentence");

  // Cached per sentence; each distinct sentence is one logical request.
  std::vector<std::vector<double>> out(sentences.size());
  std::optional<std::size_t> dim;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    json payload = embed_payload(prof, sentences[i]);
    json response = dispatch(prof, "embeddings", payload);
    try {
      out[i] = response.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw protocol_error(std::string("embedding response missing data[0].embedding: ") + e.what());
    }
    if (out[i].empty()) throw protocol_error("embedding provider returned an empty vector");
    if (dim && out[i].size() != *dim)
      throw protocol_error("embedding dimensions differ within one batch");
    dim = out[i].size();
  }
  return out;
}

QeScore ModelGateway::score_qe(const std::string& backend_id, const std::string& source,
                               const std::string& translation,
                               const std::optional<std::string>& reference) {
  const auto& prof = profile(backend_id);
  if (prof.kind != ProviderKind::qe)
    throw usage_error("backend '" + backend_id + "' is not a qe provider");
  if (text::trim(source).empty()) throw usage_error("score_qe with empty source");
  if (text::trim(translation).empty()) throw usage_error("score_qe with empty translation");
  if (prof.reference_based && !reference)
    throw usage_error("backend '" + backend_id + "' is reference-based but no reference was given");
  if (!prof.reference_based && reference)
    throw usage_error("backend '" + backend_id + "' is reference-free but a reference was given");

  json payload = qe_payload(prof, source, translation, reference);
  json response = dispatch(prof, "qe/score", payload);
  double raw = 0.0;
  try {
    raw = response.at("score").get<double>();
  } catch (const json::exception& e) {
    throw protocol_error(std::string("qe response missing score: ") + e.what());
  }

  QeScore score;
  score.scorer_id = backend_id;
  score.reference_based = prof.reference_based;
  switch (prof.qe_scale) {
    case QeScale::unit:
      if (raw < 0.0 || raw > 1.0)
        throw protocol_error("qe score " + std::to_string(raw) + " outside [0,1]");
      score.value = raw;
      break;
    case QeScale::da100:
      if (raw < 0.0 || raw > 100.0)
        throw protocol_error("qe score " + std::to_string(raw) + " outside [0,100]");
      score.value = raw / 100.0;
      break;
    case QeScale::mqm:
      if (raw < 0.0 || raw > 25.0)
        throw protocol_error("mqm score " + std::to_string(raw) + " outside [0,25]");
      score.mqm_raw = raw;
      score.value = std::clamp(1.0 - raw / 25.0, 0.0, 1.0);
      break;
  }
  return score;
}

}  // namespace bridg
