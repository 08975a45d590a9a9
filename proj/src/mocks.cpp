#include "bridg/mocks.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "bridg/hash.hpp"
#include "bridg/text.hpp"

namespace bridg {

using nlohmann::json;

namespace {

struct ParsedMockUrl {
  std::string kind;   // chat | embed | qe
  std::string name;   // upper, script, hash, oracle, ...
  std::map<std::string, std::string> params;
};

ParsedMockUrl parse_mock_url(const std::string& url) {
  constexpr std::string_view scheme = "mock://";
  if (!text::starts_with(url, scheme)) throw config_error("not a mock endpoint: " + url);
  std::string rest = url.substr(scheme.size());
  ParsedMockUrl out;
  std::string query;
  if (auto q = rest.find('?'); q != std::string::npos) {
    query = rest.substr(q + 1);
    rest = rest.substr(0, q);
  }
  auto slash = rest.find('/');
  if (slash == std::string::npos) throw config_error("mock endpoint needs kind/name: " + url);
  out.kind = rest.substr(0, slash);
  out.name = rest.substr(slash + 1);
  std::size_t pos = 0;
  while (pos < query.size()) {
    auto amp = query.find('&', pos);
    std::string pair = query.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos);
    auto eq = pair.find('=');
    if (eq != std::string::npos) out.params[pair.substr(0, eq)] = pair.substr(eq + 1);
    if (amp == std::string::npos) break;
    pos = amp + 1;
  }
  return out;
}

std::string last_user_content(const json& body) {
  std::string content;
  for (const auto& m : body.at("messages")) {
    if (m.at("role").get<std::string>() == "user") content = m.at("content").get<std::string>();
  }
  return content;
}

int count_assistant_messages(const json& body) {
  int n = 0;
  for (const auto& m : body.at("messages")) {
    if (m.at("role").get<std::string>() == "assistant") ++n;
  }
  return n;
}

// Pulls the query sentences out of a bridging prompt: the LAST
// "Sentence1:"/"Sentence2:" lines belong to the query block.
std::pair<std::string, std::string> last_sentence_pair(const std::string& prompt) {
  std::string s1, s2;
  for (const auto& rawline : text::split_lines(prompt)) {
    std::string line = text::trim(rawline);
    if (text::starts_with(line, "Sentence1:")) s1 = text::trim(line.substr(10));
    else if (text::starts_with(line, "Sentence2:")) s2 = text::trim(line.substr(10));
  }
  return {s1, s2};
}

std::string numbered_bridge(const std::string& s1, const std::string& s2, int n) {
  std::ostringstream out;
  for (int i = 1; i <= n; ++i) {
    out << i << ". ";
    if (i == 1) out << s1;
    else if (i == n) out << s2;
    else out << "Bridge step " << i << " between \"" << s1 << "\" and \"" << s2 << "\".";
    out << "\n";
  }
  return out.str();
}

std::map<std::string, std::string> load_gold_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open gold map '" + path + "'");
  std::map<std::string, std::string> gold;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw parse_error("gold map '" + path + "' line " + std::to_string(lineno) + ": expected <source>\\t<gold>");
    gold[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return gold;
}

std::string resolve_relative(const std::string& path, const std::string& base_dir) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

double char_f1(const std::string& a, const std::string& b) {
  auto ua = text::to_utf32(a);
  auto ub = text::to_utf32(b);
  if (ua.empty() && ub.empty()) return 1.0;
  if (ua.empty() || ub.empty()) return 0.0;
  std::map<char32_t, std::size_t> counts;
  for (char32_t c : ua) ++counts[c];
  std::size_t overlap = 0;
  for (char32_t c : ub) {
    auto it = counts.find(c);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(ua.size() + ub.size());
}

std::shared_ptr<MockEngine> MockEngine::from_endpoint(const std::string& url) {
  auto parsed = parse_mock_url(url);
  auto engine = std::make_shared<MockEngine>();
  auto param_int = [&](const std::string& key, int fallback) {
    auto it = parsed.params.find(key);
    return it == parsed.params.end() ? fallback : std::stoi(it->second);
  };
  auto param_str = [&](const std::string& key, const std::string& fallback) {
    auto it = parsed.params.find(key);
    return it == parsed.params.end() ? fallback : it->second;
  };

  if (parsed.kind == "chat") {
    if (parsed.name == "script") {
      auto file = param_str("file", "");
      if (file.empty()) throw config_error("mock chat script needs ?file=");
      auto from_file = from_scripts_file(file);
      if (!from_file->chat_) throw config_error("scripts file lacks a chat section: " + file);
      engine->chat_ = from_file->chat_;
    } else {
      ChatScript script;
      script.fallback = parsed.name;
      script.bridge_n = param_int("n", script.bridge_n);
      script.variants_k = param_int("k", script.variants_k);
      script.fail_first = param_int("fail", 0);
      if (parsed.name == "flaky") {
        script.fallback = param_str("inner", "upper");
        if (script.fail_first == 0) script.fail_first = 1;
      }
      engine->chat_ = script;
    }
  } else if (parsed.kind == "embed") {
    EmbedScript script;
    script.function = parsed.name;
    script.dim = param_int("dim", script.dim);
    script.alphabet = param_str("alphabet", script.alphabet);
    engine->embed_ = script;
  } else if (parsed.kind == "qe") {
    QeScript script;
    if (parsed.name == "oracle") {
      auto file = param_str("gold", "");
      if (file.empty()) throw config_error("mock qe oracle needs ?gold=");
      script.gold = load_gold_map(file);
      if (auto d = parsed.params.find("default"); d != parsed.params.end())
        script.default_score = std::stod(d->second);
    } else if (parsed.name == "const") {
      script.const_score = std::stod(param_str("value", "0.5"));
    } else if (parsed.name == "table") {
      auto file = param_str("file", "");
      if (file.empty()) throw config_error("mock qe table needs ?file=");
      auto from_file = from_scripts_file(file);
      if (!from_file->qe_) throw config_error("scripts file lacks a qe section: " + file);
      script = *from_file->qe_;
    } else {
      throw config_error("unknown qe mock '" + parsed.name + "'");
    }
    engine->qe_ = script;
  } else {
    throw config_error("unknown mock kind '" + parsed.kind + "'");
  }
  return engine;
}

std::shared_ptr<MockEngine> MockEngine::from_scripts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open scripts file '" + path + "'");
  json scripts;
  try {
    in >> scripts;
  } catch (const json::exception& e) {
    throw parse_error("scripts file '" + path + "': " + e.what());
  }
  return from_scripts_json(scripts, std::filesystem::path(path).parent_path().string());
}

std::shared_ptr<MockEngine> MockEngine::from_scripts_json(const json& scripts,
                                                          const std::string& base_dir) {
  auto engine = std::make_shared<MockEngine>();
  if (scripts.contains("chat")) {
    const json& c = scripts.at("chat");
    ChatScript script;
    if (c.contains("rules")) {
      for (const auto& r : c.at("rules")) {
        ChatRule rule;
        if (r.contains("equals_last_user")) rule.equals_last_user = r.at("equals_last_user").get<std::string>();
        if (r.contains("contains")) rule.contains = r.at("contains").get<std::string>();
        if (r.contains("regex_last_user")) rule.regex_last_user = r.at("regex_last_user").get<std::string>();
        rule.response = r.at("response").get<std::string>();
        script.rules.push_back(std::move(rule));
      }
    }
    script.fallback = c.value("fallback", std::string("none"));
    script.bridge_n = c.value("bridge_n", script.bridge_n);
    script.variants_k = c.value("variants_k", script.variants_k);
    script.fail_first = c.value("fail_first", 0);
    engine->chat_ = std::move(script);
  }
  if (scripts.contains("embedding")) {
    const json& e = scripts.at("embedding");
    EmbedScript script;
    script.function = e.value("function", script.function);
    script.dim = e.value("dim", script.dim);
    script.alphabet = e.value("alphabet", script.alphabet);
    engine->embed_ = std::move(script);
  }
  if (scripts.contains("qe")) {
    const json& q = scripts.at("qe");
    QeScript script;
    if (q.contains("gold")) {
      for (auto it = q.at("gold").begin(); it != q.at("gold").end(); ++it)
        script.gold[it.key()] = it.value().get<std::string>();
    }
    if (q.contains("gold_file"))
      script.gold = load_gold_map(resolve_relative(q.at("gold_file").get<std::string>(), base_dir));
    if (q.contains("rules")) {
      for (const auto& r : q.at("rules")) {
        QeRule rule;
        if (r.contains("source")) rule.source = r.at("source").get<std::string>();
        if (r.contains("translation")) rule.translation = r.at("translation").get<std::string>();
        rule.score = r.at("score").get<double>();
        script.rules.push_back(std::move(rule));
      }
    }
    if (q.contains("default")) script.default_score = q.at("default").get<double>();
    if (q.contains("const")) script.const_score = q.at("const").get<double>();
    engine->qe_ = std::move(script);
  }
  return engine;
}

json MockEngine::handle(const std::string& route, const json& body) {
  if (route == "chat/completions") return handle_chat(body);
  if (route == "embeddings") return handle_embed(body);
  if (route == "qe/score") return handle_qe(body);
  throw provider_error("mock engine has no route '" + route + "'");
}

json MockEngine::handle_chat(const json& body) {
  if (!chat_) throw provider_error("mock engine has no chat script");
  const ChatScript& script = *chat_;

  if (script.fail_first > 0) {
    std::string key = content_hash(body.dump());
    std::lock_guard lock(mu_);
    int& n = failure_counts_[key];
    if (n < script.fail_first) {
      ++n;
      throw transport_error("scripted transient failure " + std::to_string(n) + "/" +
                            std::to_string(script.fail_first));
    }
  }

  std::string last_user = last_user_content(body);
  std::string content;
  bool matched = false;
  for (const auto& rule : script.rules) {
    bool ok = true;
    if (rule.equals_last_user && last_user != *rule.equals_last_user) ok = false;
    if (ok && rule.contains && body.dump().find(*rule.contains) == std::string::npos &&
        last_user.find(*rule.contains) == std::string::npos)
      ok = false;
    if (ok && rule.regex_last_user && !std::regex_search(last_user, std::regex(*rule.regex_last_user)))
      ok = false;
    if (ok) {
      content = rule.response;
      matched = true;
      break;
    }
  }
  if (!matched) {
    if (script.fallback == "upper") {
      content = text::ascii_upper(last_user);
    } else if (script.fallback == "echo") {
      content = last_user;
    } else if (script.fallback == "echo-fewshot") {
      content = last_user + "#" + std::to_string(count_assistant_messages(body));
    } else if (script.fallback == "bridge") {
      auto [s1, s2] = last_sentence_pair(last_user);
      if (s1.empty() || s2.empty())
        throw provider_error("bridge mock found no Sentence1:/Sentence2: lines");
      content = numbered_bridge(s1, s2, script.bridge_n);
    } else if (script.fallback == "seeded-variants") {
      std::int64_t seed = body.value("seed", static_cast<std::int64_t>(0));
      std::int64_t k = std::max(1, script.variants_k);
      std::int64_t v = ((seed % k) + k) % k;
      content = last_user + " ~v" + std::to_string(v);
    } else {
      throw provider_error("unscripted chat request (no rule matched, fallback=none)");
    }
  }
  return json{{"choices", json::array({json{{"index", 0},
                                            {"message", json{{"role", "assistant"}, {"content", content}}},
                                            {"finish_reason", "stop"}}})}};
}

json MockEngine::handle_embed(const json& body) {
  if (!embed_) throw provider_error("mock engine has no embedding script");
  const EmbedScript& script = *embed_;
  json data = json::array();
  int index = 0;
  for (const auto& item : body.at("input")) {
    std::string sentence = item.get<std::string>();
    std::vector<double> v;
    if (script.function == "charcount") {
      for (char c : script.alphabet) {
        v.push_back(static_cast<double>(std::count(sentence.begin(), sentence.end(), c)));
      }
    } else if (script.function == "hash") {
      std::uint64_t h = fnv1a64(sentence);
      v.reserve(static_cast<std::size_t>(script.dim));
      for (int i = 0; i < script.dim; ++i) {
        std::uint64_t x = mix64(h, static_cast<std::uint64_t>(i) + 1);
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        double unit = static_cast<double>(x >> 11) / static_cast<double>(1ULL << 53);
        v.push_back(unit * 2.0 - 1.0);
      }
      if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
    } else {
      throw provider_error("unknown embedding mock function '" + script.function + "'");
    }
    data.push_back(json{{"index", index++}, {"embedding", v}});
  }
  return json{{"data", data}};
}

json MockEngine::handle_qe(const json& body) {
  if (!qe_) throw provider_error("mock engine has no qe script");
  const QeScript& script = *qe_;
  std::string source = body.at("source").get<std::string>();
  std::string translation = body.at("translation").get<std::string>();

  if (script.const_score) return json{{"score", *script.const_score}};
  for (const auto& rule : script.rules) {
    if (rule.source && *rule.source != source) continue;
    if (rule.translation && *rule.translation != translation) continue;
    if (!rule.source && !rule.translation) continue;
    return json{{"score", rule.score}};
  }
  if (!script.gold.empty()) {
    auto it = script.gold.find(source);
    if (it != script.gold.end()) return json{{"score", char_f1(translation, it->second)}};
    if (script.default_score) return json{{"score", *script.default_score}};
    throw provider_error("qe oracle has no gold for source '" + source + "'");
  }
  if (script.default_score) return json{{"score", *script.default_score}};
  throw provider_error("unscripted qe request");
}

}  // namespace bridg
