#include "bridg/prompts.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "bridg/bridge_engine.hpp"
#include "bridg/errors.hpp"
#include "bridg/text.hpp"

namespace bridg {

std::string language_name(const std::string& code) {
  static const std::map<std::string, std::string> names = {
      {"en", "English"}, {"de", "German"},  {"zh", "Chinese"}, {"hi", "Hindi"},
      {"ko", "Korean"},  {"sw", "Swahili"}, {"bn", "Bengali"}, {"mr", "Marathi"},
  };
  auto it = names.find(code);
  return it == names.end() ? code : it->second;
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

constexpr const char* kTranslationSystem =
    "You will be provided with a sentence in English, and your task is to translate it into "
    "{target_language}.";

constexpr const char* kBridgingInstruction =
    "I will give you two sentences. Can you gradually change the first sentence to make it exactly "
    "the same as the second sentence? Just give me the sentences and don't provide additional "
    "comments.\nSentence1: {sentence1}\nSentence2: {sentence2}";

struct RawExemplar {
  const char* start;
  const char* end;
  const char* bridge;  // numbered list text
};

// The three bridging exemplars, identical to assets/bridging/example*.txt
// (a test keeps them in sync).
const RawExemplar kExemplars[3] = {
    {
        "Surprisingly often, animals show up uninvited at sporting events. Sometimes, it gets a "
        "little weird.",
        "D. Cohen tried to parry attacks on his honesty as Todd Blanche, Donald J. Trump’s "
        "lawyer, tried to destroy his credibility with jurors.",
        "1. Surprisingly often, animals show up uninvited at sporting events. Sometimes, it gets a "
        "little weird.\n"
        "2. Often, unexpected events occur during live events, and sometimes these can get quite "
        "weird.\n"
        "3. At public events, such as sports or trials, unexpected guests often cause disturbances, "
        "leading to weird situations.\n"
        "4. In public spectacles, like sports or courtrooms, unexpected participants can disrupt the "
        "normal proceedings in strange ways.\n"
        "5. During public hearings, like in court, surprising accusations and defenses can emerge, "
        "often causing odd disruptions.\n"
        "6. In courtroom battles, unexpected arguments and witnesses can often turn the proceedings "
        "weird as each side tries to undermine the other.\n"
        "7. In legal battles, lawyers frequently confront each other with surprising tactics to "
        "challenge credibility, which can make the proceedings seem strange.\n"
        "8. Michael D. Cohen, during his trial, encountered surprising tactics by Todd Blanche, "
        "Donald J. Trump’s lawyer, aiming to disrupt his credibility in unusual ways.\n"
        "9. Michael D. Cohen tried to parry attacks on his honesty as Todd Blanche, Donald J. "
        "Trump’s lawyer, tried to destroy his credibility with jurors.",
    },
    {
        "Georgia’s Parliament overrode a presidential veto to give final approval on Tuesday "
        "evening to a contentious bill that has plunged the country into a political crisis and "
        "threatened to derail the pro-Western aspirations of many Georgians in favor of closer ties "
        "with Russia.",
        "At that time, the buildings were abandoned and inaccessible to the public, and the famous "
        "ferry that shuttled immigrants from the island to Manhattan sank in a storm in 1968.",
        "1. Georgia’s Parliament overrode a presidential veto to give final approval on Tuesday "
        "evening to a contentious bill that has plunged the country into a political crisis and "
        "threatened to derail the pro-Western aspirations of many Georgians in favor of closer ties "
        "with Russia.\n"
        "2. The decision made by Georgia’s Parliament on Tuesday evening, to override a "
        "presidential veto and approve a controversial bill, has sparked a political crisis in the "
        "country and raised concerns about the impact on the country's pro-Western stance and "
        "relations with Russia.\n"
        "3. The controversial bill approved by Georgia’s Parliament on Tuesday, despite a "
        "presidential veto, has caused a political crisis and stirred debates about the "
        "country’s Western alignment and its relation with Russia.\n"
        "4. The unilateral move by Georgia’s Parliament on Tuesday to push through a divisive "
        "bill despite opposition from the president has led to a political crisis and raised "
        "concerns about the nation's Western affiliations and ties with Russia.\n"
        "5. The recent decision by Georgia’s Parliament to defy the presidential veto and pass "
        "a controversial bill has created a political turmoil, questioning the country’s "
        "Western orientation and relationship with Russia.\n"
        "6. Georgia’s Parliament's decision to override the presidential veto and approve the "
        "contentious bill has caused a political crisis in the country, prompting discussions on "
        "the impact on its Western ties and relations with Russia.\n"
        "7. Georgia’s Parliament’s act of rejecting the presidential veto and endorsing "
        "the controversial bill on Tuesday has resulted in a political crisis, with implications "
        "for the country's pro-Western stance and connections with Russia.\n"
        "8. Georgia’s Parliament moved forward with finalizing a contentious bill on Tuesday, "
        "overriding the presidential veto, which has triggered a political crisis and raised "
        "concerns about the nation's Western aspirations and relationship with Russia.\n"
        "9. At that time, the buildings were abandoned and inaccessible to the public, and the "
        "famous ferry that shuttled immigrants from the island to Manhattan sank in a storm in "
        "1968.",
    },
    {
        "The cake has become one of Jamaica’s most popular desserts, often found in various "
        "stores.",
        "Some plans might cover only generic versions of certain contraceptives, but patients are "
        "still entitled to coverage of a specific product that their providers deem medically "
        "necessary.",
        "1. The cake has become one of Jamaica’s most popular desserts, often found in various "
        "stores.\n"
        "2. Some plans might only cover basic versions of popular desserts like the cake, while "
        "others are more comprehensive.\n"
        "3. In many cases, plans might cover only generic versions of popular products, but "
        "specific varieties might still be available.\n"
        "4. Some plans might cover only generic versions of certain products, with exceptions "
        "allowed for specific needs.\n"
        "5. Some plans might cover only generic versions of certain healthcare products, but "
        "specific options are still accessible if necessary.\n"
        "6. Some plans might cover only generic versions of certain contraceptives, but patients "
        "can still get specific types if deemed necessary.\n"
        "7. Some plans might cover only generic versions of certain contraceptives, but patients "
        "are still entitled to coverage of a specific product that their providers deem medically "
        "necessary.",
    },
};

BridgingExemplar make_exemplar(const std::string& start, const std::string& end,
                               const std::string& numbered) {
  BridgingExemplar ex;
  ex.start = text::normalize(start);
  ex.end = text::normalize(end);
  auto items = extract_numbered_items(numbered);
  // Endpoint normalization keeps the Bridge invariants even when the
  // exemplar text drifts from its stated endpoints.
  ex.bridge = parse_bridge(numbered, ex.start, ex.end, static_cast<int>(items.size()));
  return ex;
}

}  // namespace

std::string TranslationPromptAssets::render_system(const std::string& target_language_code) const {
  return replace_all(system_template, "{target_language}", language_name(target_language_code));
}

TranslationPromptAssets TranslationPromptAssets::builtin() {
  return TranslationPromptAssets{kTranslationSystem};
}

BridgingPromptAssets BridgingPromptAssets::builtin() {
  BridgingPromptAssets assets;
  assets.instruction = kBridgingInstruction;
  for (const auto& raw : kExemplars)
    assets.fewshot.push_back(make_exemplar(raw.start, raw.end, raw.bridge));
  return assets;
}

BridgingPromptAssets BridgingPromptAssets::load(const std::string& dir) {
  auto read_file = [&](const std::string& name) {
    std::ifstream in(dir + "/" + name);
    if (!in) throw io_error("cannot open bridging asset '" + dir + "/" + name + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  BridgingPromptAssets assets;
  std::string instruction = read_file("instruction.txt");
  while (!instruction.empty() && (instruction.back() == '\n' || instruction.back() == '\r'))
    instruction.pop_back();
  assets.instruction = instruction;

  for (int i = 1; i <= 3; ++i) {
    std::string raw = read_file("example" + std::to_string(i) + ".txt");
    std::string start, end, numbered;
    for (const auto& line : text::split_lines(raw)) {
      std::string t = text::trim(line);
      if (text::starts_with(t, "Sentence1:")) start = text::trim(t.substr(10));
      else if (text::starts_with(t, "Sentence2:")) end = text::trim(t.substr(10));
      else numbered += line + "\n";
    }
    if (start.empty() || end.empty())
      throw parse_error("bridging asset example" + std::to_string(i) +
                        ".txt lacks Sentence1:/Sentence2: lines");
    assets.fewshot.push_back(make_exemplar(start, end, numbered));
  }
  return assets;
}

std::string render_numbered_bridge(const Bridge& bridge) {
  std::ostringstream out;
  for (std::size_t i = 0; i < bridge.sentences.size(); ++i)
    out << (i + 1) << ". " << bridge.sentences[i] << "\n";
  return out.str();
}

std::vector<ChatMessage> translation_messages(const std::string& system_prompt,
                                              const std::vector<GradualStep>& examples,
                                              const std::string& query) {
  std::vector<ChatMessage> messages;
  messages.push_back({Role::system, system_prompt});
  for (const auto& ex : examples) {
    messages.push_back({Role::user, ex.source});
    messages.push_back({Role::assistant, ex.translation});
  }
  messages.push_back({Role::user, query});
  return messages;
}

}  // namespace bridg
