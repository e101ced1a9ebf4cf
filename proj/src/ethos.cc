#include "trustan/ethos.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trustan/errors.h"

namespace trustan {
namespace {

std::set<std::string> normalize_cues(const std::vector<std::string>& cues,
                                     const char* polarity) {
  std::set<std::string> out;
  for (const auto& cue : cues) {
    std::string lowered = ascii_lower(cue);
    auto first = lowered.find_first_not_of(" \t");
    auto last = lowered.find_last_not_of(" \t");
    if (first == std::string::npos) {
      throw InvalidArgument(std::string("lexicon: empty ") + polarity + " cue");
    }
    lowered = lowered.substr(first, last - first + 1);
    if (!has_letter(lowered)) {
      throw InvalidArgument("lexicon: cue '" + lowered + "' has no letters");
    }
    out.insert(std::move(lowered));
  }
  return out;
}

std::size_t total_hits(std::string_view text,
                       const std::set<std::string>& cues) {
  std::size_t hits = 0;
  for (const auto& cue : cues) hits += count_word_hits(text, cue);
  return hits;
}

}  // namespace

std::string_view label_name(EthosLabel label) {
  switch (label) {
    case EthosLabel::kSupport:
      return "support";
    case EthosLabel::kAttack:
      return "attack";
    case EthosLabel::kNone:
      return "none";
  }
  return "none";
}

std::optional<EthosLabel> parse_label(std::string_view name) {
  if (name == "support") return EthosLabel::kSupport;
  if (name == "attack") return EthosLabel::kAttack;
  if (name == "none") return EthosLabel::kNone;
  return std::nullopt;
}

Lexicon::Lexicon(const std::vector<std::string>& support,
                 const std::vector<std::string>& attack)
    : support_(normalize_cues(support, "support")),
      attack_(normalize_cues(attack, "attack")) {
  for (const auto& cue : support_) {
    if (attack_.count(cue)) {
      throw InvalidArgument("lexicon: cue '" + cue + "' is in both polarities");
    }
  }
}

Lexicon Lexicon::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("lexicon: invalid JSON: ") + e.what());
  }
  auto read = [&](const char* key) {
    if (!doc.is_object() || !doc.contains(key) || !doc[key].is_array()) {
      throw InvalidArgument(std::string("lexicon: missing array '") + key +
                            "'");
    }
    std::vector<std::string> cues;
    for (const auto& cue : doc[key]) {
      if (!cue.is_string()) {
        throw InvalidArgument(std::string("lexicon: non-string cue in ") + key);
      }
      cues.push_back(cue.get<std::string>());
    }
    return cues;
  };
  return Lexicon(read("support"), read("attack"));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open lexicon");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

LabeledMention classify_lexicon(const MentionSentence& mention,
                                const Lexicon& lexicon) {
  std::string text = ascii_lower(mention.sentence.text);
  std::size_t support = total_hits(text, lexicon.support_cues());
  std::size_t attack = total_hits(text, lexicon.attack_cues());

  LabeledMention out{mention, EthosLabel::kNone, std::nullopt,
                     kLexiconClassifierId};
  std::size_t total = support + attack;
  if (total == 0) return out;
  if (attack > support) {
    out.label = EthosLabel::kAttack;
  } else if (support > attack) {
    out.label = EthosLabel::kSupport;
  }
  out.confidence = static_cast<double>(std::max(support, attack)) /
                   static_cast<double>(total);
  return out;
}

std::vector<LabeledMention> LexiconClassifier::classify(
    std::span<const MentionSentence> mentions) {
  std::vector<LabeledMention> out;
  out.reserve(mentions.size());
  for (const auto& m : mentions) out.push_back(classify_lexicon(m, lexicon_));
  return out;
}

std::vector<LabeledMention> classify_corpus(
    std::span<const MentionSentence> mentions, Classifier& classifier) {
  auto labels = classifier.classify(mentions);
  if (labels.size() != mentions.size()) {
    throw ProtocolError("classifier " + classifier.id() + " returned " +
                        std::to_string(labels.size()) + " labels for " +
                        std::to_string(mentions.size()) + " mentions");
  }
  return labels;
}

}  // namespace trustan
