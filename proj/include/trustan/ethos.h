#ifndef TRUSTAN_ETHOS_H_
#define TRUSTAN_ETHOS_H_

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustan/text.h"

namespace trustan {

// SUPPORT is read downstream as trust, ATTACK as distrust.
enum class EthosLabel { kSupport, kAttack, kNone };

// Canonical wire strings: "support", "attack", "none".
std::string_view label_name(EthosLabel label);
// Case-sensitive; nullopt for anything but the three canonical strings.
std::optional<EthosLabel> parse_label(std::string_view name);

struct LabeledMention {
  MentionSentence mention;
  EthosLabel label = EthosLabel::kNone;
  std::optional<double> confidence;  // in [0, 1] when present
  std::string classifier_id;

  friend bool operator==(const LabeledMention&,
                         const LabeledMention&) = default;
};

// Cue phrases per polarity, lowercased. The two sets are disjoint.
class Lexicon {
 public:
  // Throws InvalidArgument on empty cues, cues without letters, or overlap.
  Lexicon(const std::vector<std::string>& support,
          const std::vector<std::string>& attack);

  // {"support": [...], "attack": [...]}
  static Lexicon from_json(std::string_view json);
  static Lexicon load(const std::filesystem::path& path);

  const std::set<std::string>& support_cues() const { return support_; }
  const std::set<std::string>& attack_cues() const { return attack_; }

 private:
  std::set<std::string> support_;
  std::set<std::string> attack_;
};

inline constexpr const char* kLexiconClassifierId = "lexicon";

// Majority of whole-word cue hits wins; no hits or a tie gives NONE.
// Confidence is majority / total hits, absent when there are no hits.
LabeledMention classify_lexicon(const MentionSentence& mention,
                                const Lexicon& lexicon);

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string id() const = 0;
  // Returns exactly one result per input, in input order.
  virtual std::vector<LabeledMention> classify(
      std::span<const MentionSentence> mentions) = 0;
};

class LexiconClassifier : public Classifier {
 public:
  explicit LexiconClassifier(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

  std::string id() const override { return kLexiconClassifierId; }
  std::vector<LabeledMention> classify(
      std::span<const MentionSentence> mentions) override;

 private:
  Lexicon lexicon_;
};

// Runs the classifier over all mentions and checks label conservation.
std::vector<LabeledMention> classify_corpus(
    std::span<const MentionSentence> mentions, Classifier& classifier);

}  // namespace trustan

#endif  // TRUSTAN_ETHOS_H_
