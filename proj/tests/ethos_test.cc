#include "trustan/ethos.h"

#include <gtest/gtest.h>

#include <random>

#include "test_util.h"
#include "trustan/errors.h"

namespace trustan {
namespace {

MentionSentence mention(std::string text, std::string entity = "TRUMP") {
  return {Sentence{"p#0", "p", 0, *parse_utc("2024-07-01T00:00:00Z"), std::move(text)},
          std::move(entity)};
}

Lexicon fixture_lexicon() {
  return Lexicon({"honest", "wise", "strong leader"}, {"liar", "fraud", "hypocrite"});
}

TEST(ClassifyLexicon, AttackMajority) {
  auto lm = classify_lexicon(mention("Trump is a liar and a fraud"), fixture_lexicon());
  EXPECT_EQ(lm.label, EthosLabel::kAttack);
  ASSERT_TRUE(lm.confidence.has_value());
  EXPECT_DOUBLE_EQ(*lm.confidence, 1.0);
  EXPECT_EQ(lm.classifier_id, "lexicon");
}

TEST(ClassifyLexicon, NoCuesIsNoneWithoutConfidence) {
  auto lm = classify_lexicon(mention("The debate is on Tuesday"), fixture_lexicon());
  EXPECT_EQ(lm.label, EthosLabel::kNone);
  EXPECT_FALSE(lm.confidence.has_value());
}

TEST(ClassifyLexicon, TieIsNone) {
  auto lm = classify_lexicon(mention("Harris is honest but a hypocrite", "HARRIS"),
                             fixture_lexicon());
  EXPECT_EQ(lm.label, EthosLabel::kNone);
}

TEST(ClassifyLexicon, CountsRepeatsCaseInsensitiveWholeWords) {
  auto lm = classify_lexicon(
      mention("WISE, wise and a Strong Leader, though a liar. Dishonestly honest!"),
      fixture_lexicon());
  // support: wise x2, strong leader, honest = 4; attack: liar = 1
  EXPECT_EQ(lm.label, EthosLabel::kSupport);
  EXPECT_DOUBLE_EQ(*lm.confidence, 4.0 / 5.0);
  EXPECT_EQ(classify_lexicon(mention("liars everywhere"), fixture_lexicon()).label,
            EthosLabel::kNone);
}

TEST(ClassifyLexicon, NoLettersAlwaysNone) {
  Lexicon shipped = Lexicon::load(testing::data_dir() / "lexicon.json");
  std::mt19937 rng(5);
  const std::string alphabet = "0123456789 .,!?-:;'\"()#@$%&*";
  for (int i = 0; i < 200; ++i) {
    std::string text;
    for (int k = 0; k < 20; ++k) text.push_back(alphabet[rng() % alphabet.size()]);
    EXPECT_EQ(classify_lexicon(mention(text), shipped).label, EthosLabel::kNone);
  }
}

TEST(Lexicon, ValidationAndShippedFile) {
  EXPECT_THROW(Lexicon({"good"}, {"Good"}), InvalidArgument);
  EXPECT_THROW(Lexicon({""}, {"bad"}), InvalidArgument);
  EXPECT_THROW(Lexicon({"123"}, {"bad"}), InvalidArgument);
  EXPECT_THROW(Lexicon::from_json(R"({"support": ["a"]})"), InvalidArgument);
  Lexicon shipped = Lexicon::load(testing::data_dir() / "lexicon.json");
  EXPECT_GE(shipped.support_cues().size(), 40u);
  EXPECT_GE(shipped.attack_cues().size(), 40u);
}

TEST(EthosLabel, WireNamesRoundTrip) {
  for (auto label : {EthosLabel::kSupport, EthosLabel::kAttack, EthosLabel::kNone}) {
    EXPECT_EQ(parse_label(label_name(label)), label);
  }
  EXPECT_FALSE(parse_label("Support").has_value());
  EXPECT_FALSE(parse_label("positive").has_value());
}

TEST(ClassifyCorpus, EmptyAndDeterministic) {
  LexiconClassifier classifier(Lexicon::load(testing::data_dir() / "lexicon.json"));
  EXPECT_TRUE(classify_corpus({}, classifier).empty());

  std::vector<MentionSentence> mentions;
  const char* texts[] = {"Trump is a liar", "Harris is honest", "Trump is wise",
                         "Harris is weak", "Trump spoke", "Harris is a fraud and a liar",
                         "Trump is smart but corrupt", "Kamala is kind", "Trump!", "Harris?"};
  for (const char* t : texts) mentions.push_back(mention(t));
  auto first = classify_corpus(mentions, classifier);
  auto second = classify_corpus(mentions, classifier);
  ASSERT_EQ(first.size(), 10u);
  EXPECT_EQ(first, second);
}

class ShortClassifier : public Classifier {
 public:
  std::string id() const override { return "short"; }
  std::vector<LabeledMention> classify(std::span<const MentionSentence>) override {
    return {};
  }
};

TEST(ClassifyCorpus, LabelConservationIsEnforced) {
  ShortClassifier bad;
  std::vector<MentionSentence> mentions{mention("x")};
  EXPECT_THROW(classify_corpus(mentions, bad), ProtocolError);
}

}  // namespace
}  // namespace trustan
