#ifndef TRUSTAN_TEXT_H_
#define TRUSTAN_TEXT_H_

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustan/corpus.h"
#include "trustan/timeutil.h"

namespace trustan {

// Splits text at runs of '.', '!' and '?'. Each fragment keeps its
// terminator run and is trimmed; whitespace-only fragments are dropped and
// a trailing unterminated fragment is kept. No abbreviation handling.
std::vector<std::string> split_sentences(std::string_view body);

struct Sentence {
  std::string sentence_id;  // post_id + '#' + ordinal
  std::string post_id;
  std::size_t ordinal = 0;
  Timestamp created_at;
  std::string text;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

std::vector<Sentence> sentences_of(const Post& post);

// Word-boundary matching shared by alias filtering and the lexicon
// classifier. Case folding is ASCII-only; a boundary is any non-letter
// code point or the string edge. Non-ASCII code points count as letters
// except punctuation, symbol and emoji blocks.
std::string ascii_lower(std::string_view text);
bool is_letter(char32_t code_point);
bool has_letter(std::string_view text);
// Non-overlapping whole-word occurrences of phrase in text. Both arguments
// must already be lowercased.
std::size_t count_word_hits(std::string_view text, std::string_view phrase);

// Tracked entities and their aliases. Aliases are stored lowercased.
class AliasMap {
 public:
  using Entries = std::map<std::string, std::set<std::string>>;

  // Throws InvalidArgument unless every entity has at least one non-empty
  // alias and no alias is shared between entities.
  explicit AliasMap(const std::map<std::string, std::vector<std::string>>&
                        entries);

  // TRUMP -> {trump, donald trump}; HARRIS -> {harris, kamala, kamala harris}
  static AliasMap defaults();
  // JSON object mapping entity_id to an array of alias strings.
  static AliasMap from_json(std::string_view json);
  static AliasMap load(const std::filesystem::path& path);

  const Entries& entries() const { return entries_; }
  std::vector<std::string> entity_ids() const;

 private:
  Entries entries_;
};

struct MentionSentence {
  Sentence sentence;
  std::string entity_id;

  friend bool operator==(const MentionSentence&,
                         const MentionSentence&) = default;
};

// One record per (sentence, entity) with at least one alias hit, in input
// order then entity_id order.
std::vector<MentionSentence> filter_mentions(std::span<const Sentence> sentences,
                                             const AliasMap& aliases);

std::vector<MentionSentence> extract_mentions(const Corpus& corpus,
                                              const AliasMap& aliases);

struct PipelineStats {
  std::size_t posts = 0;
  std::size_t sentences = 0;
  // Distinct sentences naming at least one entity.
  std::size_t mention_sentences = 0;
  // (sentence, entity) records; exceeds mention_sentences when a sentence
  // names several entities.
  std::size_t mention_records = 0;
  std::map<std::string, std::size_t> per_entity;

  friend bool operator==(const PipelineStats&, const PipelineStats&) = default;
};

PipelineStats pipeline_stats(const Corpus& corpus, const AliasMap& aliases);

}  // namespace trustan

#endif  // TRUSTAN_TEXT_H_
