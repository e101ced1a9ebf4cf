#include "trustan/text.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trustan/errors.h"

namespace trustan {
namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Decodes the code point starting at pos; invalid sequences decode as
// U+FFFD and consume one byte.
char32_t decode_at(std::string_view s, std::size_t pos, std::size_t* length) {
  auto b0 = static_cast<unsigned char>(s[pos]);
  std::size_t n = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3
                              : (b0 >> 3) == 0x1E   ? 4
                                                    : 0;
  if (n == 0 || pos + n > s.size()) {
    *length = 1;
    return 0xFFFD;
  }
  char32_t cp = n == 1 ? b0 : n == 2 ? (b0 & 0x1F) : n == 3 ? (b0 & 0x0F)
                                                            : (b0 & 0x07);
  for (std::size_t i = 1; i < n; ++i) {
    auto b = static_cast<unsigned char>(s[pos + i]);
    if (!is_continuation(b)) {
      *length = 1;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  *length = n;
  return cp;
}

char32_t code_point_before(std::string_view s, std::size_t pos) {
  std::size_t start = pos - 1;
  while (start > 0 && pos - start < 4 &&
         is_continuation(static_cast<unsigned char>(s[start]))) {
    --start;
  }
  std::size_t length;
  char32_t cp = decode_at(s, start, &length);
  return start + length == pos ? cp : 0xFFFD;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view body) {
  std::vector<std::string> fragments;
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    std::string_view fragment = trim(body.substr(start, end - start));
    if (!fragment.empty()) fragments.emplace_back(fragment);
    start = end;
  };
  while (i < body.size()) {
    if (is_terminator(body[i])) {
      while (i < body.size() && is_terminator(body[i])) ++i;
      emit(i);
    } else {
      ++i;
    }
  }
  emit(body.size());
  return fragments;
}

std::vector<Sentence> sentences_of(const Post& post) {
  std::vector<Sentence> out;
  std::size_t ordinal = 0;
  for (auto& text : split_sentences(post.body)) {
    out.push_back({post.post_id + "#" + std::to_string(ordinal), post.post_id,
                   ordinal, post.created_at, std::move(text)});
    ++ordinal;
  }
  return out;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_letter(char32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp < 0xC0 || cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0xFE00 && cp <= 0xFE0F) return false;  // variation selectors
  if (cp == 0xFEFF || cp == 0xFFFD) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji
  return true;
}

bool has_letter(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t length;
    if (is_letter(decode_at(text, pos, &length))) return true;
    pos += length;
  }
  return false;
}

std::size_t count_word_hits(std::string_view text, std::string_view phrase) {
  if (phrase.empty()) return 0;
  std::size_t hits = 0;
  std::size_t pos = text.find(phrase);
  while (pos != std::string_view::npos) {
    std::size_t end = pos + phrase.size();
    bool left_ok = pos == 0 || !is_letter(code_point_before(text, pos));
    std::size_t length;
    bool right_ok = end == text.size() || !is_letter(decode_at(text, end, &length));
    if (left_ok && right_ok) {
      ++hits;
      pos = text.find(phrase, end);
    } else {
      pos = text.find(phrase, pos + 1);
    }
  }
  return hits;
}

AliasMap::AliasMap(
    const std::map<std::string, std::vector<std::string>>& entries) {
  std::map<std::string, std::string> owner;
  for (const auto& [entity, aliases] : entries) {
    if (entity.empty()) throw InvalidArgument("alias map: empty entity id");
    auto& set = entries_[entity];
    for (const auto& raw : aliases) {
      std::string alias = ascii_lower(trim(raw));
      if (alias.empty()) {
        throw InvalidArgument("alias map: empty alias for " + entity);
      }
      auto [it, inserted] = owner.emplace(alias, entity);
      if (!inserted && it->second != entity) {
        throw InvalidArgument("alias map: '" + alias + "' listed under both " +
                              it->second + " and " + entity);
      }
      set.insert(std::move(alias));
    }
    if (set.empty()) {
      throw InvalidArgument("alias map: entity " + entity + " has no aliases");
    }
  }
}

AliasMap AliasMap::defaults() {
  return AliasMap({{"TRUMP", {"trump", "donald trump"}},
                   {"HARRIS", {"harris", "kamala", "kamala harris"}}});
}

AliasMap AliasMap::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("alias map: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("alias map: expected an object");
  std::map<std::string, std::vector<std::string>> entries;
  for (const auto& [entity, aliases] : doc.items()) {
    if (!aliases.is_array()) {
      throw InvalidArgument("alias map: aliases of " + entity +
                            " must be an array");
    }
    auto& list = entries[entity];
    for (const auto& alias : aliases) {
      if (!alias.is_string()) {
        throw InvalidArgument("alias map: non-string alias for " + entity);
      }
      list.push_back(alias.get<std::string>());
    }
  }
  return AliasMap(entries);
}

AliasMap AliasMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open alias map");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::vector<std::string> AliasMap::entity_ids() const {
  std::vector<std::string> ids;
  for (const auto& [entity, aliases] : entries_) ids.push_back(entity);
  return ids;
}

std::vector<MentionSentence> filter_mentions(std::span<const Sentence> sentences,
                                             const AliasMap& aliases) {
  std::vector<MentionSentence> out;
  for (const auto& sentence : sentences) {
    std::string lowered = ascii_lower(sentence.text);
    // std::map iteration gives entity_id order.
    for (const auto& [entity, names] : aliases.entries()) {
      for (const auto& name : names) {
        if (count_word_hits(lowered, name) > 0) {
          out.push_back({sentence, entity});
          break;
        }
      }
    }
  }
  return out;
}

std::vector<MentionSentence> extract_mentions(const Corpus& corpus,
                                              const AliasMap& aliases) {
  std::vector<MentionSentence> out;
  for (const auto& post : corpus.posts()) {
    auto mentions = filter_mentions(sentences_of(post), aliases);
    out.insert(out.end(), std::make_move_iterator(mentions.begin()),
               std::make_move_iterator(mentions.end()));
  }
  return out;
}

PipelineStats pipeline_stats(const Corpus& corpus, const AliasMap& aliases) {
  PipelineStats stats;
  for (const auto& entity : aliases.entity_ids()) stats.per_entity[entity] = 0;
  stats.posts = corpus.size();
  for (const auto& post : corpus.posts()) {
    auto sentences = sentences_of(post);
    stats.sentences += sentences.size();
    auto mentions = filter_mentions(sentences, aliases);
    stats.mention_records += mentions.size();
    const std::string* last_id = nullptr;
    for (const auto& m : mentions) {
      ++stats.per_entity[m.entity_id];
      if (last_id == nullptr || *last_id != m.sentence.sentence_id) {
        ++stats.mention_sentences;
      }
      last_id = &m.sentence.sentence_id;
    }
  }
  return stats;
}

}  // namespace trustan
