#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pseudomix/text.hpp"

namespace pseudomix::subword {

using text::Tokens;

inline constexpr const char* kTokenizerVersion = "rules-v1";
inline constexpr const char* kEndOfWord = "</w>";

// Whitespace split, then leading and trailing punctuation from
// . , ! ? ; : ( ) " ' « » - is peeled off into single-character tokens.
// Character content and case are never changed.
Tokens tokenize(std::string_view line);

class BpeModel {
 public:
  using Merge = std::pair<std::string, std::string>;

  BpeModel() = default;
  // Throws ConfigError on duplicate merges.
  explicit BpeModel(std::vector<Merge> merges, std::string eow_marker = kEndOfWord);

  const std::vector<Merge>& merges() const { return merges_; }
  const std::string& eow_marker() const { return eow_; }
  std::size_t num_merges() const { return merges_.size(); }

  // Rank of a merge in learning order, or npos.
  std::size_t rank(const std::string& left, const std::string& right) const;

  friend bool operator==(const BpeModel& a, const BpeModel& b) {
    return a.merges_ == b.merges_ && a.eow_ == b.eow_;
  }

 private:
  std::vector<Merge> merges_;
  std::string eow_ = kEndOfWord;
  std::map<Merge, std::size_t> ranks_;
};

// Greedy most-frequent-pair merging over the word-frequency table. Ties go to
// the lexicographically smallest (left, right). Stops early once no pair
// occurs at least twice. Throws ConfigError on an empty corpus.
BpeModel bpe_learn(const std::vector<Tokens>& corpus, std::size_t num_merges);

// Segments a single token: characters with the marker on the last one, then
// merges applied in rank order until none applies.
Tokens bpe_segment(const BpeModel& model, const std::string& token);

Tokens bpe_apply(const BpeModel& model, const Tokens& tokens);

// Concatenates units and closes a token at each marker. Throws
// MalformedStreamError (position of the unterminated token's first unit) if
// the stream does not end on a marker.
Tokens bpe_undo(const Tokens& units, const std::string& eow_marker = kEndOfWord);

// Like bpe_undo, but an unterminated trailing token is closed instead of
// rejected. Used on raw model output.
Tokens bpe_undo_lenient(const Tokens& units, const std::string& eow_marker = kEndOfWord);

// "#version 1" header, then "left right" per line in learned order.
void save_bpe(const BpeModel& model, const std::string& path);
BpeModel load_bpe(const std::string& path);

}  // namespace pseudomix::subword
