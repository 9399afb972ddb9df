#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pseudomix/text.hpp"

namespace pseudomix::corpus {

using text::Tokens;

enum class Provenance { Real, Synthetic };

enum class CorpusKind { Real, SourceOriginated, TargetOriginated, Mixed };

std::string to_string(Provenance p);
std::string to_string(CorpusKind k);
CorpusKind parse_kind(const std::string& s);

class Sentence {
 public:
  // Throws ConfigError if any token is empty.
  Sentence(Tokens tokens, Provenance provenance, std::string language);

  const Tokens& tokens() const { return tokens_; }
  Provenance provenance() const { return provenance_; }
  const std::string& language() const { return language_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  // Same provenance and language, new content.
  Sentence with_tokens(Tokens tokens) const;

  friend bool operator==(const Sentence&, const Sentence&) = default;

 private:
  Tokens tokens_;
  Provenance provenance_;
  std::string language_;
};

struct SentencePair {
  Sentence source;
  Sentence target;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct LanguagePair {
  std::string source;
  std::string target;
};

class ParallelCorpus {
 public:
  // Validates every invariant of the kind; throws ConfigError on violation.
  ParallelCorpus(LanguagePair langs, CorpusKind kind, std::vector<SentencePair> pairs);

  const std::vector<SentencePair>& pairs() const { return pairs_; }
  const std::string& source_language() const { return langs_.source; }
  const std::string& target_language() const { return langs_.target; }
  const LanguagePair& languages() const { return langs_; }
  CorpusKind kind() const { return kind_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

 private:
  LanguagePair langs_;
  CorpusKind kind_;
  std::vector<SentencePair> pairs_;
};

struct Triple {
  Sentence source;
  Sentence pivot;
  Sentence target;

  friend bool operator==(const Triple&, const Triple&) = default;
};

class MultiParallelCorpus {
 public:
  MultiParallelCorpus() = default;
  // All sides must be Real and share the given language codes.
  MultiParallelCorpus(std::string source_lang, std::string pivot_lang, std::string target_lang,
                      std::vector<Triple> triples);

  const std::vector<Triple>& triples() const { return triples_; }
  const std::string& source_language() const { return source_lang_; }
  const std::string& pivot_language() const { return pivot_lang_; }
  const std::string& target_language() const { return target_lang_; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

 private:
  std::string source_lang_;
  std::string pivot_lang_;
  std::string target_lang_;
  std::vector<Triple> triples_;
};

// ---------------------------------------------------------------------------
// Loading and persistence

struct SideProvenance {
  Provenance source = Provenance::Real;
  Provenance target = Provenance::Real;
};

// Line i of each file becomes pair i, split on whitespace only.
// Throws AlignmentError on line-count mismatch, DecodeError on bad UTF-8.
ParallelCorpus load_parallel(const std::string& source_path, const std::string& target_path,
                             const LanguagePair& langs, SideProvenance provenance = {});

struct Lineage {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> parents;
  std::vector<std::string> preprocessing;
};

std::string source_path(const std::string& basename, const ParallelCorpus& c);
std::string target_path(const std::string& basename, const ParallelCorpus& c);
inline std::string meta_path(const std::string& basename) { return basename + ".meta.json"; }

// Writes <basename>.<src>, <basename>.<tgt> and <basename>.meta.json.
void save_corpus(const ParallelCorpus& corpus, const std::string& basename,
                 const Lineage& lineage = {});

struct LoadedCorpus {
  ParallelCorpus corpus;
  Lineage lineage;
};
LoadedCorpus load_corpus(const std::string& basename);

MultiParallelCorpus load_multi(const std::string& source_path, const std::string& pivot_path,
                               const std::string& target_path, const std::string& source_lang,
                               const std::string& pivot_lang, const std::string& target_lang);
void save_multi(const MultiParallelCorpus& multi, const std::string& basename);

// ---------------------------------------------------------------------------
// Operations

struct AlignStats {
  std::size_t matched_pairs = 0;        // src_pivot pairs with at least one partner
  std::size_t candidate_triples = 0;    // cross product size before dedup
  std::size_t duplicates_removed = 0;
  std::size_t warnings = 0;             // incremented when nothing matched
};

struct AlignResult {
  MultiParallelCorpus multi;
  AlignStats stats;
};

// Joins two corpora on identical (whitespace-normalized) pivot lines.
AlignResult pivot_align(const ParallelCorpus& src_pivot, const ParallelCorpus& pivot_tgt);

enum class Side { Source, Target };

// One output per input; nullopt marks a failed sentence.
using Translator =
    std::function<std::vector<std::optional<Tokens>>(const std::vector<Tokens>& pivots)>;

// Replaces `side` of every triple with the translation of its pivot.
// Side::Target yields a SourceOriginated corpus, Side::Source a TargetOriginated one.
ParallelCorpus project_synthetic(const MultiParallelCorpus& multi, Side side,
                                 const Translator& translator);

// floor(N1/2) pairs of the first plus ceil(N2/2) of the second, shuffled.
ParallelCorpus mix_pseudo(const ParallelCorpus& source_originated,
                          const ParallelCorpus& target_originated, std::uint64_t seed);

struct FilterResult {
  ParallelCorpus corpus;
  std::vector<std::size_t> kept;  // indices into the input, ascending
  std::size_t removed = 0;
};

inline constexpr std::size_t kDefaultMaxUnits = 50;

FilterResult filter_length(const ParallelCorpus& corpus, std::size_t max_units = kDefaultMaxUnits);
FilterResult drop_empty(const ParallelCorpus& corpus);

// Keeps the given input indices, in the given order.
ParallelCorpus select(const ParallelCorpus& corpus, const std::vector<std::size_t>& indices);

// Source and target exchanged; SourceOriginated and TargetOriginated swap.
ParallelCorpus swap_sides(const ParallelCorpus& corpus);

// Applies fn to every sentence, keeping provenance and language.
ParallelCorpus map_tokens(const ParallelCorpus& corpus,
                          const std::function<Tokens(const Sentence&)>& fn);

struct CorpusStats {
  std::size_t size = 0;
  std::optional<double> avg_source_length;
  std::optional<double> avg_target_length;
};

CorpusStats corpus_stats(const ParallelCorpus& corpus);

struct StatsRow {
  std::string name;
  CorpusStats stats;
};

// "Corpus  Size  Avg len <src>  Avg len <tgt>" as TSV, averages to 2 decimals,
// absent averages printed as "-".
std::string format_stats_table(const std::vector<StatsRow>& rows, const std::string& source_lang,
                               const std::string& target_lang);

// Source/target provenance pattern of a pair: 'r' real-real, 's' real-synthetic,
// 't' synthetic-real, 'x' synthetic-synthetic.
char pattern_of(const SentencePair& pair);

}  // namespace pseudomix::corpus
