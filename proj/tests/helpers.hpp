#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pseudomix/corpus.hpp"
#include "pseudomix/model.hpp"
#include "pseudomix/rng.hpp"

namespace testutil {

using pseudomix::corpus::CorpusKind;
using pseudomix::corpus::ParallelCorpus;
using pseudomix::corpus::Provenance;
using pseudomix::corpus::Sentence;
using pseudomix::corpus::SentencePair;

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pseudomix-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Sentence sent(const std::string& line, Provenance p, const std::string& lang) {
  return Sentence(pseudomix::text::split_whitespace(line), p, lang);
}

inline SentencePair pair(const std::string& s, const std::string& t, Provenance ps = Provenance::Real,
                         Provenance pt = Provenance::Real, const std::string& sl = "fr",
                         const std::string& tl = "de") {
  return {sent(s, ps, sl), sent(t, pt, tl)};
}

// n pairs "s<i>" -> "t<i>" with the provenance of the given kind.
inline ParallelCorpus numbered(CorpusKind kind, std::size_t n, const std::string& tag = "") {
  const auto ps = kind == CorpusKind::TargetOriginated ? Provenance::Synthetic : Provenance::Real;
  const auto pt = kind == CorpusKind::SourceOriginated ? Provenance::Synthetic : Provenance::Real;
  std::vector<SentencePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    pairs.push_back(pair("s" + tag + std::to_string(i) + " x", "t" + tag + std::to_string(i), ps, pt));
  }
  return ParallelCorpus({"fr", "de"}, kind, std::move(pairs));
}

inline pseudomix::nmt::Ids random_ids(pseudomix::Rng& rng, std::size_t vocab, std::size_t min_len,
                                      std::size_t max_len, pseudomix::nmt::Id lowest = 0) {
  const auto len = min_len + rng.below(max_len - min_len + 1);
  pseudomix::nmt::Ids ids;
  for (std::size_t i = 0; i < len; ++i) {
    ids.push_back(lowest + static_cast<pseudomix::nmt::Id>(rng.below(vocab - static_cast<std::size_t>(lowest))));
  }
  return ids;
}

// Random words over a small alphabet, including multi-byte characters.
inline std::string random_word(pseudomix::Rng& rng) {
  static const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e", "l", "o", "w", "é", "ß", "ü", "n"};
  std::string w;
  const auto len = 1 + rng.below(7);
  for (std::size_t i = 0; i < len; ++i) w += alphabet[rng.below(alphabet.size())];
  return w;
}

inline std::vector<std::string> random_line(pseudomix::Rng& rng, std::size_t max_words = 12) {
  std::vector<std::string> out;
  const auto n = rng.below(max_words + 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_word(rng));
  return out;
}

}  // namespace testutil
