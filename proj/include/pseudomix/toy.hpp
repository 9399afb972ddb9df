#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pseudomix/corpus.hpp"

namespace pseudomix::pipeline {

// Three synthetic languages linked through the pivot. A pivot sentence is a
// Zipf-distributed word sequence; the source side maps each word through a
// fixed lexicon and swaps adjacent word pairs, the target side maps each word
// and keeps the order. Each source/target token is replaced by a random word
// with probability `noise`.
struct ToyLanguageSpec {
  std::string source_lang = "src";
  std::string pivot_lang = "piv";
  std::string target_lang = "tgt";
  std::size_t source_vocab = 60;
  std::size_t pivot_vocab = 60;
  std::size_t target_vocab = 60;
  double noise = 0.1;
  double zipf_exponent = 1.0;
  std::size_t min_len = 3;
  std::size_t max_len = 8;
  std::size_t train_triples = 5000;
  std::size_t dev_size = 200;
  std::size_t test_size = 300;
  std::size_t mother_size = 2000;  // per mother corpus (pivot-source, pivot-target)
  std::size_t real_size = 500;     // direct source-target pairs
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const ToyLanguageSpec&, const ToyLanguageSpec&) = default;
};

struct ToyData {
  corpus::MultiParallelCorpus train;
  corpus::MultiParallelCorpus dev;
  corpus::MultiParallelCorpus test;
  corpus::ParallelCorpus mother_source;  // pivot -> source training data
  corpus::ParallelCorpus mother_target;  // pivot -> target training data
  corpus::ParallelCorpus real;           // source -> target ground truth
};

// Every generated pivot sentence is distinct, so all splits are disjoint.
// Throws GenerationError if the vocabulary cannot supply enough sentences.
ToyData generate_toy_multiparallel(const ToyLanguageSpec& spec);

// Surface form of word `index` in the lexicon of language 0 (source),
// 1 (pivot) or 2 (target).
std::vector<std::string> toy_lexicon(std::size_t language, std::size_t vocab, std::uint64_t seed);

}  // namespace pseudomix::pipeline
