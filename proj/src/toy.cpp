#include "pseudomix/toy.hpp"

#include <cmath>
#include <unordered_set>

#include "pseudomix/error.hpp"
#include "pseudomix/rng.hpp"

namespace pseudomix::pipeline {

using corpus::MultiParallelCorpus;
using corpus::ParallelCorpus;
using corpus::Provenance;
using corpus::Sentence;
using corpus::SentencePair;
using corpus::Triple;

void ToyLanguageSpec::validate() const {
  if (source_vocab < 2 || pivot_vocab < 2 || target_vocab < 2) {
    throw ConfigError("toy vocabularies need at least 2 words");
  }
  if (!(noise >= 0.0 && noise < 1.0)) throw ConfigError("toy noise must be in [0, 1)");
  if (min_len < 1 || max_len < min_len) throw ConfigError("toy sentence lengths invalid");
  if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf exponent must be >= 0");
  if (source_lang == pivot_lang || pivot_lang == target_lang || source_lang == target_lang) {
    throw ConfigError("toy language codes must be distinct");
  }
}

std::vector<std::string> toy_lexicon(std::size_t language, std::size_t vocab, std::uint64_t seed) {
  static const char* const kConsonants[3] = {"bdgkm", "lnprs", "tvzfh"};
  static const char* const kVowels = "aeiou";
  const std::string cons = kConsonants[language % 3];
  std::vector<std::string> syllables;
  for (char c : cons) {
    for (const char* v = kVowels; *v; ++v) syllables.push_back(std::string{c, *v});
  }
  std::size_t n_syll = 2;
  std::size_t space = syllables.size() * syllables.size();
  while (space < vocab) {
    ++n_syll;
    space *= syllables.size();
  }
  Rng rng(seed * 3 + language + 17);
  const auto picks = rng.sample_without_replacement(space, vocab);
  std::vector<std::string> words;
  words.reserve(vocab);
  for (auto code : picks) {
    std::string w;
    for (std::size_t k = 0; k < n_syll; ++k) {
      w += syllables[code % syllables.size()];
      code /= syllables.size();
    }
    words.push_back(std::move(w));
  }
  return words;
}

namespace {

class Generator {
 public:
  explicit Generator(const ToyLanguageSpec& spec)
      : spec_(spec),
        rng_(spec.seed),
        src_words_(toy_lexicon(0, spec.source_vocab, spec.seed)),
        piv_words_(toy_lexicon(1, spec.pivot_vocab, spec.seed)),
        tgt_words_(toy_lexicon(2, spec.target_vocab, spec.seed)) {
    src_map_.resize(spec.pivot_vocab);
    tgt_map_.resize(spec.pivot_vocab);
    std::vector<std::size_t> ps(spec.source_vocab), pt(spec.target_vocab);
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i] = i;
    for (std::size_t i = 0; i < pt.size(); ++i) pt[i] = i;
    rng_.shuffle(ps);
    rng_.shuffle(pt);
    for (std::size_t p = 0; p < spec.pivot_vocab; ++p) {
      src_map_[p] = ps[p % ps.size()];
      tgt_map_[p] = pt[p % pt.size()];
    }
    double z = 0.0;
    for (std::size_t k = 0; k < spec.pivot_vocab; ++k) {
      z += 1.0 / std::pow(static_cast<double>(k + 1), spec.zipf_exponent);
      cdf_.push_back(z);
    }
    for (auto& c : cdf_) c /= z;
  }

  std::vector<std::size_t> fresh_pivot() {
    const std::size_t limit = 1000 + 200 * (used_.size() + 1);
    for (std::size_t attempt = 0; attempt < limit; ++attempt) {
      const std::size_t len = spec_.min_len + rng_.below(spec_.max_len - spec_.min_len + 1);
      std::vector<std::size_t> s(len);
      std::string key;
      for (auto& w : s) {
        w = draw_word();
        key += std::to_string(w) + ",";
      }
      if (used_.insert(key).second) return s;
    }
    throw GenerationError("could not find a new distinct pivot sentence after " +
                          std::to_string(limit) + " attempts; vocabulary too small");
  }

  text::Tokens pivot_side(const std::vector<std::size_t>& s) const {
    text::Tokens out;
    for (auto w : s) out.push_back(piv_words_[w]);
    return out;
  }

  text::Tokens source_side(const std::vector<std::size_t>& s) {
    text::Tokens out;
    for (auto w : s) out.push_back(noisy(src_words_, src_map_[w]));
    for (std::size_t i = 0; i + 1 < out.size(); i += 2) std::swap(out[i], out[i + 1]);
    return out;
  }

  text::Tokens target_side(const std::vector<std::size_t>& s) {
    text::Tokens out;
    for (auto w : s) out.push_back(noisy(tgt_words_, tgt_map_[w]));
    return out;
  }

 private:
  std::size_t draw_word() {
    const double u = rng_.uniform();
    std::size_t k = 0;
    while (k + 1 < cdf_.size() && cdf_[k] <= u) ++k;
    return k;
  }

  const std::string& noisy(const std::vector<std::string>& lexicon, std::size_t word) {
    if (spec_.noise > 0.0 && rng_.uniform() < spec_.noise) return lexicon[rng_.below(lexicon.size())];
    return lexicon[word];
  }

  const ToyLanguageSpec& spec_;
  Rng rng_;
  std::vector<std::string> src_words_, piv_words_, tgt_words_;
  std::vector<std::size_t> src_map_, tgt_map_;
  std::vector<double> cdf_;
  std::unordered_set<std::string> used_;
};

double sentence_space(const ToyLanguageSpec& spec) {
  // sum over lengths of V^L
  double total = 0.0;
  for (std::size_t L = spec.min_len; L <= spec.max_len; ++L) {
    total += std::pow(static_cast<double>(spec.pivot_vocab), static_cast<double>(L));
  }
  return total;
}

}  // namespace

ToyData generate_toy_multiparallel(const ToyLanguageSpec& spec) {
  spec.validate();
  const std::size_t requested = spec.train_triples + spec.dev_size + spec.test_size +
                                2 * spec.mother_size + spec.real_size;
  if (sentence_space(spec) < static_cast<double>(requested)) {
    throw GenerationError("pivot vocabulary of " + std::to_string(spec.pivot_vocab) +
                          " cannot produce " + std::to_string(requested) + " distinct sentences");
  }
  Generator gen(spec);
  const auto& S = spec.source_lang;
  const auto& P = spec.pivot_lang;
  const auto& T = spec.target_lang;

  auto triples = [&](std::size_t n) {
    std::vector<Triple> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto piv = gen.fresh_pivot();
      Sentence src(gen.source_side(piv), Provenance::Real, S);
      Sentence tgt(gen.target_side(piv), Provenance::Real, T);
      out.push_back({std::move(src), Sentence(gen.pivot_side(piv), Provenance::Real, P),
                     std::move(tgt)});
    }
    return MultiParallelCorpus(S, P, T, std::move(out));
  };
  auto train = triples(spec.train_triples);
  auto dev = triples(spec.dev_size);
  auto test = triples(spec.test_size);

  auto pairs = [&](std::size_t n, bool to_source) {
    std::vector<SentencePair> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto piv = gen.fresh_pivot();
      Sentence p(gen.pivot_side(piv), Provenance::Real, P);
      Sentence other(to_source ? gen.source_side(piv) : gen.target_side(piv), Provenance::Real,
                     to_source ? S : T);
      out.push_back({std::move(p), std::move(other)});
    }
    return ParallelCorpus({P, to_source ? S : T}, corpus::CorpusKind::Real, std::move(out));
  };
  auto mother_source = pairs(spec.mother_size, true);
  auto mother_target = pairs(spec.mother_size, false);

  std::vector<SentencePair> real;
  real.reserve(spec.real_size);
  for (std::size_t i = 0; i < spec.real_size; ++i) {
    const auto piv = gen.fresh_pivot();
    Sentence src(gen.source_side(piv), Provenance::Real, S);
    Sentence tgt(gen.target_side(piv), Provenance::Real, T);
    real.push_back({std::move(src), std::move(tgt)});
  }
  return {std::move(train),
          std::move(dev),
          std::move(test),
          std::move(mother_source),
          std::move(mother_target),
          ParallelCorpus({S, T}, corpus::CorpusKind::Real, std::move(real))};
}

}  // namespace pseudomix::pipeline
