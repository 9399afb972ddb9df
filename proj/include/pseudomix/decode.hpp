#pragma once

#include <cstddef>
#include <vector>

#include "pseudomix/model.hpp"

namespace pseudomix::decode {

using nmt::Id;
using nmt::Ids;
using nmt::ModelParameters;

inline constexpr std::size_t kDefaultMaxLen = 60;  // 50 units plus slack

struct DecodeConfig {
  std::size_t beam_size = 12;
  std::size_t max_len = kDefaultMaxLen;
  bool length_normalize = true;

  void validate() const;
  friend bool operator==(const DecodeConfig&, const DecodeConfig&) = default;
};

struct Hypothesis {
  Ids tokens;              // emitted ids, EOS included when finished
  double logprob = 0.0;    // sum of the chosen step log-probs
  nmt::DecoderState<float> state;
  bool finished = false;
};

struct DecodeResult {
  Ids tokens;              // without the final EOS
  bool ended_with_eos = false;
  double logprob = 0.0;    // unnormalized
  double score = 0.0;      // ranking score (normalized if configured)
};

// Keeps the K best partial hypotheses by accumulated log-prob; a hypothesis
// that emits EOS leaves the beam, which then shrinks by one. Hypotheses cut
// at max_len compete with the finished ones. Final score is logprob divided
// by the generated length (EOS included) when length_normalize is set.
// Ties go to the shorter hypothesis, then to the smaller id sequence.
DecodeResult beam_search(const ModelParameters& params, const Ids& source, const DecodeConfig& cfg);

// Argmax at every step, lowest id on ties.
DecodeResult greedy_decode(const ModelParameters& params, const Ids& source, std::size_t max_len);

struct CorpusTranslation {
  std::vector<Ids> outputs;            // input order; empty where decoding failed
  std::vector<std::size_t> failures;   // indices of failed inputs
};

CorpusTranslation translate_corpus(const ModelParameters& params, const std::vector<Ids>& sources,
                                   const DecodeConfig& cfg);

}  // namespace pseudomix::decode
