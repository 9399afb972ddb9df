#include "pseudomix/decode.hpp"

#include <algorithm>
#include <iostream>

#include "pseudomix/error.hpp"

namespace pseudomix::decode {

void DecodeConfig::validate() const {
  if (beam_size < 1) throw ConfigError("beam size must be >= 1");
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
}

namespace {

double ranking_score(const Hypothesis& h, bool normalize) {
  return normalize ? h.logprob / static_cast<double>(h.tokens.size()) : h.logprob;
}

DecodeResult to_result(const Hypothesis& h, bool normalize) {
  DecodeResult r;
  r.tokens = h.tokens;
  r.ended_with_eos = !r.tokens.empty() && r.tokens.back() == nmt::kEos;
  if (r.ended_with_eos) r.tokens.pop_back();
  r.logprob = h.logprob;
  r.score = ranking_score(h, normalize);
  return r;
}

}  // namespace

DecodeResult beam_search(const ModelParameters& params, const Ids& source, const DecodeConfig& cfg) {
  cfg.validate();
  const auto enc = nmt::encode(params, source);
  const auto vocab = static_cast<std::size_t>(params.tgt_emb.rows());

  std::vector<Hypothesis> live(1);
  live[0].state = nmt::initial_state(params, enc);
  std::vector<Hypothesis> done;

  struct Candidate {
    double logprob;
    std::size_t parent;
    Id token;
  };

  for (std::size_t len = 1; len <= cfg.max_len && !live.empty(); ++len) {
    std::vector<Candidate> cands;
    std::vector<nmt::StepOutput<float>> outs;
    outs.reserve(live.size());
    cands.reserve(live.size() * vocab);
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Id prev = live[i].tokens.empty() ? nmt::kBos : live[i].tokens.back();
      outs.push_back(nmt::decoder_step(params, prev, live[i].state, enc));
      const auto& lp = outs.back().log_probs;
      for (std::size_t y = 0; y < vocab; ++y) {
        cands.push_back({live[i].logprob + static_cast<double>(lp(static_cast<Eigen::Index>(y))), i,
                         static_cast<Id>(y)});
      }
    }
    const std::size_t keep = std::min(cands.size(), cfg.beam_size - done.size());
    // All candidates have the same length, so the tie-break is lexicographic.
    auto better = [&](const Candidate& a, const Candidate& b) {
      if (a.logprob != b.logprob) return a.logprob > b.logprob;
      const auto& ta = live[a.parent].tokens;
      const auto& tb = live[b.parent].tokens;
      if (ta != tb) return ta < tb;
      return a.token < b.token;
    };
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      better);

    std::vector<Hypothesis> next;
    for (std::size_t k = 0; k < keep; ++k) {
      const auto& c = cands[k];
      Hypothesis h;
      h.tokens = live[c.parent].tokens;
      h.tokens.push_back(c.token);
      h.logprob = c.logprob;
      if (c.token == nmt::kEos) {
        h.finished = true;
        done.push_back(std::move(h));
      } else if (len == cfg.max_len) {
        done.push_back(std::move(h));
      } else {
        h.state = outs[c.parent].next;
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }
  if (done.empty()) throw Error("beam search ended without any hypothesis");

  const auto& best = *std::min_element(done.begin(), done.end(), [&](const auto& a, const auto& b) {
    const double sa = ranking_score(a, cfg.length_normalize);
    const double sb = ranking_score(b, cfg.length_normalize);
    if (sa != sb) return sa > sb;
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
    return a.tokens < b.tokens;
  });
  return to_result(best, cfg.length_normalize);
}

DecodeResult greedy_decode(const ModelParameters& params, const Ids& source, std::size_t max_len) {
  const auto enc = nmt::encode(params, source);
  auto state = nmt::initial_state(params, enc);
  Hypothesis h;
  Id prev = nmt::kBos;
  for (std::size_t len = 1; len <= max_len; ++len) {
    auto out = nmt::decoder_step(params, prev, state, enc);
    Eigen::Index best = 0;
    for (Eigen::Index y = 1; y < out.log_probs.size(); ++y) {
      if (out.log_probs(y) > out.log_probs(best)) best = y;
    }
    h.logprob += static_cast<double>(out.log_probs(best));
    prev = static_cast<Id>(best);
    h.tokens.push_back(prev);
    if (prev == nmt::kEos) break;
    state = std::move(out.next);
  }
  return to_result(h, false);
}

CorpusTranslation translate_corpus(const ModelParameters& params, const std::vector<Ids>& sources,
                                   const DecodeConfig& cfg) {
  cfg.validate();
  CorpusTranslation out;
  out.outputs.resize(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    try {
      out.outputs[i] = beam_search(params, sources[i], cfg).tokens;
    } catch (const std::exception& e) {
      out.outputs[i].clear();
      out.failures.push_back(i);
    }
  }
  return out;
}

}  // namespace pseudomix::decode
