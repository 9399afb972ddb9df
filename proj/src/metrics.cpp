#include "pseudomix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pseudomix/error.hpp"

namespace pseudomix::metrics {

NgramCounts ngram_counts(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

BleuReport corpus_bleu(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references) {
  if (hypotheses.size() != references.size()) {
    throw AlignmentError(hypotheses.size(), references.size(), "hypothesis/reference count");
  }
  if (hypotheses.empty()) throw DegenerateInputError("BLEU of an empty corpus");

  BleuReport r;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& hyp = hypotheses[s];
    const auto& ref = references[s];
    r.hyp_length += hyp.size();
    r.ref_length += ref.size();
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      const auto h = ngram_counts(hyp, n);
      const auto g = ngram_counts(ref, n);
      for (const auto& [gram, count] : h) {
        auto it = g.find(gram);
        if (it != g.end()) r.matches[n - 1] += std::min(count, it->second);
      }
      r.totals[n - 1] += hyp.size() >= n ? hyp.size() - n + 1 : 0;
    }
  }

  bool any_zero = false;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    r.precisions[n] = r.totals[n] ? static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]) : 0.0;
    if (r.precisions[n] == 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(r.precisions[n]);
    }
  }
  if (r.hyp_length == 0) {
    r.brevity_penalty = 0.0;
  } else if (r.hyp_length > r.ref_length) {
    r.brevity_penalty = 1.0;
  } else {
    r.brevity_penalty =
        std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length));
  }
  r.bleu = any_zero ? 0.0 : r.brevity_penalty * std::exp(log_sum / static_cast<double>(kMaxOrder));
  return r;
}

std::string format_bleu(const BleuReport& r) {
  char buf[256];
  const double ratio =
      r.ref_length ? static_cast<double>(r.hyp_length) / static_cast<double>(r.ref_length) : 0.0;
  std::snprintf(buf, sizeof buf,
                "BLEU = %.2f, %.2f/%.2f/%.2f/%.2f (BP=%.3f, ratio=%.3f, hyp_len=%zu, ref_len=%zu)",
                r.score100(), 100 * r.precisions[0], 100 * r.precisions[1], 100 * r.precisions[2],
                100 * r.precisions[3], r.brevity_penalty, ratio, r.hyp_length, r.ref_length);
  return buf;
}

}  // namespace pseudomix::metrics
