#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "pseudomix/text.hpp"

namespace pseudomix::metrics {

using text::Tokens;

inline constexpr std::size_t kMaxOrder = 4;

struct BleuReport {
  double bleu = 0.0;  // in [0, 1]
  std::array<double, kMaxOrder> precisions{};
  std::array<std::size_t, kMaxOrder> matches{};
  std::array<std::size_t, kMaxOrder> totals{};
  double brevity_penalty = 0.0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  double score100() const { return 100.0 * bleu; }
};

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngram_counts(const Tokens& tokens, std::size_t n);

// Case-sensitive corpus BLEU, single reference, no smoothing. Throws
// AlignmentError on a length mismatch and DegenerateInputError on empty input.
BleuReport corpus_bleu(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references);

// "BLEU = 15.57, 50.00/20.00/10.00/5.00 (BP=1.000, ratio=1.000, hyp_len=.., ref_len=..)"
std::string format_bleu(const BleuReport& r);

}  // namespace pseudomix::metrics
