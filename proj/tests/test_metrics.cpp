#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pseudomix/error.hpp"
#include "pseudomix/metrics.hpp"

using namespace pseudomix;
using namespace pseudomix::metrics;

namespace {

Tokens words(const std::string& s) { return text::split_whitespace(s); }

std::vector<Tokens> random_corpus(Rng& rng, std::size_t n, std::size_t vocab) {
  std::vector<Tokens> out;
  for (std::size_t i = 0; i < n; ++i) {
    Tokens t;
    const auto len = rng.below(12);
    for (std::size_t k = 0; k < len; ++k) t.push_back("w" + std::to_string(rng.below(vocab)));
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("clipped unigram precision fixture") {
  const auto r = corpus_bleu({words("the the the the the the the")}, {words("the cat is on the mat")});
  CHECK(r.matches[0] == 2);
  CHECK(r.totals[0] == 7);
  CHECK(r.precisions[0] == 2.0 / 7.0);
  CHECK(r.bleu == 0.0);
}

TEST_CASE("perfect match scores one") {
  const std::vector<Tokens> c = {words("a b c d e"), words("x y z w v u")};
  const auto r = corpus_bleu(c, c);
  CHECK(r.bleu == 1.0);
  CHECK(r.brevity_penalty == 1.0);
}

TEST_CASE("brevity penalty and zero precision") {
  const auto r = corpus_bleu({words("a b c d")}, {words("a b c d e f g h")});
  CHECK(r.brevity_penalty == doctest::Approx(std::exp(1.0 - 2.0)));
  CHECK(r.bleu == doctest::Approx(std::exp(1.0 - 2.0)));
  CHECK(corpus_bleu({{}}, {words("a b")}).bleu == 0.0);
  CHECK(corpus_bleu({words("a b c")}, {words("d e f")}).bleu == 0.0);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(corpus_bleu({words("a")}, {}), AlignmentError);
  CHECK_THROWS_AS(corpus_bleu({}, {}), DegenerateInputError);
}

TEST_CASE("ngram counts") {
  const auto c = ngram_counts(words("a b a b"), 2);
  CHECK(c.size() == 2);
  CHECK(c.at({"a", "b"}) == 2);
  CHECK(c.at({"b", "a"}) == 1);
  CHECK(ngram_counts(words("a"), 2).empty());
}

TEST_CASE("agrees with the brute-force oracle") {
  Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    const auto n = 1 + rng.below(20);
    const auto vocab = 2 + rng.below(6);
    const auto refs = random_corpus(rng, n, vocab);
    auto hyps = random_corpus(rng, n, vocab);
    if (rng.below(3) == 0) hyps = refs;
    const auto r = corpus_bleu(hyps, refs);
    const auto o = oracle::brute_bleu(hyps, refs);
    CHECK(std::abs(r.bleu - o.bleu) <= 1e-9);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(r.precisions[k] - o.precision[k]) <= 1e-12);
    CHECK(std::abs(r.brevity_penalty - o.bp) <= 1e-12);
  }
}

TEST_CASE("format") {
  const auto r = corpus_bleu({words("a b c d e")}, {words("a b c d e")});
  CHECK(format_bleu(r).rfind("BLEU = 100.00, 100.00/100.00/100.00/100.00 (BP=1.000", 0) == 0);
}

}  // TEST_SUITE
