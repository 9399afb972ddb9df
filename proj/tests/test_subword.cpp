#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pseudomix/error.hpp"
#include "pseudomix/subword.hpp"

using namespace pseudomix;
using namespace pseudomix::subword;

namespace {

std::vector<Tokens> expand(const std::vector<std::pair<std::string, int>>& freq) {
  std::vector<Tokens> corpus;
  for (const auto& [w, n] : freq) {
    for (int i = 0; i < n; ++i) corpus.push_back({w});
  }
  return corpus;
}

}  // namespace

TEST_SUITE("subword") {

TEST_CASE("tokenize peels punctuation") {
  CHECK(tokenize("Hello, world!") == Tokens{"Hello", ",", "world", "!"});
  CHECK(tokenize("(a)") == Tokens{"(", "a", ")"});
  CHECK(tokenize("«Oui»  -dit-il.") == Tokens{"«", "Oui", "»", "-", "dit-il", "."});
  CHECK(tokenize("...") == Tokens{".", ".", "."});
  CHECK(tokenize("  ").empty());
  CHECK(tokenize("Ünïcode CASE") == Tokens{"Ünïcode", "CASE"});
}

TEST_CASE("tokenize is idempotent after joining") {
  Rng rng(5);
  const std::vector<std::string> pieces = {"word", "Çava", ",", ".", "(", ")", "\"", "'", "«", "»", "-", "x!", "?y", ":"};
  for (int i = 0; i < 1000; ++i) {
    std::string line;
    const auto n = rng.below(10);
    for (std::size_t k = 0; k < n; ++k) {
      line += pieces[rng.below(pieces.size())];
      if (rng.below(2)) line += " ";
    }
    const auto once = tokenize(line);
    CHECK(tokenize(text::join(once)) == once);
  }
}

TEST_CASE("bpe_learn on the classic fixture matches the brute-force oracle") {
  const std::vector<std::pair<std::string, int>> freq = {{"low", 5}, {"lower", 2}, {"newest", 6}, {"widest", 3}};
  for (std::size_t n : {0, 1, 5, 10, 30}) {
    const auto model = bpe_learn(expand(freq), n);
    const auto expected = oracle::brute_bpe_learn(freq, n);
    CHECK(model.merges() == expected);
  }
  const auto first = bpe_learn(expand(freq), 1);
  REQUIRE(first.num_merges() == 1);
  CHECK(first.merges()[0] == BpeModel::Merge{"e", "s"});
}

TEST_CASE("bpe_learn small cases") {
  CHECK(bpe_learn({{"aa", "aa", "aa"}}, 1).merges() == std::vector<BpeModel::Merge>{{"a", "a</w>"}});
  CHECK(bpe_learn({{"abc"}}, 10).num_merges() == 0);  // no pair occurs twice
  CHECK(bpe_learn({{"ab"}}, 0).num_merges() == 0);
  CHECK_THROWS_AS(bpe_learn({}, 5), ConfigError);
  CHECK_THROWS_AS(BpeModel(std::vector<BpeModel::Merge>{{"a", "b"}, {"a", "b"}}), ConfigError);
}

TEST_CASE("bpe_learn agrees with the oracle on random corpora") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Tokens> corpus;
    for (int i = 0; i < 60; ++i) corpus.push_back(testutil::random_line(rng, 8));
    std::map<std::string, int> freq;
    for (const auto& l : corpus) for (const auto& w : l) ++freq[w];
    if (freq.empty()) continue;
    std::vector<std::pair<std::string, int>> table(freq.begin(), freq.end());
    CHECK(bpe_learn(corpus, 40).merges() == oracle::brute_bpe_learn(table, 40));
  }
}

TEST_CASE("bpe_apply examples") {
  BpeModel none;
  CHECK(bpe_apply(none, {"ab"}) == Tokens{"a", "b</w>"});
  BpeModel m(std::vector<BpeModel::Merge>{{"a", "b"}});
  CHECK(bpe_segment(m, "ab") == Tokens{"a", "b</w>"});
  CHECK(bpe_segment(m, "abc") == Tokens{"ab", "c</w>"});
  BpeModel m2(std::vector<BpeModel::Merge>{{"a", "b</w>"}});
  CHECK(bpe_segment(m2, "ab") == Tokens{"ab</w>"});
  CHECK(bpe_undo({"lo", "w</w>"}) == Tokens{"low"});
  CHECK(bpe_undo({}).empty());
}

TEST_CASE("bpe_undo rejects unterminated streams") {
  try {
    bpe_undo({"lo", "w</w>", "ne", "w"});
    FAIL("expected MalformedStreamError");
  } catch (const MalformedStreamError& e) {
    CHECK(e.position() == 2);
  }
  CHECK(bpe_undo_lenient({"lo", "w</w>", "ne", "w"}) == Tokens{"low", "new"});
}

TEST_CASE("round trip over random lines and random learned models") {
  Rng rng(99);
  for (int model_i = 0; model_i < 10; ++model_i) {
    std::vector<Tokens> corpus;
    for (int i = 0; i < 200; ++i) corpus.push_back(testutil::random_line(rng));
    const auto model = bpe_learn(corpus, 5 + rng.below(100));
    std::set<std::string> symbols;
    for (const auto& [l, r] : model.merges()) symbols.insert(l + r);
    for (int i = 0; i < 1000; ++i) {
      const auto line = testutil::random_line(rng);
      const auto units = bpe_apply(model, line);
      CHECK(bpe_undo(units) == line);
      for (const auto& u : units) {
        // Every unit is a single character (with or without marker) or a merge result.
        auto stripped = u.size() >= 4 && u.ends_with("</w>") ? u.substr(0, u.size() - 4) : u;
        const bool single = text::split_code_points(stripped).size() == 1;
        CHECK((single || symbols.count(u) == 1));
      }
    }
  }
}

TEST_CASE("learning is deterministic and vocabulary is bounded") {
  Rng rng(3);
  std::vector<Tokens> corpus;
  for (int i = 0; i < 300; ++i) corpus.push_back(testutil::random_line(rng));
  const auto a = bpe_learn(corpus, 60);
  const auto b = bpe_learn(corpus, 60);
  CHECK(a == b);
  std::set<std::string> alphabet, units;
  for (const auto& l : corpus) {
    for (const auto& w : l) {
      for (const auto& c : text::split_code_points(w)) alphabet.insert(c);
      for (const auto& u : bpe_segment(a, w)) units.insert(u);
    }
  }
  CHECK(units.size() <= 2 * alphabet.size() + a.num_merges());
}

TEST_CASE("merge file round trip") {
  const auto dir = testutil::temp_dir("bpe");
  BpeModel m(std::vector<BpeModel::Merge>{{"a", "b"}, {"ab", "c</w>"}, {"é", "ß"}});
  save_bpe(m, (dir / "m.bpe").string());
  CHECK(text::read_lines((dir / "m.bpe").string())[0] == "#version 1");
  CHECK(load_bpe((dir / "m.bpe").string()) == m);
  text::write_lines((dir / "bad.bpe").string(), {"a b"});
  CHECK_THROWS_AS(load_bpe((dir / "bad.bpe").string()), FormatError);
}

}  // TEST_SUITE
