#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "pseudomix/corpus.hpp"
#include "pseudomix/error.hpp"
#include "pseudomix/hash.hpp"
#include "pseudomix/text.hpp"

using namespace pseudomix;
using namespace pseudomix::corpus;
using testutil::numbered;
using testutil::pair;

TEST_SUITE("corpus") {

TEST_CASE("sentence rejects empty tokens and keeps provenance") {
  CHECK_THROWS_AS(Sentence({"a", ""}, Provenance::Real, "fr"), ConfigError);
  Sentence s({"a"}, Provenance::Synthetic, "fr");
  auto t = s.with_tokens({"b", "c"});
  CHECK(t.provenance() == Provenance::Synthetic);
  CHECK(t.language() == "fr");
  CHECK(Sentence({}, Provenance::Real, "fr").empty());
}

TEST_CASE("parallel corpus validates kind and languages") {
  using P = Provenance;
  CHECK_THROWS_AS(ParallelCorpus({"fr", "fr"}, CorpusKind::Real, {}), ConfigError);
  CHECK_THROWS_AS(ParallelCorpus({"fr", "de"}, CorpusKind::Real, {pair("a", "b", P::Real, P::Synthetic)}),
                  ConfigError);
  CHECK_THROWS_AS(ParallelCorpus({"fr", "de"}, CorpusKind::SourceOriginated, {pair("a", "b")}), ConfigError);
  CHECK_THROWS_AS(ParallelCorpus({"fr", "en"}, CorpusKind::Real, {pair("a", "b")}), ConfigError);
  // Mixed needs both originated patterns.
  CHECK_THROWS_AS(ParallelCorpus({"fr", "de"}, CorpusKind::Mixed, {pair("a", "b", P::Real, P::Synthetic)}),
                  ConfigError);
  CHECK_NOTHROW(ParallelCorpus({"fr", "de"}, CorpusKind::Mixed,
                               {pair("a", "b", P::Real, P::Synthetic), pair("c", "d", P::Synthetic, P::Real)}));
  CHECK_THROWS_AS(ParallelCorpus({"fr", "de"}, CorpusKind::Mixed,
                                 {pair("a", "b", P::Real, P::Synthetic), pair("c", "d")}),
                  ConfigError);
}

TEST_CASE("multi-parallel corpus must be real on every side") {
  Triple ok{Sentence({"a"}, Provenance::Real, "fr"), Sentence({"b"}, Provenance::Real, "en"),
            Sentence({"c"}, Provenance::Real, "de")};
  CHECK_NOTHROW(MultiParallelCorpus("fr", "en", "de", {ok}));
  Triple bad = ok;
  bad.target = Sentence({"c"}, Provenance::Synthetic, "de");
  CHECK_THROWS_AS(MultiParallelCorpus("fr", "en", "de", {bad}), ConfigError);
}

TEST_CASE("load_parallel: counts, mismatch, blank lines, bad utf-8") {
  const auto dir = testutil::temp_dir("load");
  const auto a = (dir / "a").string(), b = (dir / "b").string(), c = (dir / "c").string();
  text::write_lines(a, {"x y", "", "z"});
  text::write_lines(b, {"1", "2", "3"});
  auto corpus = load_parallel(a, b, {"fr", "de"});
  CHECK(corpus.size() == 3);
  CHECK(corpus.pairs()[1].source.empty());
  CHECK(drop_empty(corpus).corpus.size() == 2);

  text::write_lines(c, {"1", "2", "3", "4", "5"});
  text::write_lines(b, {"1", "2", "3", "4"});
  try {
    load_parallel(c, b, {"fr", "de"});
    FAIL("expected AlignmentError");
  } catch (const AlignmentError& e) {
    CHECK(e.left() == 5);
    CHECK(e.right() == 4);
  }

  text::write_file(c, "ok\nbad \xff byte\n");
  text::write_lines(b, {"1", "2"});
  try {
    load_parallel(c, b, {"fr", "de"});
    FAIL("expected DecodeError");
  } catch (const DecodeError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("pivot_align fixtures match the nested-loop oracle") {
  auto sp_text = std::vector<std::pair<std::string, std::string>>{
      {"fr1", "hello world"}, {"fr2", "good  morning "}, {"fr3", "hello world"}, {"fr4", "unmatched"}};
  auto pt_text = std::vector<std::pair<std::string, std::string>>{
      {"hello world", "de1"}, {"good morning", "de2"}, {"hello world", "de3"}, {"other", "de4"}};
  auto build = [](const auto& rows, const std::string& sl, const std::string& tl) {
    std::vector<SentencePair> pairs;
    for (const auto& [s, t] : rows) pairs.push_back(pair(s, t, Provenance::Real, Provenance::Real, sl, tl));
    return ParallelCorpus({sl, tl}, CorpusKind::Real, std::move(pairs));
  };
  auto result = pivot_align(build(sp_text, "fr", "en"), build(pt_text, "en", "de"));
  auto expected = oracle::nested_loop_align(sp_text, pt_text);
  REQUIRE(result.multi.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& t = result.multi.triples()[i];
    CHECK(oracle::TripleText{text::join(t.source.tokens()), text::join(t.pivot.tokens()),
                             text::join(t.target.tokens())} == expected[i]);
  }
  // 2x2 cross product on "hello world" plus one match on "good morning".
  CHECK(result.multi.size() == 5);
  CHECK(result.stats.candidate_triples == 5);

  SUBCASE("duplicate triples are removed") {
    auto dup = sp_text;
    dup.push_back({"fr1", "hello world"});
    auto r = pivot_align(build(dup, "fr", "en"), build(pt_text, "en", "de"));
    CHECK(r.multi.size() == oracle::nested_loop_align(dup, pt_text).size());
    CHECK(r.stats.duplicates_removed == 2);
  }
  SUBCASE("disjoint pivots give an empty result and a warning") {
    auto r = pivot_align(build(std::vector<std::pair<std::string, std::string>>{{"a", "x"}}, "fr", "en"),
                         build(std::vector<std::pair<std::string, std::string>>{{"y", "b"}}, "en", "de"));
    CHECK(r.multi.empty());
    CHECK(r.stats.warnings == 1);
  }
  SUBCASE("pivot language mismatch") {
    CHECK_THROWS_AS(pivot_align(build(sp_text, "fr", "en"), build(pt_text, "es", "de")), ConfigError);
  }
}

TEST_CASE("pivot_align matches the oracle on random fixtures") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, std::string>> sp, pt;
    const auto n1 = rng.below(8), n2 = rng.below(8);
    for (std::size_t i = 0; i < n1; ++i) sp.push_back({"s" + std::to_string(rng.below(3)), "p" + std::to_string(rng.below(4))});
    for (std::size_t i = 0; i < n2; ++i) pt.push_back({"p" + std::to_string(rng.below(4)), "t" + std::to_string(rng.below(3))});
    std::vector<SentencePair> a, b;
    for (const auto& [s, p] : sp) a.push_back(pair(s, p, Provenance::Real, Provenance::Real, "fr", "en"));
    for (const auto& [p, t] : pt) b.push_back(pair(p, t, Provenance::Real, Provenance::Real, "en", "de"));
    auto r = pivot_align(ParallelCorpus({"fr", "en"}, CorpusKind::Real, a),
                         ParallelCorpus({"en", "de"}, CorpusKind::Real, b));
    auto expected = oracle::nested_loop_align(sp, pt);
    REQUIRE(r.multi.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const auto& t = r.multi.triples()[i];
      CHECK(std::get<0>(expected[i]) == text::join(t.source.tokens()));
      CHECK(std::get<2>(expected[i]) == text::join(t.target.tokens()));
    }
  }
}

TEST_CASE("project_synthetic tags provenance and reports failures") {
  std::vector<Triple> triples;
  for (int i = 0; i < 2; ++i) {
    triples.push_back({Sentence({"f" + std::to_string(i)}, Provenance::Real, "fr"),
                       Sentence({"e" + std::to_string(i)}, Provenance::Real, "en"),
                       Sentence({"d" + std::to_string(i)}, Provenance::Real, "de")});
  }
  MultiParallelCorpus multi("fr", "en", "de", triples);
  Translator identity = [](const std::vector<Tokens>& in) {
    return std::vector<std::optional<Tokens>>(in.begin(), in.end());
  };
  auto so = project_synthetic(multi, Side::Target, identity);
  CHECK(so.kind() == CorpusKind::SourceOriginated);
  CHECK(so.size() == 2);
  CHECK(so.pairs()[0].target.provenance() == Provenance::Synthetic);
  CHECK(so.pairs()[0].target.tokens() == Tokens{"e0"});
  CHECK(so.pairs()[0].source.provenance() == Provenance::Real);
  auto to = project_synthetic(multi, Side::Source, identity);
  CHECK(to.kind() == CorpusKind::TargetOriginated);
  CHECK(to.pairs()[1].source.provenance() == Provenance::Synthetic);
  CHECK(to.pairs()[1].target.tokens() == Tokens{"d1"});

  Translator flaky = [](const std::vector<Tokens>& in) {
    std::vector<std::optional<Tokens>> out(in.begin(), in.end());
    out[1].reset();
    return out;
  };
  try {
    project_synthetic(multi, Side::Target, flaky);
    FAIL("expected TranslationError");
  } catch (const TranslationError& e) {
    CHECK(e.index() == 1);
  }
  Translator short_output = [](const std::vector<Tokens>&) { return std::vector<std::optional<Tokens>>(1); };
  CHECK_THROWS_AS(project_synthetic(multi, Side::Target, short_output), AlignmentError);
}

TEST_CASE("mix_pseudo sizes, provenance and sampling without replacement") {
  for (std::size_t n1 : {2, 3, 4, 7, 10}) {
    for (std::size_t n2 : {1, 2, 5, 8}) {
      auto so = numbered(CorpusKind::SourceOriginated, n1, "a");
      auto to = numbered(CorpusKind::TargetOriginated, n2, "b");
      auto m = mix_pseudo(so, to, 42);
      CHECK(m.kind() == CorpusKind::Mixed);
      CHECK(m.size() == n1 / 2 + (n2 + 1) / 2);
      std::set<std::string> seen;
      std::size_t from_so = 0, from_to = 0;
      for (const auto& p : m.pairs()) {
        const auto key = text::join(p.source.tokens());
        CHECK(seen.insert(key).second);
        (pattern_of(p) == 's' ? from_so : from_to) += 1;
      }
      CHECK(from_so == n1 / 2);
      CHECK(from_to == (n2 + 1) / 2);
    }
  }
  auto so = numbered(CorpusKind::SourceOriginated, 4);
  auto to = numbered(CorpusKind::TargetOriginated, 4);
  CHECK(mix_pseudo(so, to, 1).pairs() == mix_pseudo(so, to, 1).pairs());
  CHECK(mix_pseudo(so, to, 1).size() == 4);
  CHECK_THROWS_AS(mix_pseudo(to, so, 1), ConfigError);
  CHECK_THROWS_AS(mix_pseudo(numbered(CorpusKind::SourceOriginated, 0), to, 1), DegenerateInputError);
  CHECK_THROWS_AS(mix_pseudo(so, numbered(CorpusKind::TargetOriginated, 0), 1), DegenerateInputError);
  CHECK_THROWS_AS(mix_pseudo(numbered(CorpusKind::SourceOriginated, 1), to, 1), DegenerateInputError);
}

TEST_CASE("filter_length boundary, order and idempotence") {
  std::vector<SentencePair> pairs;
  auto words = [](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w");
    return s;
  };
  const std::vector<std::size_t> lens = {3, 51, 50, 10, 60, 49, 50, 51, 1, 2};
  for (std::size_t i = 0; i < lens.size(); ++i) pairs.push_back(pair(words(lens[i]), "t" + std::to_string(i)));
  ParallelCorpus c({"fr", "de"}, CorpusKind::Real, pairs);
  auto r = filter_length(c);
  CHECK(r.corpus.size() == 7);
  CHECK(r.removed == 3);
  CHECK(r.kept == std::vector<std::size_t>{0, 2, 3, 5, 6, 8, 9});
  CHECK(filter_length(r.corpus).corpus.pairs() == r.corpus.pairs());
  auto d = drop_empty(c);
  CHECK(drop_empty(d.corpus).corpus.pairs() == d.corpus.pairs());
}

TEST_CASE("drop_empty fixture") {
  std::vector<SentencePair> pairs = {pair("a", "b"), pair("c", "x"), pair("e", "f"), pair("g", "y"), pair("i", "j")};
  pairs[1].target = Sentence({}, Provenance::Real, "de");
  pairs[3].target = Sentence({}, Provenance::Real, "de");
  auto r = drop_empty(ParallelCorpus({"fr", "de"}, CorpusKind::Real, pairs));
  CHECK(r.corpus.size() == 3);
  CHECK(r.kept == std::vector<std::size_t>{0, 2, 4});
}

TEST_CASE("filtering a mixed corpus down to one pattern settles its kind") {
  auto so = numbered(CorpusKind::SourceOriginated, 4, "a");
  auto to = numbered(CorpusKind::TargetOriginated, 4, "b");
  auto m = mix_pseudo(so, to, 3);
  std::vector<std::size_t> only_s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (pattern_of(m.pairs()[i]) == 's') only_s.push_back(i);
  }
  CHECK(select(m, only_s).kind() == CorpusKind::SourceOriginated);
}

TEST_CASE("provenance is conserved by every operation") {
  auto so = numbered(CorpusKind::SourceOriginated, 6, "a");
  auto to = numbered(CorpusKind::TargetOriginated, 6, "b");
  auto m = mix_pseudo(so, to, 9);
  auto check_patterns = [](const ParallelCorpus& c) {
    for (const auto& p : c.pairs()) {
      const bool from_so = p.source.tokens()[0][1] == 'a';
      CHECK(pattern_of(p) == (from_so ? 's' : 't'));
    }
  };
  check_patterns(m);
  check_patterns(filter_length(m, 2).corpus);
  check_patterns(drop_empty(m).corpus);
  check_patterns(map_tokens(m, [](const Sentence& s) { return s.tokens(); }));
  auto swapped = swap_sides(so);
  CHECK(swapped.kind() == CorpusKind::TargetOriginated);
  CHECK(swapped.source_language() == "de");
}

TEST_CASE("corpus_stats and the stats table") {
  std::vector<SentencePair> pairs = {pair("a b", "x"), pair("a b c d", "x y z")};
  auto st = corpus_stats(ParallelCorpus({"fr", "de"}, CorpusKind::Real, pairs));
  CHECK(st.size == 2);
  CHECK(*st.avg_source_length == doctest::Approx(3.0));
  CHECK(*st.avg_target_length == doctest::Approx(2.0));
  auto empty = corpus_stats(ParallelCorpus({"fr", "de"}, CorpusKind::Real, {}));
  CHECK(empty.size == 0);
  CHECK_FALSE(empty.avg_source_length.has_value());
  const auto table = format_stats_table({{"real", st}, {"none", empty}}, "fr", "de");
  CHECK(table == "Corpus\tSize\tAvg len fr\tAvg len de\nreal\t2\t3.00\t2.00\nnone\t0\t-\t-\n");
}

TEST_CASE("save and load round trip with sidecar") {
  const auto dir = testutil::temp_dir("save");
  auto m = mix_pseudo(numbered(CorpusKind::SourceOriginated, 6, "a"), numbered(CorpusKind::TargetOriginated, 5, "b"), 4);
  const auto base = (dir / "mix").string();
  save_corpus(m, base, {4, {"parent/a", "parent/b"}, {"tokenize:rules-v1"}});
  auto loaded = load_corpus(base);
  CHECK(loaded.corpus.pairs() == m.pairs());
  CHECK(loaded.corpus.kind() == CorpusKind::Mixed);
  CHECK(loaded.lineage.seed == std::optional<std::uint64_t>(4));
  CHECK(loaded.lineage.parents == std::vector<std::string>{"parent/a", "parent/b"});
  const auto meta = text::read_file(meta_path(base));
  for (const char* key : {"source_lang", "target_lang", "kind", "size", "seed", "parents"}) {
    CHECK(meta.find(std::string("\"") + key + "\"") != std::string::npos);
  }

  // Same seed, same inputs: byte-identical files.
  const auto base2 = (dir / "mix2").string();
  save_corpus(mix_pseudo(numbered(CorpusKind::SourceOriginated, 6, "a"), numbered(CorpusKind::TargetOriginated, 5, "b"), 4),
              base2, {4, {"parent/a", "parent/b"}, {"tokenize:rules-v1"}});
  CHECK(sha256_file(source_path(base, m)) == sha256_file(source_path(base2, m)));
  CHECK(sha256_file(target_path(base, m)) == sha256_file(target_path(base2, m)));
}

}  // TEST_SUITE
