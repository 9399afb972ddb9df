#include <doctest.h>

#include <map>
#include <set>

#include "helpers.hpp"
#include "pseudomix/config.hpp"
#include "pseudomix/error.hpp"
#include "pseudomix/toy.hpp"

using namespace pseudomix;
using namespace pseudomix::pipeline;

namespace {

ToyLanguageSpec small_spec() {
  ToyLanguageSpec s;
  s.train_triples = 300;
  s.dev_size = 30;
  s.test_size = 30;
  s.mother_size = 100;
  s.real_size = 40;
  return s;
}

std::string key(const text::Tokens& t) { return text::join(t); }

}  // namespace

TEST_SUITE("toy") {

TEST_CASE("generation is seeded") {
  const auto a = generate_toy_multiparallel(small_spec());
  const auto b = generate_toy_multiparallel(small_spec());
  CHECK(a.train.triples() == b.train.triples());
  CHECK(a.real.pairs() == b.real.pairs());
  auto other = small_spec();
  other.seed = 2;
  CHECK_FALSE(generate_toy_multiparallel(other).train.triples() == a.train.triples());
}

TEST_CASE("splits are disjoint and sized") {
  const auto d = generate_toy_multiparallel(small_spec());
  CHECK(d.train.size() == 300);
  CHECK(d.dev.size() == 30);
  CHECK(d.test.size() == 30);
  CHECK(d.mother_source.size() == 100);
  CHECK(d.mother_target.size() == 100);
  CHECK(d.real.size() == 40);
  std::set<std::string> pivots;
  std::size_t n = 0;
  for (const auto* m : {&d.train, &d.dev, &d.test}) {
    for (const auto& t : m->triples()) {
      pivots.insert(key(t.pivot.tokens()));
      ++n;
      CHECK(t.source.size() == t.pivot.size());
      CHECK(t.target.size() == t.pivot.size());
      CHECK(t.pivot.size() >= 3);
      CHECK(t.pivot.size() <= 8);
    }
  }
  for (const auto* c : {&d.mother_source, &d.mother_target}) {
    for (const auto& p : c->pairs()) {
      pivots.insert(key(p.source.tokens()));
      ++n;
    }
  }
  CHECK(pivots.size() == n);
  CHECK(d.mother_source.target_language() == "src");
  CHECK(d.mother_target.source_language() == "piv");
}

TEST_CASE("noise-free toy languages are deterministic maps") {
  auto spec = small_spec();
  spec.noise = 0.0;
  const auto d = generate_toy_multiparallel(spec);
  std::map<std::string, std::string> to_target;
  for (const auto& t : d.train.triples()) {
    for (std::size_t i = 0; i < t.pivot.size(); ++i) {
      const auto [it, fresh] = to_target.emplace(t.pivot.tokens()[i], t.target.tokens()[i]);
      CHECK(it->second == t.target.tokens()[i]);
    }
  }
}

TEST_CASE("lexicons and bad specs") {
  const auto lex = toy_lexicon(0, 60, 1);
  CHECK(std::set<std::string>(lex.begin(), lex.end()).size() == 60);
  CHECK(toy_lexicon(0, 60, 1) == lex);
  auto s = small_spec();
  s.noise = 1.0;
  CHECK_THROWS_AS(generate_toy_multiparallel(s), ConfigError);
  s = small_spec();
  s.pivot_vocab = 2;
  s.min_len = 1;
  s.max_len = 2;
  CHECK_THROWS_AS(generate_toy_multiparallel(s), GenerationError);
}

}  // TEST_SUITE

TEST_SUITE("config") {

TEST_CASE("defaults") {
  ExperimentConfig c;
  CHECK(c.train.hidden_dim == 64);
  CHECK(c.finetune_learning_rate == 2e-5);
  CHECK(c.eval_decode.beam_size == 12);
  CHECK(c.replications == 3);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("serialize and parse round trip") {
  ExperimentConfig c;
  c.scenario = Scenario::BeamAblation;
  c.train.hidden_dim = 17;
  c.toy.noise = 0.25;
  c.ablation_beams = {1, 3, 9};
  c.output_dir = "elsewhere";
  const auto text = serialize_config(c);
  CHECK(parse_config(text) == c);
  CHECK(serialize_config(parse_config(text)) == text);
  const auto dir = testutil::temp_dir("config");
  save_config(c, (dir / "c.json").string());
  CHECK(load_config((dir / "c.json").string()) == c);
}

TEST_CASE("partial configs keep defaults") {
  const auto c = parse_config(R"({"train.epochs": 2, "scenario": "real-fine-tuning"})");
  CHECK(c.train.epochs == 2);
  CHECK(c.scenario == Scenario::RealFineTuning);
  CHECK(c.mother == ExperimentConfig{}.mother);
}

TEST_CASE("bad configs") {
  CHECK_THROWS_AS(parse_config(R"({"train.epoch": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 7})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"train.epochs": "two"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("nope"), ConfigError);
  ExperimentConfig c;
  c.replications = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.data_source = "files";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("scenario names round trip") {
  for (auto s : {Scenario::PseudoOnly, Scenario::RealFineTuning, Scenario::MergedBaseline, Scenario::BeamAblation,
                 Scenario::MotherModelSweep}) {
    CHECK(parse_scenario(to_string(s)) == s);
  }
}

}  // TEST_SUITE
