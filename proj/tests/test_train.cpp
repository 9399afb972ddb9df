#include <doctest.h>

#include "helpers.hpp"
#include "pseudomix/checkpoint.hpp"
#include "pseudomix/error.hpp"
#include "pseudomix/train.hpp"

using namespace pseudomix;
using namespace pseudomix::nmt;

namespace {

TrainConfig small_config() {
  auto cfg = TrainConfig::desk_scale();
  cfg.emb_dim = 8;
  cfg.hidden_dim = 12;
  cfg.minibatch_size = 4;
  cfg.epochs = 3;
  cfg.seed = 11;
  return cfg;
}

std::vector<IdPair> random_corpus(std::uint64_t seed, std::size_t n, std::size_t vocab) {
  Rng rng(seed);
  std::vector<IdPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({testutil::random_ids(rng, vocab, 1, 6, kNumReserved),
                   testutil::random_ids(rng, vocab, 1, 6, kNumReserved)});
  }
  return out;
}

ModelShape shape_for(const TrainConfig& cfg, std::size_t vocab) { return {vocab, vocab, cfg.emb_dim, cfg.hidden_dim}; }

}  // namespace

TEST_SUITE("train") {

TEST_CASE("desk preset and validation") {
  const auto d = TrainConfig::desk_scale();
  CHECK(d.hidden_dim == 64);
  CHECK(d.emb_dim == 32);
  CHECK(d.vocab_cap == 200);
  CHECK(d.minibatch_size == 16);
  CHECK(d.for_fine_tuning().learning_rate == kFineTuneLearningRate);
  auto bad = d;
  bad.learning_rate = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = d;
  bad.minibatch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("overfitting one pair halves the loss") {
  auto cfg = small_config();
  cfg.minibatch_size = 1;
  cfg.epochs = 200;
  const std::vector<IdPair> one = {{{4, 5, 6}, {7, 8, 9, 4}}};
  const auto init = ModelParameters::random(shape_for(cfg, 10), 3, cfg.init_range);
  const auto r = train(init, one, cfg, {});
  REQUIRE(r.log.size() == 200);
  CHECK(r.log.back().train_loss < 0.5 * r.log.front().train_loss);
  CHECK(mean_token_nll(r.params, one) < 0.5 * mean_token_nll(init, one));
}

TEST_CASE("post-clip norms respect the bound") {
  auto cfg = small_config();
  cfg.clip_norm = 1.0;
  cfg.learning_rate = 0.05;
  const auto corpus = random_corpus(1, 40, 14);
  const auto r = train(ModelParameters::random(shape_for(cfg, 14), 2, 1.0), corpus, cfg, {});
  CHECK(r.updates == r.post_clip_norms.size());
  CHECK(r.updates == cfg.epochs * 10);
  for (double n : r.post_clip_norms) CHECK(n <= 1.0 + 1e-6);
}

TEST_CASE("training is deterministic") {
  const auto cfg = small_config();
  const auto corpus = random_corpus(4, 30, 12);
  const auto dev = random_corpus(5, 5, 12);
  const auto init = ModelParameters::random(shape_for(cfg, 12), 9, cfg.init_range);
  const auto a = train(init, corpus, cfg, dev);
  const auto b = train(init, corpus, cfg, dev);
  CHECK(serialize_checkpoint(a.params) == serialize_checkpoint(b.params));
  CHECK(a.best_epoch == b.best_epoch);
  auto other = cfg;
  other.seed = 12;
  const auto c = train(init, corpus, other, dev);
  CHECK(serialize_checkpoint(a.params) != serialize_checkpoint(c.params));
}

TEST_CASE("best-dev selection") {
  const auto cfg = small_config();
  const auto corpus = random_corpus(6, 30, 12);
  const auto dev = random_corpus(7, 6, 12);
  const auto init = ModelParameters::random(shape_for(cfg, 12), 1, cfg.init_range);
  const auto r = train(init, corpus, cfg, dev);
  double best = r.initial_dev_loss;
  std::size_t best_epoch = 0;
  for (const auto& e : r.log) {
    if (e.dev_loss < best) {
      best = e.dev_loss;
      best_epoch = e.epoch;
    }
  }
  CHECK(r.best_epoch == best_epoch);
  CHECK(mean_token_nll(r.params, dev) == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("fine-tuning freezes embeddings") {
  auto cfg = small_config();
  const auto corpus = random_corpus(8, 20, 12);
  const auto base = train(ModelParameters::random(shape_for(cfg, 12), 2, cfg.init_range), corpus, cfg, {});
  auto ft_cfg = cfg.for_fine_tuning();
  ft_cfg.learning_rate = 1e-2;
  const auto ft = fine_tune(base.params, random_corpus(9, 20, 12), ft_cfg, {});
  CHECK(ft.params.src_emb == base.params.src_emb);
  CHECK(ft.params.tgt_emb == base.params.tgt_emb);
  CHECK_FALSE(ft.params.dec_W == base.params.dec_W);

  ft_cfg.epochs = 0;
  const auto same = fine_tune(base.params, corpus, ft_cfg, {});
  CHECK(same.params == base.params);
  CHECK(same.log.empty());
}

TEST_CASE("over-long pairs are skipped") {
  auto cfg = small_config();
  cfg.max_len = 2;
  cfg.epochs = 1;
  std::vector<IdPair> corpus = {{{4, 5, 6}, {4}}, {{4}, {5}}};
  const auto r = train(ModelParameters::random(shape_for(cfg, 8), 1), corpus, cfg, {});
  CHECK(r.skipped_pairs == 1);
  CHECK(r.updates == 1);
  CHECK_THROWS_AS(train(ModelParameters::random(shape_for(cfg, 8), 1), {}, cfg, {}), ConfigError);
}

TEST_CASE("train log format") {
  const std::vector<EpochLog> log = {{1, 2.5, 3.25, 0.5}};
  const auto s = format_train_log(log);
  CHECK(s.rfind("1\t", 0) == 0);
  CHECK(s.find('\n') != std::string::npos);
}

}  // TEST_SUITE
