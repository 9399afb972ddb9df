#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pseudomix/model.hpp"

namespace pseudomix::nmt {

inline constexpr double kFineTuneLearningRate = 2e-5;

struct TrainConfig {
  std::size_t emb_dim = 500;
  std::size_t hidden_dim = 1024;
  std::size_t epochs = 10;
  std::size_t minibatch_size = 80;
  double learning_rate = 2e-4;
  double clip_norm = 1.0;
  // Half-width of the uniform initialization.
  double init_range = kInitRange;
  std::size_t vocab_cap = kDefaultVocabCap;
  // Pairs with a side longer than this are skipped during training.
  std::size_t max_len = 50;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
  bool desk_scale_preset = false;

  // hidden 64, emb 32, vocab cap 200, minibatch 16, learning rate 2e-3,
  // init range 0.3.
  static TrainConfig desk_scale();
  // Same settings with the fine-tuning learning rate.
  TrainConfig for_fine_tuning() const;

  // Throws ConfigError.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct IdPair {
  Ids source;
  Ids target;  // without EOS
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per-token NLL over the epoch
  double dev_loss = 0.0;    // mean per-token NLL on dev after the epoch
  double wallclock_seconds = 0.0;
};

struct TrainResult {
  ModelParameters params;  // best dev loss, the starting point included
  std::size_t best_epoch = 0;
  double initial_dev_loss = 0.0;
  std::vector<EpochLog> log;
  std::vector<double> post_clip_norms;  // one per update
  std::size_t updates = 0;
  std::size_t skipped_batches = 0;
  std::size_t skipped_pairs = 0;
};

// Per-token NLL of the corpus (EOS counted). Pairs with an empty source are
// ignored. Returns 0 for an empty corpus.
double mean_token_nll(const ModelParameters& params, const std::vector<IdPair>& corpus);

struct TrainOptions {
  bool freeze_embeddings = false;
  // Called with the parameters after each epoch (e.g. to checkpoint).
  std::function<void(std::size_t epoch, const ModelParameters&)> on_epoch;
};

// Minibatch Adam on the summed NLL (averaged over the batch), global gradient
// norm clipped to cfg.clip_norm, corpus reshuffled every epoch from cfg.seed.
// If dev is empty the training loss selects the best epoch.
// Throws TrainingError on a non-finite loss.
TrainResult train(const ModelParameters& init, const std::vector<IdPair>& corpus,
                  const TrainConfig& cfg, const std::vector<IdPair>& dev,
                  const TrainOptions& options = {});

// train() with both embedding matrices frozen. The caller supplies the
// fine-tuning learning rate through cfg (see TrainConfig::for_fine_tuning).
TrainResult fine_tune(const ModelParameters& params, const std::vector<IdPair>& real_corpus,
                      const TrainConfig& cfg, const std::vector<IdPair>& dev);

// epoch \t train_loss \t dev_loss \t wallclock, one line per epoch.
std::string format_train_log(const std::vector<EpochLog>& log);

}  // namespace pseudomix::nmt
