#include "pseudomix/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numeric>

#include "pseudomix/error.hpp"
#include "pseudomix/rng.hpp"

namespace pseudomix::nmt {

TrainConfig TrainConfig::desk_scale() {
  TrainConfig c;
  c.hidden_dim = 64;
  c.emb_dim = 32;
  c.vocab_cap = kDeskVocabCap;
  c.minibatch_size = 16;
  c.learning_rate = 2e-3;
  c.init_range = 0.3;
  c.desk_scale_preset = true;
  return c;
}

TrainConfig TrainConfig::for_fine_tuning() const {
  TrainConfig c = *this;
  c.learning_rate = kFineTuneLearningRate;
  return c;
}

void TrainConfig::validate() const {
  if (emb_dim < 1 || hidden_dim < 1) throw ConfigError("model dimensions must be >= 1");
  if (minibatch_size < 1) throw ConfigError("minibatch_size must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
  if (!(clip_norm > 0)) throw ConfigError("clip_norm must be > 0");
  if (!(init_range > 0)) throw ConfigError("init_range must be > 0");
  if (vocab_cap < kNumReserved + 1) throw ConfigError("vocab_cap too small");
  if (max_len < 1) throw ConfigError("max_len must be >= 1");
}

double mean_token_nll(const ModelParameters& params, const std::vector<IdPair>& corpus) {
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const auto& pr : corpus) {
    if (pr.source.empty()) continue;
    nll -= sequence_logprob(params, pr.source, with_eos(pr.target));
    tokens += pr.target.size() + 1;
  }
  return tokens ? nll / static_cast<double>(tokens) : 0.0;
}

namespace {

class Adam {
 public:
  Adam(const ModelParameters& like, const TrainConfig& cfg, bool freeze_embeddings)
      : m_(ModelParameters::zeros(like.shape())),
        v_(ModelParameters::zeros(like.shape())),
        lr_(cfg.learning_rate),
        b1_(cfg.adam_beta1),
        b2_(cfg.adam_beta2),
        eps_(cfg.adam_eps),
        freeze_(freeze_embeddings) {}

  bool trainable(std::string_view name) const {
    return !(freeze_ && ModelParameters::is_embedding(name));
  }

  void step(ModelParameters& params, const ModelParameters& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    const float b1 = static_cast<float>(b1_), b2 = static_cast<float>(b2_);
    const float step = static_cast<float>(lr_ / c1);
    const float inv_c2 = static_cast<float>(1.0 / c2);
    const float eps = static_cast<float>(eps_);
    const auto list = ModelParameters::tensors();
    for (const auto& [name, member] : list) {
      if (!trainable(name)) continue;
      auto& p = params.*member;
      auto& m = m_.*member;
      auto& v = v_.*member;
      const auto& g = grads.*member;
      m = b1 * m + (1.0f - b1) * g;
      v = b2 * v + (1.0f - b2) * g.cwiseProduct(g);
      p.array() -= step * m.array() / ((v.array() * inv_c2).sqrt() + eps);
    }
  }

 private:
  ModelParameters m_, v_;
  double lr_, b1_, b2_, eps_;
  bool freeze_;
  std::size_t t_ = 0;
};

double grad_norm(const ModelParameters& grads, const Adam& opt) {
  double sq = 0.0;
  grads.for_each([&](std::string_view name, const Mat<float>& g) {
    if (!opt.trainable(name)) return;
    sq += g.template cast<double>().squaredNorm();
  });
  return std::sqrt(sq);
}

void scale(ModelParameters& grads, float factor) {
  grads.for_each([&](std::string_view, Mat<float>& g) { g *= factor; });
}

}  // namespace

TrainResult train(const ModelParameters& init, const std::vector<IdPair>& corpus,
                  const TrainConfig& cfg, const std::vector<IdPair>& dev,
                  const TrainOptions& options) {
  cfg.validate();
  if (corpus.empty()) throw ConfigError("training corpus is empty");

  TrainResult result;
  result.params = init;
  ModelParameters params = init;
  ModelParameters grads = ModelParameters::zeros(init.shape());
  Adam opt(init, cfg, options.freeze_embeddings);
  Rng rng(cfg.seed ^ 0x5eed5eed5eedULL);

  const bool use_dev = !dev.empty();
  double best = use_dev ? mean_token_nll(params, dev) : mean_token_nll(params, corpus);
  result.initial_dev_loss = best;
  result.best_epoch = 0;

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_nll = 0.0;
    std::size_t epoch_tokens = 0;
    std::size_t step_in_epoch = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.minibatch_size) {
      const std::size_t hi = std::min(order.size(), lo + cfg.minibatch_size);
      std::vector<std::size_t> batch;
      for (std::size_t k = lo; k < hi; ++k) {
        const auto& pr = corpus[order[k]];
        if (pr.source.empty() || pr.source.size() > cfg.max_len || pr.target.size() > cfg.max_len) {
          ++result.skipped_pairs;
          continue;
        }
        batch.push_back(order[k]);
      }
      ++step_in_epoch;
      if (batch.empty()) {
        ++result.skipped_batches;
        std::cerr << "warning: epoch " << epoch << " step " << step_in_epoch
                  << ": minibatch empty after length filtering, skipped\n";
        continue;
      }
      grads.set_zero();
      const float weight = 1.0f / static_cast<float>(batch.size());
      double batch_nll = 0.0;
      for (auto i : batch) {
        const auto& pr = corpus[i];
        batch_nll += nll_and_gradient(params, pr.source, with_eos(pr.target), grads, weight);
        epoch_tokens += pr.target.size() + 1;
      }
      if (!std::isfinite(batch_nll)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + " step " +
                            std::to_string(step_in_epoch));
      }
      epoch_nll += batch_nll;

      const double norm = grad_norm(grads, opt);
      if (!std::isfinite(norm)) {
        throw TrainingError("non-finite gradient at epoch " + std::to_string(epoch) + " step " +
                            std::to_string(step_in_epoch));
      }
      if (norm > cfg.clip_norm) scale(grads, static_cast<float>(cfg.clip_norm / norm));
      result.post_clip_norms.push_back(grad_norm(grads, opt));
      opt.step(params, grads);
      ++result.updates;
      if (!params.all_finite()) {
        throw TrainingError("non-finite parameters at epoch " + std::to_string(epoch) + " step " +
                            std::to_string(step_in_epoch));
      }
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_tokens ? epoch_nll / static_cast<double>(epoch_tokens) : 0.0;
    entry.dev_loss = use_dev ? mean_token_nll(params, dev) : entry.train_loss;
    entry.wallclock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(entry);
    if (entry.dev_loss < best) {
      best = entry.dev_loss;
      result.best_epoch = epoch;
      result.params = params;
    }
    if (options.on_epoch) options.on_epoch(epoch, params);
  }
  return result;
}

TrainResult fine_tune(const ModelParameters& params, const std::vector<IdPair>& real_corpus,
                      const TrainConfig& cfg, const std::vector<IdPair>& dev) {
  TrainOptions opts;
  opts.freeze_embeddings = true;
  return train(params, real_corpus, cfg, dev, opts);
}

std::string format_train_log(const std::vector<EpochLog>& log) {
  std::string out;
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\t%.3f\n", e.epoch, e.train_loss, e.dev_loss,
                  e.wallclock_seconds);
    out += buf;
  }
  return out;
}

}  // namespace pseudomix::nmt
