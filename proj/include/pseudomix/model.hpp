#pragma once

// Attentional encoder-decoder: bidirectional GRU encoder, additive attention,
// GRU decoder with a tanh readout over [embedding(y_prev); s_t; c_t].
//
// Everything is templated on the scalar type. Production models use float;
// the gradient checker instantiates the same code with double.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "pseudomix/vocab.hpp"

namespace pseudomix::nmt {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct ModelShape {
  std::size_t source_vocab = 0;
  std::size_t target_vocab = 0;
  std::size_t emb_dim = 0;
  std::size_t hidden_dim = 0;

  std::size_t attention_dim() const { return hidden_dim; }
  std::size_t readout_dim() const { return emb_dim; }
  std::size_t context_dim() const { return 2 * hidden_dim; }

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

inline constexpr double kInitRange = 0.08;

// All trainable tensors. Biases and the attention vector are n x 1 matrices so
// that every tensor can be visited uniformly.
template <typename T>
struct Parameters {
  Mat<T> src_emb;    // Vs x E
  Mat<T> enc_fwd_W;  // 3H x E   rows: update, reset, candidate
  Mat<T> enc_fwd_U;  // 3H x H
  Mat<T> enc_fwd_b;  // 3H
  Mat<T> enc_bwd_W;
  Mat<T> enc_bwd_U;
  Mat<T> enc_bwd_b;
  Mat<T> init_W;     // H x H, applied to the first backward state
  Mat<T> init_b;     // H
  Mat<T> att_W;      // A x H
  Mat<T> att_U;      // A x 2H
  Mat<T> att_v;      // A
  Mat<T> tgt_emb;    // Vt x E
  Mat<T> dec_W;      // 3H x (E + 2H)
  Mat<T> dec_U;      // 3H x H
  Mat<T> dec_b;      // 3H
  Mat<T> read_W;     // R x (E + H + 2H)
  Mat<T> read_b;     // R
  Mat<T> out_W;      // Vt x R
  Mat<T> out_b;      // Vt

  using Member = Mat<T> Parameters::*;
  static constexpr std::size_t kNumTensors = 20;
  static constexpr std::array<std::pair<std::string_view, Member>, kNumTensors> tensors() {
    return {{{"src_emb", &Parameters::src_emb},     {"enc_fwd_W", &Parameters::enc_fwd_W},
             {"enc_fwd_U", &Parameters::enc_fwd_U}, {"enc_fwd_b", &Parameters::enc_fwd_b},
             {"enc_bwd_W", &Parameters::enc_bwd_W}, {"enc_bwd_U", &Parameters::enc_bwd_U},
             {"enc_bwd_b", &Parameters::enc_bwd_b}, {"init_W", &Parameters::init_W},
             {"init_b", &Parameters::init_b},       {"att_W", &Parameters::att_W},
             {"att_U", &Parameters::att_U},         {"att_v", &Parameters::att_v},
             {"tgt_emb", &Parameters::tgt_emb},     {"dec_W", &Parameters::dec_W},
             {"dec_U", &Parameters::dec_U},         {"dec_b", &Parameters::dec_b},
             {"read_W", &Parameters::read_W},       {"read_b", &Parameters::read_b},
             {"out_W", &Parameters::out_W},         {"out_b", &Parameters::out_b}}};
  }
  static bool is_embedding(std::string_view name) { return name == "src_emb" || name == "tgt_emb"; }

  template <typename F>
  void for_each(F&& f) {
    for (const auto& [name, m] : tensors()) f(name, this->*m);
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [name, m] : tensors()) f(name, this->*m);
  }

  static Parameters zeros(const ModelShape& shape);
  // Uniform(-range, range), filled tensor by tensor in row-major order.
  static Parameters random(const ModelShape& shape, std::uint64_t seed, double range = kInitRange);

  ModelShape shape() const;
  std::size_t num_values() const;
  void set_zero();
  bool all_finite() const;

  template <typename U>
  Parameters<U> cast() const {
    Parameters<U> out;
    const auto src = tensors();
    const auto dst = Parameters<U>::tensors();
    for (std::size_t i = 0; i < kNumTensors; ++i) {
      out.*(dst[i].second) = (this->*(src[i].second)).template cast<U>();
    }
    return out;
  }

  friend bool operator==(const Parameters& a, const Parameters& b) {
    bool same = true;
    for (const auto& [name, m] : tensors()) {
      const auto& x = a.*m;
      const auto& y = b.*m;
      same = same && x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    }
    return same;
  }
};

template <typename T>
struct EncoderStates {
  Mat<T> forward;      // H x m
  Mat<T> backward;     // H x m
  Mat<T> annotations;  // 2H x m, column i = [forward_i; backward_i]
  Mat<T> keys;         // A x m, att_U * annotations

  std::size_t size() const { return static_cast<std::size_t>(annotations.cols()); }
};

template <typename T>
struct DecoderState {
  Vec<T> s;
  std::size_t t = 0;
};

template <typename T>
struct Attention {
  Vec<T> context;
  Vec<T> weights;
};

template <typename T>
struct StepOutput {
  Vec<T> log_probs;
  DecoderState<T> next;
  Vec<T> attention;
};

// Throws DegenerateInputError on an empty source, ConfigError on an id
// outside the source vocabulary.
template <typename T>
EncoderStates<T> encode(const Parameters<T>& p, const Ids& source);

// Builds encoder states (with attention keys) from given annotation columns.
template <typename T>
EncoderStates<T> states_from_annotations(const Parameters<T>& p, const Mat<T>& annotations);

// s_0 = tanh(init_W * backward_1 + init_b).
template <typename T>
DecoderState<T> initial_state(const Parameters<T>& p, const EncoderStates<T>& h);

// e_i = v . tanh(W_a s_prev + U_a h_i), weights = softmax(e), context = sum_i w_i h_i.
template <typename T>
Attention<T> attention_context(const Parameters<T>& p, const DecoderState<T>& prev,
                               const EncoderStates<T>& h);

template <typename T>
StepOutput<T> decoder_step(const Parameters<T>& p, Id y_prev, const DecoderState<T>& state,
                           const EncoderStates<T>& h);

// Teacher-forced log p(target | source). `target` is the gold output
// sequence including its final EOS; BOS is the implicit first input.
// Step log-probs are summed in double. Throws DegenerateInputError on an
// empty target.
template <typename T>
double sequence_logprob(const Parameters<T>& p, const Ids& source, const Ids& target);

// Negative log-likelihood of one pair. Adds weight * d(NLL)/d(theta) to grads.
// Uses its own cached forward pass, independent of decoder_step.
template <typename T>
double nll_and_gradient(const Parameters<T>& p, const Ids& source, const Ids& target,
                        Parameters<T>& grads, T weight);

inline Ids with_eos(Ids target) {
  target.push_back(kEos);
  return target;
}

using ModelParameters = Parameters<float>;

}  // namespace pseudomix::nmt
