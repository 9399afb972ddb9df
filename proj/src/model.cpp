#include "pseudomix/model.hpp"

#include <cmath>
#include <vector>

#include "pseudomix/error.hpp"
#include "pseudomix/rng.hpp"

namespace pseudomix::nmt {

namespace {

template <typename T>
Mat<T> sized(std::size_t rows, std::size_t cols) {
  return Mat<T>::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
Vec<T> sigmoid(const Vec<T>& x) {
  return (T(1) + (-x.array()).exp()).inverse().matrix();
}

template <typename T>
Vec<T> log_softmax(const Vec<T>& logits) {
  const T mx = logits.maxCoeff();
  const T lse = mx + std::log((logits.array() - mx).exp().sum());
  return (logits.array() - lse).matrix();
}

template <typename T>
Vec<T> softmax(const Vec<T>& x) {
  const T mx = x.maxCoeff();
  Vec<T> e = (x.array() - mx).exp().matrix();
  return e / e.sum();
}

template <typename T>
struct GruCache {
  Vec<T> x, h_prev, z, r, cand, rh;
};

// h = (1 - z) * h_prev + z * cand
template <typename T>
Vec<T> gru_forward(const Mat<T>& W, const Mat<T>& U, const Mat<T>& b, const Vec<T>& x,
                   const Vec<T>& h_prev, GruCache<T>* cache) {
  const Eigen::Index H = U.cols();
  Vec<T> pre = W * x + b.col(0);
  pre.head(2 * H).noalias() += U.topRows(2 * H) * h_prev;
  Vec<T> z = sigmoid<T>(pre.head(H));
  Vec<T> r = sigmoid<T>(pre.segment(H, H));
  Vec<T> rh = r.cwiseProduct(h_prev);
  Vec<T> cand = (pre.tail(H) + U.bottomRows(H) * rh).array().tanh().matrix();
  Vec<T> h = h_prev + z.cwiseProduct(cand - h_prev);
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->cand = std::move(cand);
    cache->rh = std::move(rh);
  }
  return h;
}

// Accumulates parameter gradients; returns d/dx and adds d/dh_prev into dh_prev.
template <typename T>
Vec<T> gru_backward(const Mat<T>& W, const Mat<T>& U, Mat<T>& dW, Mat<T>& dU, Mat<T>& db,
                    const GruCache<T>& c, const Vec<T>& dh, Vec<T>& dh_prev) {
  const Eigen::Index H = U.cols();
  Vec<T> dpre(3 * H);
  auto dz = dpre.head(H);
  auto dr = dpre.segment(H, H);
  auto dc = dpre.tail(H);

  dz = (dh.array() * (c.cand - c.h_prev).array() * c.z.array() * (T(1) - c.z.array())).matrix();
  dc = (dh.array() * c.z.array() * (T(1) - c.cand.array().square())).matrix();
  dh_prev.array() += dh.array() * (T(1) - c.z.array());

  Vec<T> drh = U.bottomRows(H).transpose() * dc;
  dU.bottomRows(H).noalias() += dc * c.rh.transpose();
  dr = (drh.array() * c.h_prev.array() * c.r.array() * (T(1) - c.r.array())).matrix();
  dh_prev.array() += drh.array() * c.r.array();

  dU.topRows(2 * H).noalias() += dpre.head(2 * H) * c.h_prev.transpose();
  dh_prev.noalias() += U.topRows(2 * H).transpose() * dpre.head(2 * H);

  dW.noalias() += dpre * c.x.transpose();
  db.col(0) += dpre;
  return W.transpose() * dpre;
}

template <typename T>
void check_ids(const Ids& ids, std::size_t vocab, const char* side) {
  for (Id i : ids) {
    if (i < 0 || static_cast<std::size_t>(i) >= vocab) {
      throw ConfigError(std::string(side) + " id " + std::to_string(i) + " outside vocabulary of " +
                        std::to_string(vocab));
    }
  }
}

template <typename T>
Vec<T> emb_row(const Mat<T>& emb, Id id) {
  return emb.row(id).transpose();
}

}  // namespace

// ---------------------------------------------------------------------------

template <typename T>
Parameters<T> Parameters<T>::zeros(const ModelShape& s) {
  const std::size_t E = s.emb_dim, H = s.hidden_dim, A = s.attention_dim(), R = s.readout_dim();
  const std::size_t C = s.context_dim();
  if (E == 0 || H == 0 || s.source_vocab == 0 || s.target_vocab == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  Parameters p;
  p.src_emb = sized<T>(s.source_vocab, E);
  p.enc_fwd_W = sized<T>(3 * H, E);
  p.enc_fwd_U = sized<T>(3 * H, H);
  p.enc_fwd_b = sized<T>(3 * H, 1);
  p.enc_bwd_W = sized<T>(3 * H, E);
  p.enc_bwd_U = sized<T>(3 * H, H);
  p.enc_bwd_b = sized<T>(3 * H, 1);
  p.init_W = sized<T>(H, H);
  p.init_b = sized<T>(H, 1);
  p.att_W = sized<T>(A, H);
  p.att_U = sized<T>(A, C);
  p.att_v = sized<T>(A, 1);
  p.tgt_emb = sized<T>(s.target_vocab, E);
  p.dec_W = sized<T>(3 * H, E + C);
  p.dec_U = sized<T>(3 * H, H);
  p.dec_b = sized<T>(3 * H, 1);
  p.read_W = sized<T>(R, E + H + C);
  p.read_b = sized<T>(R, 1);
  p.out_W = sized<T>(s.target_vocab, R);
  p.out_b = sized<T>(s.target_vocab, 1);
  return p;
}

template <typename T>
Parameters<T> Parameters<T>::random(const ModelShape& shape, std::uint64_t seed, double range) {
  auto p = zeros(shape);
  Rng rng(seed);
  p.for_each([&](std::string_view, Mat<T>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m(i, j) = static_cast<T>(rng.uniform(-range, range));
      }
    }
  });
  return p;
}

template <typename T>
ModelShape Parameters<T>::shape() const {
  return {static_cast<std::size_t>(src_emb.rows()), static_cast<std::size_t>(tgt_emb.rows()),
          static_cast<std::size_t>(src_emb.cols()), static_cast<std::size_t>(init_W.rows())};
}

template <typename T>
std::size_t Parameters<T>::num_values() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Mat<T>& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <typename T>
void Parameters<T>::set_zero() {
  for_each([](std::string_view, Mat<T>& m) { m.setZero(); });
}

template <typename T>
bool Parameters<T>::all_finite() const {
  bool ok = true;
  for_each([&](std::string_view, const Mat<T>& m) { ok = ok && m.allFinite(); });
  return ok;
}

// ---------------------------------------------------------------------------

template <typename T>
EncoderStates<T> states_from_annotations(const Parameters<T>& p, const Mat<T>& annotations) {
  EncoderStates<T> h;
  const Eigen::Index H = p.init_W.rows();
  h.forward = annotations.topRows(H);
  h.backward = annotations.bottomRows(H);
  h.annotations = annotations;
  h.keys = p.att_U * annotations;
  return h;
}

template <typename T>
EncoderStates<T> encode(const Parameters<T>& p, const Ids& source) {
  if (source.empty()) throw DegenerateInputError("cannot encode an empty source sentence");
  check_ids<T>(source, static_cast<std::size_t>(p.src_emb.rows()), "source");
  const Eigen::Index H = p.init_W.rows();
  const auto m = static_cast<Eigen::Index>(source.size());
  Mat<T> ann(2 * H, m);
  Vec<T> f = Vec<T>::Zero(H);
  for (Eigen::Index i = 0; i < m; ++i) {
    f = gru_forward<T>(p.enc_fwd_W, p.enc_fwd_U, p.enc_fwd_b, emb_row(p.src_emb, source[i]), f,
                       nullptr);
    ann.col(i).head(H) = f;
  }
  Vec<T> b = Vec<T>::Zero(H);
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    b = gru_forward<T>(p.enc_bwd_W, p.enc_bwd_U, p.enc_bwd_b, emb_row(p.src_emb, source[i]), b,
                       nullptr);
    ann.col(i).tail(H) = b;
  }
  return states_from_annotations(p, ann);
}

template <typename T>
DecoderState<T> initial_state(const Parameters<T>& p, const EncoderStates<T>& h) {
  DecoderState<T> st;
  st.s = (p.init_W * h.backward.col(0) + p.init_b.col(0)).array().tanh().matrix();
  st.t = 0;
  return st;
}

template <typename T>
Attention<T> attention_context(const Parameters<T>& p, const DecoderState<T>& prev,
                               const EncoderStates<T>& h) {
  const Vec<T> q = p.att_W * prev.s;
  const Mat<T> act = (h.keys.colwise() + q).array().tanh().matrix();
  const Vec<T> scores = act.transpose() * p.att_v.col(0);
  Attention<T> a;
  a.weights = softmax<T>(scores);
  a.context = h.annotations * a.weights;
  return a;
}

template <typename T>
StepOutput<T> decoder_step(const Parameters<T>& p, Id y_prev, const DecoderState<T>& state,
                           const EncoderStates<T>& h) {
  const Eigen::Index E = p.tgt_emb.cols(), H = p.init_W.rows(), C = 2 * H;
  if (y_prev < 0 || y_prev >= p.tgt_emb.rows()) {
    throw ConfigError("target id " + std::to_string(y_prev) + " outside vocabulary");
  }
  auto att = attention_context(p, state, h);
  const Vec<T> emb = emb_row(p.tgt_emb, y_prev);

  Vec<T> x(E + C);
  x << emb, att.context;
  Vec<T> s = gru_forward<T>(p.dec_W, p.dec_U, p.dec_b, x, state.s, nullptr);

  Vec<T> g(E + H + C);
  g << emb, s, att.context;
  const Vec<T> o = (p.read_W * g + p.read_b.col(0)).array().tanh().matrix();
  const Vec<T> logits = p.out_W * o + p.out_b.col(0);

  StepOutput<T> out;
  out.log_probs = log_softmax<T>(logits);
  out.next.s = std::move(s);
  out.next.t = state.t + 1;
  out.attention = std::move(att.weights);
  return out;
}

template <typename T>
double sequence_logprob(const Parameters<T>& p, const Ids& source, const Ids& target) {
  if (target.empty()) throw DegenerateInputError("empty target sequence");
  check_ids<T>(target, static_cast<std::size_t>(p.tgt_emb.rows()), "target");
  const auto h = encode(p, source);
  auto state = initial_state(p, h);
  Id prev = kBos;
  double total = 0.0;
  for (Id y : target) {
    auto step = decoder_step(p, prev, state, h);
    total += static_cast<double>(step.log_probs(y));
    state = std::move(step.next);
    prev = y;
  }
  return total;
}

// ---------------------------------------------------------------------------

template <typename T>
double nll_and_gradient(const Parameters<T>& p, const Ids& source, const Ids& target,
                        Parameters<T>& grads, T weight) {
  if (source.empty()) throw DegenerateInputError("cannot encode an empty source sentence");
  if (target.empty()) throw DegenerateInputError("empty target sequence");
  check_ids<T>(source, static_cast<std::size_t>(p.src_emb.rows()), "source");
  check_ids<T>(target, static_cast<std::size_t>(p.tgt_emb.rows()), "target");

  const Eigen::Index E = p.tgt_emb.cols(), H = p.init_W.rows(), C = 2 * H;
  const auto m = static_cast<Eigen::Index>(source.size());
  const auto n = target.size();

  // Encoder forward.
  std::vector<GruCache<T>> fwd(static_cast<std::size_t>(m)), bwd(static_cast<std::size_t>(m));
  Mat<T> ann(C, m);
  {
    Vec<T> f = Vec<T>::Zero(H);
    for (Eigen::Index i = 0; i < m; ++i) {
      f = gru_forward<T>(p.enc_fwd_W, p.enc_fwd_U, p.enc_fwd_b, emb_row(p.src_emb, source[i]), f,
                         &fwd[static_cast<std::size_t>(i)]);
      ann.col(i).head(H) = f;
    }
    Vec<T> b = Vec<T>::Zero(H);
    for (Eigen::Index i = m - 1; i >= 0; --i) {
      b = gru_forward<T>(p.enc_bwd_W, p.enc_bwd_U, p.enc_bwd_b, emb_row(p.src_emb, source[i]), b,
                         &bwd[static_cast<std::size_t>(i)]);
      ann.col(i).tail(H) = b;
    }
  }
  const Mat<T> keys = p.att_U * ann;
  const Vec<T> s0 = (p.init_W * ann.col(0).tail(H) + p.init_b.col(0)).array().tanh().matrix();

  // Decoder forward.
  struct Step {
    Id y_prev;
    Vec<T> s_prev;
    Mat<T> act;  // tanh(keys + W_a s_prev)
    Vec<T> alpha;
    Vec<T> context;
    GruCache<T> gru;
    Vec<T> g;
    Vec<T> o;
    Vec<T> probs;
  };
  std::vector<Step> steps(n);
  double nll = 0.0;
  Vec<T> s = s0;
  Id prev = kBos;
  for (std::size_t t = 0; t < n; ++t) {
    auto& st = steps[t];
    st.y_prev = prev;
    st.s_prev = s;
    const Vec<T> q = p.att_W * s;
    st.act = (keys.colwise() + q).array().tanh().matrix();
    st.alpha = softmax<T>(st.act.transpose() * p.att_v.col(0));
    st.context = ann * st.alpha;
    const Vec<T> emb = emb_row(p.tgt_emb, prev);
    Vec<T> x(E + C);
    x << emb, st.context;
    s = gru_forward<T>(p.dec_W, p.dec_U, p.dec_b, x, s, &st.gru);
    st.g.resize(E + H + C);
    st.g << emb, s, st.context;
    st.o = (p.read_W * st.g + p.read_b.col(0)).array().tanh().matrix();
    const Vec<T> logits = p.out_W * st.o + p.out_b.col(0);
    const Vec<T> logp = log_softmax<T>(logits);
    st.probs = logp.array().exp().matrix();
    nll -= static_cast<double>(logp(target[t]));
    prev = target[t];
  }

  // Decoder backward.
  Mat<T> d_ann = Mat<T>::Zero(C, m);
  Mat<T> d_keys = Mat<T>::Zero(p.att_U.rows(), m);
  Vec<T> ds = Vec<T>::Zero(H);  // gradient flowing into s_t from later steps
  for (std::size_t ti = n; ti-- > 0;) {
    const auto& st = steps[ti];
    Vec<T> dlogits = st.probs * weight;
    dlogits(target[ti]) -= weight;

    grads.out_W.noalias() += dlogits * st.o.transpose();
    grads.out_b.col(0) += dlogits;
    const Vec<T> d_o = p.out_W.transpose() * dlogits;
    const Vec<T> d_read = (d_o.array() * (T(1) - st.o.array().square())).matrix();
    grads.read_W.noalias() += d_read * st.g.transpose();
    grads.read_b.col(0) += d_read;
    const Vec<T> dg = p.read_W.transpose() * d_read;

    Vec<T> d_emb = dg.head(E);
    ds += dg.segment(E, H);
    Vec<T> d_ctx = dg.tail(C);

    Vec<T> ds_prev = Vec<T>::Zero(H);
    const Vec<T> dx = gru_backward<T>(p.dec_W, p.dec_U, grads.dec_W, grads.dec_U, grads.dec_b,
                                      st.gru, ds, ds_prev);
    d_emb += dx.head(E);
    d_ctx += dx.tail(C);
    grads.tgt_emb.row(st.y_prev) += d_emb.transpose();

    // context = ann * alpha
    d_ann.noalias() += d_ctx * st.alpha.transpose();
    const Vec<T> d_alpha = ann.transpose() * d_ctx;
    const Vec<T> d_scores =
        (st.alpha.array() * (d_alpha.array() - st.alpha.dot(d_alpha))).matrix();
    // scores = act^T v
    grads.att_v.col(0).noalias() += st.act * d_scores;
    const Mat<T> d_pre =
        ((p.att_v.col(0) * d_scores.transpose()).array() * (T(1) - st.act.array().square()))
            .matrix();
    d_keys += d_pre;
    const Vec<T> dq = d_pre.rowwise().sum();
    grads.att_W.noalias() += dq * st.s_prev.transpose();
    ds_prev.noalias() += p.att_W.transpose() * dq;

    ds = std::move(ds_prev);
  }

  // keys = att_U * ann
  grads.att_U.noalias() += d_keys * ann.transpose();
  d_ann.noalias() += p.att_U.transpose() * d_keys;

  // s0 = tanh(init_W * backward_0 + init_b)
  {
    const Vec<T> d_pre = (ds.array() * (T(1) - s0.array().square())).matrix();
    grads.init_W.noalias() += d_pre * ann.col(0).tail(H).transpose();
    grads.init_b.col(0) += d_pre;
    d_ann.col(0).tail(H) += p.init_W.transpose() * d_pre;
  }

  // Backward encoder ran from m-1 down to 0; unwind from 0 up.
  {
    Vec<T> db = Vec<T>::Zero(H);
    for (Eigen::Index i = 0; i < m; ++i) {
      Vec<T> dh = db + d_ann.col(i).tail(H);
      db.setZero();
      const Vec<T> dx = gru_backward<T>(p.enc_bwd_W, p.enc_bwd_U, grads.enc_bwd_W, grads.enc_bwd_U,
                                        grads.enc_bwd_b, bwd[static_cast<std::size_t>(i)], dh, db);
      grads.src_emb.row(source[static_cast<std::size_t>(i)]) += dx.transpose();
    }
  }
  {
    Vec<T> df = Vec<T>::Zero(H);
    for (Eigen::Index i = m - 1; i >= 0; --i) {
      Vec<T> dh = df + d_ann.col(i).head(H);
      df.setZero();
      const Vec<T> dx = gru_backward<T>(p.enc_fwd_W, p.enc_fwd_U, grads.enc_fwd_W, grads.enc_fwd_U,
                                        grads.enc_fwd_b, fwd[static_cast<std::size_t>(i)], dh, df);
      grads.src_emb.row(source[static_cast<std::size_t>(i)]) += dx.transpose();
    }
  }
  return nll;
}

#define PSEUDOMIX_INSTANTIATE(T)                                                              \
  template struct Parameters<T>;                                                             \
  template EncoderStates<T> encode(const Parameters<T>&, const Ids&);                        \
  template EncoderStates<T> states_from_annotations(const Parameters<T>&, const Mat<T>&);    \
  template DecoderState<T> initial_state(const Parameters<T>&, const EncoderStates<T>&);     \
  template Attention<T> attention_context(const Parameters<T>&, const DecoderState<T>&,      \
                                          const EncoderStates<T>&);                          \
  template StepOutput<T> decoder_step(const Parameters<T>&, Id, const DecoderState<T>&,      \
                                      const EncoderStates<T>&);                              \
  template double sequence_logprob(const Parameters<T>&, const Ids&, const Ids&);            \
  template double nll_and_gradient(const Parameters<T>&, const Ids&, const Ids&,             \
                                   Parameters<T>&, T);

PSEUDOMIX_INSTANTIATE(float)
PSEUDOMIX_INSTANTIATE(double)

#undef PSEUDOMIX_INSTANTIATE

}  // namespace pseudomix::nmt
