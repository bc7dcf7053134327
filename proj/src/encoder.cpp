#include "cl4srec/encoder.hpp"

#include <cmath>
#include <limits>

namespace cl4srec {

void EncoderHyper::validate() const {
  if (d <= 0 || heads <= 0 || d % heads != 0) throw Error("encoder: d must be a positive multiple of heads");
  if (layers < 0) throw Error("encoder: negative layer count");
  if (max_len <= 0) throw Error("encoder: max_len must be positive");
  if (d_ff <= 0) throw Error("encoder: d_ff must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("encoder: dropout must lie in [0, 1)");
  if (num_items == 0) throw Error("encoder: empty catalog");
}

template <class T>
EncoderParams<T> EncoderParams<T>::zeros(const EncoderHyper& hp) {
  EncoderParams p;
  const auto rows = static_cast<Eigen::Index>(hp.vocab_rows());
  p.item_emb = Mat<T>::Zero(rows, hp.d);
  p.pos_emb = Mat<T>::Zero(hp.max_len, hp.d);
  p.layers.resize(static_cast<std::size_t>(hp.layers));
  for (auto& l : p.layers) {
    l.wq = l.wk = l.wv = l.wo = Mat<T>::Zero(hp.d, hp.d);
    l.w1 = Mat<T>::Zero(hp.d, hp.d_ff);
    l.b1 = Mat<T>::Zero(1, hp.d_ff);
    l.w2 = Mat<T>::Zero(hp.d_ff, hp.d);
    l.b2 = Mat<T>::Zero(1, hp.d);
    l.ln1_gain = l.ln2_gain = Mat<T>::Ones(1, hp.d);
    l.ln1_bias = l.ln2_bias = Mat<T>::Zero(1, hp.d);
  }
  return p;
}

template <class T>
std::size_t EncoderParams<T>::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Mat<T>& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <class T>
void EncoderParams<T>::set_zero() {
  for_each([](const std::string&, Mat<T>& m) { m.setZero(); });
}

template <class T>
template <class U>
EncoderParams<U> EncoderParams<T>::cast() const {
  EncoderParams<U> out;
  out.item_emb = item_emb.template cast<U>();
  out.pos_emb = pos_emb.template cast<U>();
  out.layers.resize(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& a = layers[l];
    auto& b = out.layers[l];
    b.wq = a.wq.template cast<U>();
    b.wk = a.wk.template cast<U>();
    b.wv = a.wv.template cast<U>();
    b.wo = a.wo.template cast<U>();
    b.w1 = a.w1.template cast<U>();
    b.b1 = a.b1.template cast<U>();
    b.w2 = a.w2.template cast<U>();
    b.b2 = a.b2.template cast<U>();
    b.ln1_gain = a.ln1_gain.template cast<U>();
    b.ln1_bias = a.ln1_bias.template cast<U>();
    b.ln2_gain = a.ln2_gain.template cast<U>();
    b.ln2_bias = a.ln2_bias.template cast<U>();
  }
  return out;
}

template <class T>
Mat<T> embed(const PaddedWindow& window, const EncoderParams<T>& params) {
  const auto len = static_cast<Eigen::Index>(window.size());
  if (len != params.pos_emb.rows()) throw Error("embed: window length does not match position table");
  Mat<T> h(len, params.item_emb.cols());
  for (Eigen::Index t = 0; t < len; ++t) {
    const auto id = window.item_ids[static_cast<std::size_t>(t)];
    if (id >= static_cast<std::size_t>(params.item_emb.rows())) throw Error("embed: item id out of range");
    h.row(t) = params.item_emb.row(id) + params.pos_emb.row(t);
  }
  return h;
}

namespace {

template <class T>
void attention_impl(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v, int heads, std::size_t pad,
                    Mat<T>& concat, std::vector<Mat<T>>& probs) {
  const auto len = q.rows();
  const auto dk = q.cols() / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dk));
  const auto first = static_cast<Eigen::Index>(pad);
  concat = Mat<T>::Zero(len, q.cols());
  probs.assign(static_cast<std::size_t>(heads), Mat<T>::Zero(len, len));
  for (int hd = 0; hd < heads; ++hd) {
    const auto qh = q.middleCols(hd * dk, dk);
    const auto kh = k.middleCols(hd * dk, dk);
    Mat<T> logits = (qh * kh.transpose()) * scale;
    auto& a = probs[static_cast<std::size_t>(hd)];
    for (Eigen::Index i = first; i < len; ++i) {
      const auto n = i - first + 1;
      auto row = logits.row(i).segment(first, n);
      const T mx = row.maxCoeff();
      auto out = a.row(i).segment(first, n);
      out = (row.array() - mx).exp().matrix();
      out /= out.sum();
    }
    concat.middleCols(hd * dk, dk).noalias() = a * v.middleCols(hd * dk, dk);
  }
}

template <class T>
Mat<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Mat<T> m(rows, cols);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng) < rate ? T(0) : keep_scale;
  return m;
}

template <class T>
Mat<T> layer_norm_impl(const Mat<T>& x, const Mat<T>& gain, const Mat<T>& bias, double eps, Mat<T>* xhat_out,
                       Mat<T>* inv_out) {
  Mat<T> xhat(x.rows(), x.cols());
  Mat<T> inv(x.rows(), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const T mu = x.row(i).mean();
    const T var = (x.row(i).array() - mu).square().mean();
    inv(i, 0) = T(1) / std::sqrt(var + static_cast<T>(eps));
    xhat.row(i) = (x.row(i).array() - mu) * inv(i, 0);
  }
  Mat<T> y = (xhat.array().rowwise() * gain.row(0).array()).rowwise() + bias.row(0).array();
  if (xhat_out) *xhat_out = std::move(xhat);
  if (inv_out) *inv_out = std::move(inv);
  return y;
}

template <class T>
Mat<T> layer_norm_backward(const Mat<T>& dy, const Mat<T>& xhat, const Mat<T>& inv, const Mat<T>& gain,
                           Mat<T>& d_gain, Mat<T>& d_bias) {
  d_gain += (dy.array() * xhat.array()).colwise().sum().matrix();
  d_bias += dy.colwise().sum();
  Mat<T> dxhat = dy.array().rowwise() * gain.row(0).array();
  Mat<T> dx(dy.rows(), dy.cols());
  const T n = static_cast<T>(dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const T m1 = dxhat.row(i).sum() / n;
    const T m2 = dxhat.row(i).dot(xhat.row(i)) / n;
    dx.row(i) = ((dxhat.row(i).array() - m1 - xhat.row(i).array() * m2) * inv(i, 0)).matrix();
  }
  return dx;
}

}  // namespace

template <class T>
Mat<T> causal_attention(const Mat<T>& h, const LayerParams<T>& layer, int heads, std::size_t pad,
                        std::vector<Mat<T>>* probs) {
  Mat<T> q = h * layer.wq, k = h * layer.wk, v = h * layer.wv;
  Mat<T> concat;
  std::vector<Mat<T>> local;
  attention_impl(q, k, v, heads, pad, concat, probs ? *probs : local);
  return concat * layer.wo;
}

template <class T>
Mat<T> pffn(const Mat<T>& h, const LayerParams<T>& layer) {
  Mat<T> pre = (h * layer.w1).rowwise() + layer.b1.row(0);
  return (pre.cwiseMax(T(0)) * layer.w2).rowwise() + layer.b2.row(0);
}

template <class T>
Mat<T> layer_norm(const Mat<T>& x, const Mat<T>& gain, const Mat<T>& bias, double eps) {
  return layer_norm_impl<T>(x, gain, bias, eps, nullptr, nullptr);
}

template <class T>
Mat<T> transformer_layer(const Mat<T>& h, const LayerParams<T>& layer, const EncoderHyper& hyper,
                         std::size_t pad, Mode mode, Rng* rng, LayerTape<T>* tape) {
  LayerTape<T> local;
  auto& tp = tape ? *tape : local;
  const bool drop = mode == Mode::Train && hyper.dropout > 0.0;
  if (drop && !rng) throw Error("transformer_layer: dropout requires a random source");

  tp.input = h;
  tp.q.noalias() = h * layer.wq;
  tp.k.noalias() = h * layer.wk;
  tp.v.noalias() = h * layer.wv;
  attention_impl(tp.q, tp.k, tp.v, hyper.heads, pad, tp.concat, tp.attn);
  Mat<T> mh = tp.concat * layer.wo;
  if (drop) {
    tp.drop1 = dropout_mask<T>(mh.rows(), mh.cols(), hyper.dropout, *rng);
    mh.array() *= tp.drop1.array();
  } else {
    tp.drop1.resize(0, 0);
  }
  tp.f = layer_norm_impl<T>(h + mh, layer.ln1_gain, layer.ln1_bias, hyper.ln_eps, &tp.xhat1, &tp.inv_std1);

  tp.ffn_pre = (tp.f * layer.w1).rowwise() + layer.b1.row(0);
  Mat<T> y = (tp.ffn_pre.cwiseMax(T(0)) * layer.w2).rowwise() + layer.b2.row(0);
  if (drop) {
    tp.drop2 = dropout_mask<T>(y.rows(), y.cols(), hyper.dropout, *rng);
    y.array() *= tp.drop2.array();
  } else {
    tp.drop2.resize(0, 0);
  }
  return layer_norm_impl<T>(tp.f + y, layer.ln2_gain, layer.ln2_bias, hyper.ln_eps, &tp.xhat2, &tp.inv_std2);
}

template <class T>
SequenceStates<T> forward(const PaddedWindow& window, const EncoderParams<T>& params, const EncoderHyper& hyper,
                          Mode mode, Rng* rng, bool record) {
  SequenceStates<T> st;
  st.window = window;
  Mat<T> h = embed(window, params);
  const auto pad = window.pad();
  if (record) st.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    h = transformer_layer(h, params.layers[l], hyper, pad, mode, rng, record ? &st.layers[l] : nullptr);
  }
  st.output = std::move(h);
  st.recorded = record;
  return st;
}

template <class T>
void backward(const SequenceStates<T>& st, const Mat<T>& d_output, const EncoderParams<T>& params,
              const EncoderHyper& hyper, EncoderParams<T>& grads) {
  if (!st.recorded) throw Error("backward: no recorded forward pass");
  if (d_output.rows() != st.output.rows() || d_output.cols() != st.output.cols()) {
    throw Error("backward: gradient shape mismatch");
  }
  const int heads = hyper.heads;
  Mat<T> dh = d_output;
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& p = params.layers[li];
    const auto& tp = st.layers[li];
    auto& g = grads.layers[li];

    Mat<T> dx2 = layer_norm_backward<T>(dh, tp.xhat2, tp.inv_std2, p.ln2_gain, g.ln2_gain, g.ln2_bias);
    Mat<T> df = dx2;
    Mat<T> dy = tp.drop2.size() ? Mat<T>(dx2.array() * tp.drop2.array()) : dx2;
    const Mat<T> z = tp.ffn_pre.cwiseMax(T(0));
    g.w2.noalias() += z.transpose() * dy;
    g.b2 += dy.colwise().sum();
    Mat<T> dpre = dy * p.w2.transpose();
    dpre.array() *= (tp.ffn_pre.array() > T(0)).template cast<T>();
    g.w1.noalias() += tp.f.transpose() * dpre;
    g.b1 += dpre.colwise().sum();
    df.noalias() += dpre * p.w1.transpose();

    Mat<T> dx1 = layer_norm_backward<T>(df, tp.xhat1, tp.inv_std1, p.ln1_gain, g.ln1_gain, g.ln1_bias);
    Mat<T> dm = tp.drop1.size() ? Mat<T>(dx1.array() * tp.drop1.array()) : dx1;
    g.wo.noalias() += tp.concat.transpose() * dm;
    const Mat<T> dconcat = dm * p.wo.transpose();

    const auto dk = tp.q.cols() / heads;
    const T scale = T(1) / std::sqrt(static_cast<T>(dk));
    Mat<T> dq = Mat<T>::Zero(tp.q.rows(), tp.q.cols());
    Mat<T> dkey = dq, dv = dq;
    for (int hd = 0; hd < heads; ++hd) {
      const auto& a = tp.attn[static_cast<std::size_t>(hd)];
      const auto doh = dconcat.middleCols(hd * dk, dk);
      Mat<T> da = doh * tp.v.middleCols(hd * dk, dk).transpose();
      dv.middleCols(hd * dk, dk).noalias() = a.transpose() * doh;
      const auto rowdot = (da.array() * a.array()).rowwise().sum().eval();
      Mat<T> ds = (a.array() * (da.array().colwise() - rowdot)).matrix() * scale;
      dq.middleCols(hd * dk, dk).noalias() = ds * tp.k.middleCols(hd * dk, dk);
      dkey.middleCols(hd * dk, dk).noalias() = ds.transpose() * tp.q.middleCols(hd * dk, dk);
    }
    g.wq.noalias() += tp.input.transpose() * dq;
    g.wk.noalias() += tp.input.transpose() * dkey;
    g.wv.noalias() += tp.input.transpose() * dv;
    dh = dx1;
    dh.noalias() += dq * p.wq.transpose();
    dh.noalias() += dkey * p.wk.transpose();
    dh.noalias() += dv * p.wv.transpose();
  }
  grads.pos_emb += dh;
  for (Eigen::Index t = 0; t < dh.rows(); ++t) {
    grads.item_emb.row(st.window.item_ids[static_cast<std::size_t>(t)]) += dh.row(t);
  }
}

double truncated_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 0.005);
  while (true) {
    const double x = n(rng);
    if (x >= -0.01 && x <= 0.01) return x;
  }
}

template <class T>
EncoderParams<T> init_params(const EncoderHyper& hyper, Rng& rng) {
  hyper.validate();
  auto p = EncoderParams<T>::zeros(hyper);
  p.for_each([&](const std::string& name, Mat<T>& m) {
    if (name.find("ln") != std::string::npos) return;  // gains stay 1, biases 0
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(truncated_normal(rng));
  });
  return p;
}

#define CL4SREC_INSTANTIATE(T)                                                                          \
  template struct EncoderParams<T>;                                                                     \
  template Mat<T> embed(const PaddedWindow&, const EncoderParams<T>&);                                  \
  template Mat<T> causal_attention(const Mat<T>&, const LayerParams<T>&, int, std::size_t,              \
                                   std::vector<Mat<T>>*);                                               \
  template Mat<T> pffn(const Mat<T>&, const LayerParams<T>&);                                           \
  template Mat<T> layer_norm(const Mat<T>&, const Mat<T>&, const Mat<T>&, double);                      \
  template Mat<T> transformer_layer(const Mat<T>&, const LayerParams<T>&, const EncoderHyper&,          \
                                    std::size_t, Mode, Rng*, LayerTape<T>*);                            \
  template SequenceStates<T> forward(const PaddedWindow&, const EncoderParams<T>&, const EncoderHyper&, \
                                     Mode, Rng*, bool);                                                 \
  template void backward(const SequenceStates<T>&, const Mat<T>&, const EncoderParams<T>&,              \
                         const EncoderHyper&, EncoderParams<T>&);                                       \
  template EncoderParams<T> init_params(const EncoderHyper&, Rng&);

CL4SREC_INSTANTIATE(float)
CL4SREC_INSTANTIATE(double)
#undef CL4SREC_INSTANTIATE

template EncoderParams<double> EncoderParams<float>::cast<double>() const;
template EncoderParams<float> EncoderParams<double>::cast<float>() const;
template EncoderParams<float> EncoderParams<float>::cast<float>() const;
template EncoderParams<double> EncoderParams<double>::cast<double>() const;

}  // namespace cl4srec
