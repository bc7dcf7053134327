#pragma once

// Unidirectional Transformer user encoder with an explicit backward pass.
//
// A forward call records every intermediate on a tape; backward() consumes
// the tape plus dLoss/dOutput and accumulates parameter gradients. The
// scalar type is a template parameter: training runs in float, gradient
// checks in double.

#include "cl4srec/corpus.hpp"
#include "cl4srec/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cl4srec {

struct EncoderHyper {
  int d = 64;
  int heads = 2;
  int layers = 2;
  int max_len = 50;
  int d_ff = 64;
  double dropout = 0.2;
  double ln_eps = 1e-8;
  /// |V|; the embedding table has |V| + 2 rows (padding and [mask]).
  std::size_t num_items = 0;

  void validate() const;
  std::size_t vocab_rows() const { return num_items + 2; }
  ItemId mask_id() const { return static_cast<ItemId>(num_items + 1); }
  int head_dim() const { return d / heads; }
};

template <class T>
struct LayerParams {
  // Head i of the query projection is the column block [i*d/h, (i+1)*d/h)
  // of `wq`; likewise for keys and values.
  Mat<T> wq, wk, wv, wo;
  Mat<T> w1, b1, w2, b2;
  Mat<T> ln1_gain, ln1_bias, ln2_gain, ln2_bias;
};

template <class T>
struct EncoderParams {
  Mat<T> item_emb;  // (|V|+2) x d
  Mat<T> pos_emb;   // T x d
  std::vector<LayerParams<T>> layers;

  /// All tensors zero, shaped for `hyper` (layer-norm gains included).
  static EncoderParams zeros(const EncoderHyper& hyper);

  /// Visits every tensor as (name, tensor) in a fixed order.
  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  std::size_t parameter_count() const;
  void set_zero();

  template <class U>
  EncoderParams<U> cast() const;

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    f(std::string("item_emb"), self.item_emb);
    f(std::string("pos_emb"), self.pos_emb);
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      auto& p = self.layers[l];
      const auto pre = "layer" + std::to_string(l) + ".";
      f(pre + "wq", p.wq);
      f(pre + "wk", p.wk);
      f(pre + "wv", p.wv);
      f(pre + "wo", p.wo);
      f(pre + "w1", p.w1);
      f(pre + "b1", p.b1);
      f(pre + "w2", p.w2);
      f(pre + "b2", p.b2);
      f(pre + "ln1_gain", p.ln1_gain);
      f(pre + "ln1_bias", p.ln1_bias);
      f(pre + "ln2_gain", p.ln2_gain);
      f(pre + "ln2_bias", p.ln2_bias);
    }
  }
};

enum class Mode { Train, Eval };

template <class T>
struct LayerTape {
  Mat<T> input;
  Mat<T> q, k, v;
  std::vector<Mat<T>> attn;  // per head, T x T row-stochastic over unmasked keys
  Mat<T> concat;
  Mat<T> drop1;  // inverted-dropout multipliers; empty when inactive
  Mat<T> xhat1;
  Mat<T> inv_std1;  // T x 1
  Mat<T> f;
  Mat<T> ffn_pre;
  Mat<T> drop2;
  Mat<T> xhat2;
  Mat<T> inv_std2;
};

/// Per-position states H^L plus everything backward() needs.
template <class T>
struct SequenceStates {
  PaddedWindow window;
  Mat<T> output;  // T x d
  std::vector<LayerTape<T>> layers;
  bool recorded = false;

  /// s_u: the row at the final (most recent) slot.
  RowVec<T> representation() const { return output.row(output.rows() - 1); }
};

template <class T>
Mat<T> embed(const PaddedWindow& window, const EncoderParams<T>& params);

/// Multi-head scaled dot-product attention with causal and key-padding
/// masks. `pad` leading slots are padding. Rows with no visible key are 0.
/// `probs`, when given, receives the per-head attention matrices.
template <class T>
Mat<T> causal_attention(const Mat<T>& h, const LayerParams<T>& layer, int heads, std::size_t pad,
                        std::vector<Mat<T>>* probs = nullptr);

template <class T>
Mat<T> pffn(const Mat<T>& h, const LayerParams<T>& layer);

template <class T>
Mat<T> layer_norm(const Mat<T>& x, const Mat<T>& gain, const Mat<T>& bias, double eps);

/// One Transformer block. `rng` is only touched in train mode with
/// dropout > 0.
template <class T>
Mat<T> transformer_layer(const Mat<T>& h, const LayerParams<T>& layer, const EncoderHyper& hyper,
                         std::size_t pad, Mode mode, Rng* rng, LayerTape<T>* tape = nullptr);

template <class T>
SequenceStates<T> forward(const PaddedWindow& window, const EncoderParams<T>& params,
                          const EncoderHyper& hyper, Mode mode, Rng* rng, bool record = true);

/// Accumulates dLoss/dParams into `grads` given dLoss/dOutput (T x d).
/// Throws if `states` carries no recorded tape.
template <class T>
void backward(const SequenceStates<T>& states, const Mat<T>& d_output, const EncoderParams<T>& params,
              const EncoderHyper& hyper, EncoderParams<T>& grads);

/// Truncated normal on [-0.01, 0.01] for every weight; gains 1, biases 0.
template <class T>
EncoderParams<T> init_params(const EncoderHyper& hyper, Rng& rng);

/// Normal(0, 0.005) resampled until it falls inside [-0.01, 0.01].
double truncated_normal(Rng& rng);

}  // namespace cl4srec
