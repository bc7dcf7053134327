#pragma once

// Sampled-softmax next-item loss, in-batch contrastive loss, and their
// weighted sum. Each loss optionally accumulates its own gradient.

#include "cl4srec/encoder.hpp"
#include "cl4srec/types.hpp"

#include <span>
#include <unordered_set>
#include <vector>

namespace cl4srec {

/// Dot-product similarity; throws on width mismatch.
template <class T>
T sim(std::span<const T> u, std::span<const T> v);

struct ContrastiveOptions {
  /// Average over both anchors of each pair (2N anchors); otherwise only
  /// the first view of each pair anchors (N anchors).
  bool symmetric = true;
};

/// `reprs` holds 2N rows ordered [s_1^a_i, s_1^a_j, ..., s_N^a_i, s_N^a_j].
/// For N < 2 the loss is 0 (no negatives). `d_reprs`, when given, receives
/// dLoss/dReprs (overwritten).
template <class T>
T contrastive_loss(const Mat<T>& reprs, const ContrastiveOptions& options = {}, Mat<T>* d_reprs = nullptr);

/// k ids uniform over [1, catalog] without replacement, excluding
/// `positive` and anything in `also_exclude`.
std::vector<ItemId> sample_negatives(ItemId positive, std::size_t k, std::size_t catalog, Rng& rng,
                                     const std::unordered_set<ItemId>* also_exclude = nullptr);

/// One next-item prediction: states row `slot` of window `window`.
struct PredictionTarget {
  std::size_t window = 0;
  Eigen::Index slot = 0;
  ItemId positive = 0;
  std::vector<ItemId> negatives;
};

/// Mean over targets of -log softmax(positive | positive + negatives) with
/// logits s . E[v]. When the gradient outputs are given, `d_states[w]` and
/// `d_item_emb` are incremented by `weight` times the gradient.
template <class T>
T main_loss(std::span<const Mat<T>* const> states, std::span<const PredictionTarget> targets,
            const Mat<T>& item_emb, std::vector<Mat<T>>* d_states = nullptr, Mat<T>* d_item_emb = nullptr,
            T weight = T(1));

inline double total_loss(double main, double cl, double lambda) { return main + lambda * cl; }

/// log(sum(exp(x))) via max subtraction.
template <class T>
T log_sum_exp(std::span<const T> x);

}  // namespace cl4srec
