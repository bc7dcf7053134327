#include "cl4srec/objective.hpp"

#include <algorithm>
#include <cmath>

namespace cl4srec {

template <class T>
T sim(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw Error("sim: width mismatch");
  T s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

template <class T>
T log_sum_exp(std::span<const T> x) {
  if (x.empty()) return -std::numeric_limits<T>::infinity();
  const T mx = *std::max_element(x.begin(), x.end());
  T s = 0;
  for (auto v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

template <class T>
T contrastive_loss(const Mat<T>& reprs, const ContrastiveOptions& options, Mat<T>* d_reprs) {
  if (reprs.rows() % 2 != 0) throw Error("contrastive_loss: odd number of views");
  const auto views = reprs.rows();
  const auto n_users = views / 2;
  if (d_reprs) *d_reprs = Mat<T>::Zero(reprs.rows(), reprs.cols());
  if (n_users < 2) return T(0);

  const Mat<T> logits = reprs * reprs.transpose();
  const Eigen::Index stride = options.symmetric ? 1 : 2;
  const auto anchors = views / stride;
  Mat<T> g = Mat<T>::Zero(views, views);
  T loss = 0;
  std::vector<T> row(static_cast<std::size_t>(views - 1));
  for (Eigen::Index a = 0; a < views; a += stride) {
    const Eigen::Index partner = a ^ 1;
    std::size_t n = 0;
    for (Eigen::Index b = 0; b < views; ++b) {
      if (b != a) row[n++] = logits(a, b);
    }
    const T lse = log_sum_exp<T>(row);
    loss += lse - logits(a, partner);
    if (d_reprs) {
      for (Eigen::Index b = 0; b < views; ++b) {
        if (b == a) continue;
        g(a, b) = (std::exp(logits(a, b) - lse) - (b == partner ? T(1) : T(0))) / static_cast<T>(anchors);
      }
    }
  }
  if (d_reprs) d_reprs->noalias() = (g + g.transpose()) * reprs;
  return loss / static_cast<T>(anchors);
}

std::vector<ItemId> sample_negatives(ItemId positive, std::size_t k, std::size_t catalog, Rng& rng,
                                     const std::unordered_set<ItemId>* also_exclude) {
  if (catalog < 2) throw Error("sample_negatives: catalog needs at least two items");
  if (k >= catalog) throw Error("sample_negatives: k must be smaller than the catalog");
  auto excluded = [&](ItemId v) {
    return v == positive || (also_exclude && also_exclude->count(v));
  };
  std::size_t blocked = (positive >= 1 && positive <= catalog) ? 1 : 0;
  if (also_exclude) {
    for (auto v : *also_exclude) {
      if (v >= 1 && v <= catalog && v != positive) ++blocked;
    }
  }
  const auto available = catalog - blocked;
  if (k > available) throw Error("sample_negatives: not enough candidate items");

  std::vector<ItemId> out;
  out.reserve(k);
  if (2 * k <= available) {
    std::uniform_int_distribution<ItemId> pick(1, static_cast<ItemId>(catalog));
    while (out.size() < k) {
      const auto v = pick(rng);
      if (excluded(v) || std::find(out.begin(), out.end(), v) != out.end()) continue;
      out.push_back(v);
    }
    return out;
  }
  std::vector<ItemId> pool;
  pool.reserve(available);
  for (ItemId v = 1; v <= catalog; ++v) {
    if (!excluded(v)) pool.push_back(v);
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    out.push_back(pool[i]);
  }
  return out;
}

template <class T>
T main_loss(std::span<const Mat<T>* const> states, std::span<const PredictionTarget> targets,
            const Mat<T>& item_emb, std::vector<Mat<T>>* d_states, Mat<T>* d_item_emb, T weight) {
  if (targets.empty()) throw Error("main_loss: empty batch");
  const T inv = weight / static_cast<T>(targets.size());
  T total = 0;
  std::vector<T> logits;
  for (const auto& tg : targets) {
    if (tg.positive == kPaddingId) throw Error("main_loss: padding used as a target");
    const auto s = states[tg.window]->row(tg.slot);
    logits.resize(tg.negatives.size() + 1);
    logits[0] = s.dot(item_emb.row(tg.positive));
    for (std::size_t j = 0; j < tg.negatives.size(); ++j) logits[j + 1] = s.dot(item_emb.row(tg.negatives[j]));
    const T lse = log_sum_exp<T>(logits);
    total += lse - logits[0];
    if (!d_states && !d_item_emb) continue;
    for (std::size_t j = 0; j < logits.size(); ++j) {
      const ItemId v = j == 0 ? tg.positive : tg.negatives[j - 1];
      const T coef = (std::exp(logits[j] - lse) - (j == 0 ? T(1) : T(0))) * inv;
      if (d_states) (*d_states)[tg.window].row(tg.slot) += coef * item_emb.row(v);
      if (d_item_emb) d_item_emb->row(v) += coef * s;
    }
  }
  return total / static_cast<T>(targets.size());
}

#define CL4SREC_INSTANTIATE(T)                                                                           \
  template T sim(std::span<const T>, std::span<const T>);                                                \
  template T log_sum_exp(std::span<const T>);                                                            \
  template T contrastive_loss(const Mat<T>&, const ContrastiveOptions&, Mat<T>*);                        \
  template T main_loss(std::span<const Mat<T>* const>, std::span<const PredictionTarget>, const Mat<T>&, \
                       std::vector<Mat<T>>*, Mat<T>*, T);

CL4SREC_INSTANTIATE(float)
CL4SREC_INSTANTIATE(double)
#undef CL4SREC_INSTANTIATE

}  // namespace cl4srec
