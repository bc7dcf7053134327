#include "cl4srec/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cl4srec {

namespace {

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("augmentation rate must lie in [0, 1]");
}

std::size_t uniform_index(std::size_t upper_inclusive, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, upper_inclusive)(rng);
}

}  // namespace

std::string to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::Crop: return "crop";
    case AugmentKind::Mask: return "mask";
    case AugmentKind::Reorder: return "reorder";
  }
  return "?";
}

AugmentKind parse_augment_kind(const std::string& name) {
  if (name == "crop") return AugmentKind::Crop;
  if (name == "mask") return AugmentKind::Mask;
  if (name == "reorder") return AugmentKind::Reorder;
  throw Error("unknown augmentation '" + name + "'");
}

std::size_t proportion_length(double rate, std::size_t n) {
  check_rate(rate);
  const auto len = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
  return std::min(len, n);
}

std::size_t crop_length(double eta, std::size_t n) {
  return std::max<std::size_t>(1, proportion_length(eta, n));
}

std::vector<ItemId> crop_at(std::span<const ItemId> seq, double eta, std::size_t start) {
  if (seq.empty()) throw Error("crop of an empty sequence");
  const auto len = crop_length(eta, seq.size());
  if (start + len > seq.size()) throw Error("crop start out of range");
  return {seq.begin() + static_cast<std::ptrdiff_t>(start),
          seq.begin() + static_cast<std::ptrdiff_t>(start + len)};
}

std::vector<ItemId> mask_at(std::span<const ItemId> seq, std::span<const std::size_t> positions,
                            ItemId mask_id) {
  std::vector<ItemId> out(seq.begin(), seq.end());
  for (auto p : positions) out.at(p) = mask_id;
  return out;
}

std::vector<ItemId> reorder_at(std::span<const ItemId> seq, std::size_t start,
                               std::span<const std::size_t> block_order) {
  if (start + block_order.size() > seq.size()) throw Error("reorder block out of range");
  std::vector<ItemId> out(seq.begin(), seq.end());
  for (std::size_t k = 0; k < block_order.size(); ++k) {
    if (block_order[k] >= block_order.size()) throw Error("reorder permutation out of range");
    out[start + k] = seq[start + block_order[k]];
  }
  return out;
}

std::vector<ItemId> crop(std::span<const ItemId> seq, double eta, Rng& rng) {
  if (seq.empty()) throw Error("crop of an empty sequence");
  const auto len = crop_length(eta, seq.size());
  return crop_at(seq, eta, uniform_index(seq.size() - len, rng));
}

std::vector<ItemId> mask(std::span<const ItemId> seq, double gamma, ItemId mask_id, Rng& rng) {
  const auto count = proportion_length(gamma, seq.size());
  // Partial Fisher-Yates: the first `count` entries are a uniform subset.
  std::vector<std::size_t> idx(seq.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    std::swap(idx[k], idx[k + uniform_index(idx.size() - 1 - k, rng)]);
  }
  return mask_at(seq, std::span(idx).first(count), mask_id);
}

std::vector<ItemId> reorder(std::span<const ItemId> seq, double beta, Rng& rng) {
  const auto len = proportion_length(beta, seq.size());
  if (len == 0) return {seq.begin(), seq.end()};
  const auto start = uniform_index(seq.size() - len, rng);
  std::vector<std::size_t> order(len);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = len - 1; k > 0; --k) std::swap(order[k], order[uniform_index(k, rng)]);
  return reorder_at(seq, start, order);
}

std::vector<ItemId> apply(const AugmentOp& op, std::span<const ItemId> seq, ItemId mask_id, Rng& rng) {
  switch (op.kind) {
    case AugmentKind::Crop: return crop(seq, op.rate, rng);
    case AugmentKind::Mask: return mask(seq, op.rate, mask_id, rng);
    case AugmentKind::Reorder: return reorder(seq, op.rate, rng);
  }
  throw Error("unreachable augmentation kind");
}

std::optional<AugmentedPair> sample_pair(std::span<const ItemId> seq, std::span<const AugmentOp> ops,
                                         ItemId mask_id, Rng& rng, UserId source_user) {
  if (ops.empty()) throw Error("sample_pair needs at least one augmentation");
  if (seq.size() < 2) return std::nullopt;
  const auto& a_i = ops[uniform_index(ops.size() - 1, rng)];
  const auto& a_j = ops[uniform_index(ops.size() - 1, rng)];
  AugmentedPair pair;
  pair.source_user = source_user;
  pair.view_i = apply(a_i, seq, mask_id, rng);
  pair.view_j = apply(a_j, seq, mask_id, rng);
  return pair;
}

}  // namespace cl4srec
