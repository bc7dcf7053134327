#pragma once

// Stochastic sequence augmentations (item crop, item mask, item reorder)
// and two-view sampling for the contrastive task.

#include "cl4srec/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cl4srec {

enum class AugmentKind { Crop, Mask, Reorder };

struct AugmentOp {
  AugmentKind kind = AugmentKind::Crop;
  /// eta for crop, gamma for mask, beta for reorder; in [0, 1].
  double rate = 0.0;
};

std::string to_string(AugmentKind kind);
AugmentKind parse_augment_kind(const std::string& name);

struct AugmentedPair {
  std::vector<ItemId> view_i;
  std::vector<ItemId> view_j;
  UserId source_user = 0;
};

/// floor(rate * n), robust to representation error such as 0.7 * 10.
std::size_t proportion_length(double rate, std::size_t n);

/// Crop length max(1, floor(eta * n)).
std::size_t crop_length(double eta, std::size_t n);

// Deterministic cores; `start` is 0-based.
std::vector<ItemId> crop_at(std::span<const ItemId> seq, double eta, std::size_t start);
std::vector<ItemId> mask_at(std::span<const ItemId> seq, std::span<const std::size_t> positions,
                            ItemId mask_id);
/// `block_order[k]` is the offset (within the block) of the item placed at
/// block position k.
std::vector<ItemId> reorder_at(std::span<const ItemId> seq, std::size_t start,
                               std::span<const std::size_t> block_order);

std::vector<ItemId> crop(std::span<const ItemId> seq, double eta, Rng& rng);
std::vector<ItemId> mask(std::span<const ItemId> seq, double gamma, ItemId mask_id, Rng& rng);
std::vector<ItemId> reorder(std::span<const ItemId> seq, double beta, Rng& rng);

std::vector<ItemId> apply(const AugmentOp& op, std::span<const ItemId> seq, ItemId mask_id, Rng& rng);

/// Draws a_i and a_j independently and uniformly from `ops` and applies
/// each to its own copy of `seq`. Returns nullopt for sequences shorter
/// than two items.
std::optional<AugmentedPair> sample_pair(std::span<const ItemId> seq, std::span<const AugmentOp> ops,
                                         ItemId mask_id, Rng& rng, UserId source_user = 0);

}  // namespace cl4srec
