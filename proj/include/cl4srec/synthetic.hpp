#pragma once

// Synthetic interaction logs with known structure, used for desk-scale
// experiments and tests.
//
// Clustered generator: items are partitioned into `clusters` equal groups,
// each arranged in a cycle. Every user has one home cluster. A sequence
// starts at a random home-cluster item; each following item is, with
// probability `p_follow`, the cycle successor of the previous item; with
// probability `p_home`, a uniform home-cluster item; otherwise a uniform
// catalog item. Timestamps are positions, so chronological order is the
// generation order.

#include "cl4srec/corpus.hpp"

#include <ostream>

namespace cl4srec {

struct SyntheticConfig {
  std::size_t users = 2000;
  std::size_t items = 1000;
  std::size_t clusters = 50;
  std::size_t min_len = 5;
  std::size_t max_len = 20;
  double p_follow = 0.3;
  double p_home = 0.5;
  std::uint64_t seed = 2021;
};

std::vector<RawRecord> generate_clustered(const SyntheticConfig& config);

/// Every user interacts with `length` items: distinct uniform fillers plus
/// one shared planted item at a uniform slot inside the training prefix.
/// Right before that slot the planted item is the Bayes-optimal next item
/// (each filler has probability ~1/fillers, the planted item ~1/length).
std::vector<RawRecord> generate_planted(std::size_t users, std::size_t fillers, std::size_t length,
                                        std::uint64_t seed, const std::string& planted = "planted");

/// Tab-separated `user item 1 timestamp` lines.
void write_raw(std::ostream& out, std::span<const RawRecord> records);

}  // namespace cl4srec
