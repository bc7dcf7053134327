#pragma once

// Implicit-feedback preprocessing: binarize, deduplicate, k-core filter,
// chronological sequences, leave-one-out split and fixed-length windows.

#include "cl4srec/types.hpp"

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cl4srec {

/// One raw line after parsing. The rating column, when present, only marks
/// presence and is discarded by binarization.
struct RawRecord {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;
};

/// Bidirectional map between external string ids and dense ids 1..n.
class IdIndex {
 public:
  /// Returns the dense id, inserting the key if unseen.
  std::uint32_t intern(std::string_view key);
  /// 0 when absent.
  std::uint32_t find(std::string_view key) const;
  const std::string& external(std::uint32_t dense) const { return names_.at(dense - 1); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  std::int64_t timestamp = 0;
};

/// Deduplicated interactions in input order with contiguous dense ids.
struct InteractionLog {
  std::vector<Interaction> interactions;
  IdIndex users;
  IdIndex items;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_items() const { return items.size(); }
};

struct UserSequence {
  UserId user = 0;
  std::vector<ItemId> items;
};

struct UserSplit {
  UserId user = 0;
  std::vector<ItemId> train;
  ItemId valid_target = 0;
  ItemId test_target = 0;
};

struct SplitDataset {
  std::vector<UserSplit> users;
  std::size_t catalog_size = 0;
  /// Sequences shorter than three items that could not be split.
  std::size_t excluded_short = 0;

  ItemId mask_id() const { return static_cast<ItemId>(catalog_size + 1); }
};

struct PaddedWindow {
  std::vector<ItemId> item_ids;
  std::size_t true_length = 0;

  std::size_t size() const { return item_ids.size(); }
  /// Number of leading padding slots.
  std::size_t pad() const { return item_ids.size() - true_length; }
};

struct ParseOptions {
  std::string delimiter = "\t";
  /// Lines starting with this prefix are skipped (empty disables).
  std::string comment_prefix = "#";
};

/// Splits one line into a record. Accepts `user item timestamp` or
/// `user item rating timestamp`; throws Error otherwise.
RawRecord parse_record(std::string_view line, const ParseOptions& options);

/// Reads all lines; malformed lines raise Error naming the 1-based line.
std::vector<RawRecord> read_records(std::istream& in, const ParseOptions& options);

/// Binarizes and deduplicates per (user, item), keeping the earliest
/// timestamp (first in input on ties), and builds dense id maps in order of
/// first appearance among the surviving records.
InteractionLog ingest(std::span<const RawRecord> records);

/// Iteratively drops users and items with fewer than `min_count`
/// interactions until nothing changes, then recompacts ids preserving order.
InteractionLog five_core_filter(const InteractionLog& log, std::size_t min_count = 5);

/// One sequence per user ordered by dense user id; items sorted by
/// timestamp, stable on ties.
std::vector<UserSequence> build_sequences(const InteractionLog& log);

SplitDataset leave_one_out_split(std::span<const UserSequence> seqs, std::size_t catalog_size);

/// Keeps the last min(|items|, T) items, left-padded with 0 to length T.
PaddedWindow make_window(std::span<const ItemId> items, std::size_t max_len);

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t actions = 0;
  double avg_length = 0.0;
  /// actions / (users * items), as a fraction.
  double density = 0.0;
};

DatasetStats compute_stats(const InteractionLog& log);

}  // namespace cl4srec
