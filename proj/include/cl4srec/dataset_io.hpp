#pragma once

#include "cl4srec/corpus.hpp"

#include <filesystem>
#include <string>

namespace cl4srec {

/// A preprocessed corpus as stored on disk.
struct ProcessedDataset {
  IdIndex users;
  IdIndex items;
  std::vector<UserSequence> sequences;
  DatasetStats stats;
};

/// ingest -> k-core filter -> build_sequences.
ProcessedDataset preprocess(std::span<const RawRecord> records, std::size_t min_count = 5);

/// Writes user_map.tsv, item_map.tsv, sequences.txt and stats.tsv. The
/// directory is assembled next to `dir` and renamed into place.
void write_processed(const ProcessedDataset& data, const std::filesystem::path& dir);
ProcessedDataset read_processed(const std::filesystem::path& dir);

/// Table-1 style block: users, items, actions, avg length, density (%).
std::string format_stats(const DatasetStats& stats);

/// Writes `contents` to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace cl4srec
