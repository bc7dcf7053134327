#include "cl4srec/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cl4srec {

namespace fs = std::filesystem;

ProcessedDataset preprocess(std::span<const RawRecord> records, std::size_t min_count) {
  auto log = five_core_filter(ingest(records), min_count);
  ProcessedDataset out;
  out.stats = compute_stats(log);
  out.sequences = build_sequences(log);
  out.users = std::move(log.users);
  out.items = std::move(log.items);
  return out;
}

std::string format_stats(const DatasetStats& s) {
  std::ostringstream os;
  os << "users\titems\tactions\tavg_length\tdensity_pct\n"
     << s.users << '\t' << s.items << '\t' << s.actions << '\t' << std::fixed
     << std::setprecision(1) << s.avg_length << '\t' << std::setprecision(2) << s.density * 100.0
     << '\n';
  return os.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

std::string format_index(const IdIndex& idx) {
  std::string s;
  for (std::uint32_t i = 1; i <= idx.size(); ++i) {
    s += std::to_string(i);
    s += '\t';
    s += idx.external(i);
    s += '\n';
  }
  return s;
}

IdIndex parse_index(const fs::path& path) {
  std::istringstream in(read_file(path));
  IdIndex idx;
  std::string line;
  std::uint32_t expect = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(path.string() + ": malformed id map line");
    if (std::stoul(line.substr(0, tab)) != expect) throw Error(path.string() + ": ids not contiguous");
    if (idx.intern(line.substr(tab + 1)) != expect) throw Error(path.string() + ": duplicate id");
    ++expect;
  }
  return idx;
}

}  // namespace

void write_processed(const ProcessedDataset& data, const fs::path& dir) {
  fs::path staging = dir;
  staging += ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);

  std::ostringstream seqs;
  for (const auto& s : data.sequences) {
    seqs << s.user;
    for (auto v : s.items) seqs << ' ' << v;
    seqs << '\n';
  }
  write_file_atomic(staging / "user_map.tsv", format_index(data.users));
  write_file_atomic(staging / "item_map.tsv", format_index(data.items));
  write_file_atomic(staging / "sequences.txt", seqs.str());
  write_file_atomic(staging / "stats.tsv", format_stats(data.stats));

  fs::remove_all(dir);
  if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
  fs::rename(staging, dir);
}

ProcessedDataset read_processed(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("dataset directory not found: " + dir.string());
  ProcessedDataset data;
  data.users = parse_index(dir / "user_map.tsv");
  data.items = parse_index(dir / "item_map.tsv");
  std::istringstream in(read_file(dir / "sequences.txt"));
  std::string line;
  std::size_t actions = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    UserSequence s;
    ls >> s.user;
    ItemId v = 0;
    while (ls >> v) {
      if (v == 0 || v > data.items.size()) throw Error("sequences.txt: item id out of range");
      s.items.push_back(v);
    }
    if (s.user == 0 || s.user > data.users.size()) throw Error("sequences.txt: user id out of range");
    actions += s.items.size();
    data.sequences.push_back(std::move(s));
  }
  data.stats.users = data.users.size();
  data.stats.items = data.items.size();
  data.stats.actions = actions;
  if (data.stats.users) data.stats.avg_length = double(actions) / double(data.stats.users);
  if (data.stats.users && data.stats.items) {
    data.stats.density = double(actions) / (double(data.stats.users) * double(data.stats.items));
  }
  return data;
}

}  // namespace cl4srec
