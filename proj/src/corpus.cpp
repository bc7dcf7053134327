#include "cl4srec/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <unordered_map>

namespace cl4srec {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, std::string_view delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + delim.size();
  }
  return out;
}

struct PairHash {
  std::size_t operator()(const std::pair<UserId, ItemId>& p) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{p.first} << 32) | p.second);
  }
};

}  // namespace

std::uint32_t IdIndex::intern(std::string_view key) {
  auto it = lookup_.find(std::string(key));
  if (it != lookup_.end()) return it->second;
  names_.emplace_back(key);
  const auto id = static_cast<std::uint32_t>(names_.size());
  lookup_.emplace(names_.back(), id);
  return id;
}

std::uint32_t IdIndex::find(std::string_view key) const {
  auto it = lookup_.find(std::string(key));
  return it == lookup_.end() ? 0 : it->second;
}

RawRecord parse_record(std::string_view line, const ParseOptions& options) {
  if (options.delimiter.empty()) throw Error("empty delimiter");
  auto fields = split(trim(line), options.delimiter);
  if (fields.size() != 3 && fields.size() != 4) {
    throw Error("expected 3 or 4 fields, got " + std::to_string(fields.size()));
  }
  for (auto& f : fields) f = trim(f);
  RawRecord rec;
  rec.user = std::string(fields[0]);
  rec.item = std::string(fields[1]);
  if (rec.user.empty() || rec.item.empty()) throw Error("empty user or item id");
  const auto ts = fields.back();
  const auto* end = ts.data() + ts.size();
  auto [ptr, ec] = std::from_chars(ts.data(), end, rec.timestamp);
  if (ec != std::errc() || ptr != end) {
    throw Error("timestamp is not an integer: '" + std::string(ts) + "'");
  }
  return rec;
}

std::vector<RawRecord> read_records(std::istream& in, const ParseOptions& options) {
  std::vector<RawRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (!options.comment_prefix.empty() && body.starts_with(options.comment_prefix)) continue;
    try {
      out.push_back(parse_record(body, options));
    } catch (const Error& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

InteractionLog ingest(std::span<const RawRecord> records) {
  // Dedup on external ids first so the dense maps only see survivors.
  std::unordered_map<std::string, std::size_t> keep;  // "user\0item" -> record index
  keep.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::string key = records[i].user;
    key.push_back('\0');
    key += records[i].item;
    auto [it, inserted] = keep.emplace(std::move(key), i);
    if (!inserted && records[i].timestamp < records[it->second].timestamp) it->second = i;
  }
  std::vector<std::size_t> survivors;
  survivors.reserve(keep.size());
  for (const auto& kv : keep) survivors.push_back(kv.second);
  std::sort(survivors.begin(), survivors.end());

  InteractionLog log;
  log.interactions.reserve(survivors.size());
  for (auto i : survivors) {
    const auto& r = records[i];
    log.interactions.push_back({log.users.intern(r.user), log.items.intern(r.item), r.timestamp});
  }
  return log;
}

InteractionLog five_core_filter(const InteractionLog& log, std::size_t min_count) {
  std::vector<char> alive(log.interactions.size(), 1);
  std::vector<std::size_t> ucount(log.num_users() + 1), icount(log.num_items() + 1);
  bool changed = true;
  while (changed) {
    changed = false;
    std::fill(ucount.begin(), ucount.end(), 0);
    std::fill(icount.begin(), icount.end(), 0);
    for (std::size_t i = 0; i < alive.size(); ++i) {
      if (!alive[i]) continue;
      ++ucount[log.interactions[i].user];
      ++icount[log.interactions[i].item];
    }
    for (std::size_t i = 0; i < alive.size(); ++i) {
      if (!alive[i]) continue;
      const auto& x = log.interactions[i];
      if (ucount[x.user] < min_count || icount[x.item] < min_count) {
        alive[i] = 0;
        changed = true;
      }
    }
  }

  // Recompact in old dense-id order so relative order is preserved.
  std::vector<char> user_alive(log.num_users() + 1, 0), item_alive(log.num_items() + 1, 0);
  for (std::size_t i = 0; i < alive.size(); ++i) {
    if (!alive[i]) continue;
    user_alive[log.interactions[i].user] = 1;
    item_alive[log.interactions[i].item] = 1;
  }
  InteractionLog out;
  std::vector<UserId> user_map(log.num_users() + 1, 0);
  std::vector<ItemId> item_map(log.num_items() + 1, 0);
  for (UserId u = 1; u <= log.num_users(); ++u) {
    if (user_alive[u]) user_map[u] = out.users.intern(log.users.external(u));
  }
  for (ItemId v = 1; v <= log.num_items(); ++v) {
    if (item_alive[v]) item_map[v] = out.items.intern(log.items.external(v));
  }
  for (std::size_t i = 0; i < alive.size(); ++i) {
    if (!alive[i]) continue;
    const auto& x = log.interactions[i];
    out.interactions.push_back({user_map[x.user], item_map[x.item], x.timestamp});
  }
  return out;
}

std::vector<UserSequence> build_sequences(const InteractionLog& log) {
  std::vector<std::vector<const Interaction*>> per_user(log.num_users() + 1);
  for (const auto& x : log.interactions) per_user[x.user].push_back(&x);
  std::vector<UserSequence> out;
  out.reserve(log.num_users());
  for (UserId u = 1; u <= log.num_users(); ++u) {
    auto& rows = per_user[u];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Interaction* a, const Interaction* b) { return a->timestamp < b->timestamp; });
    UserSequence seq{u, {}};
    seq.items.reserve(rows.size());
    for (const auto* r : rows) seq.items.push_back(r->item);
    if (!seq.items.empty()) out.push_back(std::move(seq));
  }
  return out;
}

SplitDataset leave_one_out_split(std::span<const UserSequence> seqs, std::size_t catalog_size) {
  SplitDataset out;
  out.catalog_size = catalog_size;
  for (const auto& s : seqs) {
    const auto n = s.items.size();
    if (n < 3) {
      ++out.excluded_short;
      continue;
    }
    UserSplit u;
    u.user = s.user;
    u.train.assign(s.items.begin(), s.items.end() - 2);
    u.valid_target = s.items[n - 2];
    u.test_target = s.items[n - 1];
    out.users.push_back(std::move(u));
  }
  return out;
}

PaddedWindow make_window(std::span<const ItemId> items, std::size_t max_len) {
  if (max_len == 0) throw Error("window length must be positive");
  if (items.empty()) throw Error("cannot window an empty sequence");
  const auto keep = std::min(items.size(), max_len);
  PaddedWindow w;
  w.item_ids.assign(max_len, kPaddingId);
  w.true_length = keep;
  std::copy(items.end() - static_cast<std::ptrdiff_t>(keep), items.end(),
            w.item_ids.begin() + static_cast<std::ptrdiff_t>(max_len - keep));
  return w;
}

DatasetStats compute_stats(const InteractionLog& log) {
  DatasetStats s;
  s.users = log.num_users();
  s.items = log.num_items();
  s.actions = log.interactions.size();
  if (s.users > 0) s.avg_length = static_cast<double>(s.actions) / static_cast<double>(s.users);
  if (s.users > 0 && s.items > 0) {
    s.density = static_cast<double>(s.actions) /
                (static_cast<double>(s.users) * static_cast<double>(s.items));
  }
  return s;
}

}  // namespace cl4srec
