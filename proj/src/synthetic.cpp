#include "cl4srec/synthetic.hpp"

namespace cl4srec {

std::vector<RawRecord> generate_clustered(const SyntheticConfig& c) {
  if (c.clusters == 0 || c.items < c.clusters) throw Error("synthetic: need at least one item per cluster");
  if (c.min_len == 0 || c.max_len < c.min_len) throw Error("synthetic: bad length range");
  Rng rng(c.seed);
  const auto per_cluster = c.items / c.clusters;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_item(0, c.items - 1);
  std::uniform_int_distribution<std::size_t> in_cluster(0, per_cluster - 1);
  std::uniform_int_distribution<std::size_t> cluster_of(0, c.clusters - 1);
  std::uniform_int_distribution<std::size_t> length(c.min_len, c.max_len);

  std::vector<RawRecord> out;
  for (std::size_t u = 0; u < c.users; ++u) {
    const auto home = cluster_of(rng);
    const auto len = length(rng);
    std::size_t item = home * per_cluster + in_cluster(rng);
    const auto user = "u" + std::to_string(u);
    for (std::size_t t = 0; t < len; ++t) {
      if (t > 0) {
        const double r = coin(rng);
        if (r < c.p_follow) {
          const auto base = item / per_cluster * per_cluster;
          item = base + (item - base + 1) % per_cluster;
        } else if (r < c.p_follow + c.p_home) {
          item = home * per_cluster + in_cluster(rng);
        } else {
          item = any_item(rng);
        }
      }
      out.push_back({user, "i" + std::to_string(item), static_cast<std::int64_t>(t)});
    }
  }
  return out;
}

std::vector<RawRecord> generate_planted(std::size_t users, std::size_t fillers, std::size_t length,
                                        std::uint64_t seed, const std::string& planted) {
  if (length < 5) throw Error("synthetic: planted sequences need at least five items");
  if (fillers < length) throw Error("synthetic: not enough filler items");
  Rng rng(seed);
  std::vector<RawRecord> out;
  std::vector<std::size_t> pool(fillers);
  for (std::size_t u = 0; u < users; ++u) {
    const auto user = "u" + std::to_string(u);
    for (std::size_t i = 0; i < fillers; ++i) pool[i] = i;
    // Planted slot lies inside the training prefix and is never first.
    const auto slot = std::uniform_int_distribution<std::size_t>(1, length - 3)(rng);
    std::size_t next_filler = 0;
    for (std::size_t t = 0; t < length; ++t) {
      if (t == slot) {
        out.push_back({user, planted, static_cast<std::int64_t>(t)});
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick(next_filler, fillers - 1);
      std::swap(pool[next_filler], pool[pick(rng)]);
      out.push_back({user, "f" + std::to_string(pool[next_filler]), static_cast<std::int64_t>(t)});
      ++next_filler;
    }
  }
  return out;
}

void write_raw(std::ostream& out, std::span<const RawRecord> records) {
  for (const auto& r : records) out << r.user << '\t' << r.item << "\t1\t" << r.timestamp << '\n';
}

}  // namespace cl4srec
