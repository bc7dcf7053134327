#include "cl4srec/baselines.hpp"

#include <algorithm>

namespace cl4srec {

PopModel PopModel::fit(const SplitDataset& split) {
  PopModel m;
  m.counts_.assign(split.catalog_size + 1, 0.0);
  for (const auto& u : split.users) {
    for (auto v : u.train) m.counts_.at(v) += 1.0;
  }
  return m;
}

void PopModel::score(const UserSplit&, Phase, std::span<double> out) const {
  if (out.size() != counts_.size()) throw Error("pop: output size mismatch");
  std::copy(counts_.begin(), counts_.end(), out.begin());
}

}  // namespace cl4srec
