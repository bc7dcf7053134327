#pragma once

#include "cl4srec/evaluator.hpp"

namespace cl4srec {

/// Non-personalized popularity ranking from training-split counts.
class PopModel : public Scorer {
 public:
  static PopModel fit(const SplitDataset& split);

  /// Same vector for every user; index 0 unused.
  const std::vector<double>& counts() const { return counts_; }
  void score(const UserSplit& user, Phase phase, std::span<double> out) const override;

 private:
  std::vector<double> counts_;
};

}  // namespace cl4srec
