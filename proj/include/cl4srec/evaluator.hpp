#pragma once

// Full-catalog leave-one-out ranking evaluation (HR@k, NDCG@k) and the
// pairwise cosine-similarity report over user representations.

#include "cl4srec/corpus.hpp"
#include "cl4srec/encoder.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cl4srec {

enum class Phase { Valid, Test };

std::string to_string(Phase phase);

/// Items the model may condition on when predicting the target of `phase`.
std::vector<ItemId> history(const UserSplit& user, Phase phase);
ItemId target(const UserSplit& user, Phase phase);

/// Produces one score per catalog item; `out` has |V|+1 entries and index 0
/// is ignored.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual void score(const UserSplit& user, Phase phase, std::span<double> out) const = 0;
};

/// Scores s_u . E[v] with s_u the final-slot representation in eval mode.
class EncoderScorer : public Scorer {
 public:
  EncoderScorer(const EncoderParams<float>& params, const EncoderHyper& hyper);
  void score(const UserSplit& user, Phase phase, std::span<double> out) const override;
  RowVec<float> representation(std::span<const ItemId> items) const;

 private:
  const EncoderParams<float>& params_;
  EncoderHyper hyper_;
};

/// 1 + number of candidates (every item other than the target that is not
/// in `seen`) whose score is >= the target's. Ties count against the target.
std::size_t rank_target(std::span<const double> scores, ItemId target, std::span<const ItemId> seen);

double hr_at_k(std::size_t rank, std::size_t k);
double ndcg_at_k(std::size_t rank, std::size_t k);

struct EvalOptions {
  std::vector<std::size_t> ks{5, 10, 20};
  /// Remove the user's earlier-phase items from the candidate set.
  bool filter_seen = true;
};

struct EvalReport {
  std::vector<std::size_t> ks;
  std::map<std::size_t, double> hr;
  std::map<std::size_t, double> ndcg;
  std::vector<std::pair<UserId, std::size_t>> ranks;
  std::size_t users = 0;
  std::string fingerprint;
  Phase phase = Phase::Test;

  std::string to_json() const;
  /// HR@k for every k, then NDCG@k for every k.
  std::string csv_header() const;
  std::string csv_row() const;
};

EvalReport evaluate(const Scorer& scorer, const SplitDataset& split, Phase phase, const EvalOptions& options = {});

double cosine(std::span<const float> u, std::span<const float> v);

struct SimilarityReport {
  static constexpr double kBinWidth = 0.05;
  static constexpr std::size_t kBins = 40;  // [-1, 1]

  std::optional<double> mean;
  std::size_t pairs = 0;
  std::size_t skipped = 0;
  std::vector<std::size_t> bins = std::vector<std::size_t>(kBins, 0);

  static double bin_lower(std::size_t bin) { return -1.0 + kBinWidth * static_cast<double>(bin); }
  static std::size_t bin_of(double cosine);
  std::string to_csv() const;
};

/// Pairs naming a user without a representation (or with a zero vector)
/// are skipped and counted.
SimilarityReport cosine_similarity_report(const std::map<UserId, RowVec<float>>& reprs,
                                          std::span<const std::pair<UserId, UserId>> pairs);

}  // namespace cl4srec
