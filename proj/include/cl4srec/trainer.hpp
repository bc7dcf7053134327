#pragma once

// Multi-task training loop: per-timestep sampled-softmax loss over the
// training window, optional contrastive loss over two augmented views,
// Adam with linear learning-rate decay, early stopping on validation
// NDCG@10 and epoch-boundary checkpoints.

#include "cl4srec/checkpoint.hpp"
#include "cl4srec/config.hpp"
#include "cl4srec/corpus.hpp"
#include "cl4srec/evaluator.hpp"
#include "cl4srec/objective.hpp"
#include "cl4srec/optimizer.hpp"

#include <filesystem>
#include <functional>
#include <limits>
#include <optional>

namespace cl4srec {

struct BatchStats {
  double main_loss = 0.0;
  double cl_loss = 0.0;
  double total_loss = 0.0;
  double lr = 0.0;
  std::size_t main_targets = 0;
  std::size_t cl_users = 0;
  /// Users whose training sequence was too short for two views.
  std::size_t cl_skipped = 0;
  /// Fewer than two users produced views, so the contrastive term is 0.
  bool cl_no_negatives = false;
  std::size_t augmented_forwards = 0;
  bool applied = true;
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double main_loss = 0.0;
  double cl_loss = 0.0;
  double total_loss = 0.0;
  std::size_t aborted_steps = 0;
  std::vector<BatchStats> batches;
};

class Trainer {
 public:
  Trainer(const SplitDataset& data, const EncoderHyper& hyper, const TrainConfig& config);

  /// One optimizer step over `users` (indices into data.users).
  BatchStats train_batch(std::span<const std::size_t> users);
  /// Shuffles users and runs every batch once.
  EpochStats train_epoch();

  /// max_epochs * batches per epoch; the horizon of the linear decay.
  std::int64_t planned_steps() const;
  double current_lr() const;

  const EncoderHyper& hyper() const { return hyper_; }
  const TrainConfig& config() const { return config_; }
  const EncoderParams<float>& params() const { return params_; }
  EncoderParams<float>& mutable_params() { return params_; }
  const OptimizerState<float>& optimizer() const { return optimizer_; }
  int epochs_done() const { return epochs_done_; }

  Checkpoint checkpoint() const;
  /// Restores parameters, optimizer, RNG and epoch counter.
  void restore(const Checkpoint& ckpt);

 private:
  const SplitDataset& data_;
  EncoderHyper hyper_;
  TrainConfig config_;
  EncoderParams<float> params_;
  OptimizerState<float> optimizer_;
  Rng rng_;
  int epochs_done_ = 0;
};

/// Patience counts consecutive non-improving epochs; training stops once
/// that count exceeds `patience`.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  /// Returns true when `metric` improves on the best so far.
  bool update(int epoch, double metric);
  bool should_stop() const { return bad_epochs_ > patience_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }

  nlohmann::json to_json() const;
  void from_json(const nlohmann::json& j);

 private:
  int patience_;
  double best_ = -std::numeric_limits<double>::infinity();
  int best_epoch_ = -1;
  int bad_epochs_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double main_loss = 0.0;
  double cl_loss = 0.0;
  double valid_hr10 = 0.0;
  double valid_ndcg10 = 0.0;
  double elapsed_s = 0.0;

  nlohmann::json to_json() const;
  static EpochRecord from_json(const nlohmann::json& j);
};

struct FitOptions {
  /// When set, ckpt_best / ckpt_last / train_log.jsonl are written here.
  std::optional<std::filesystem::path> run_dir;
  /// Continue from run_dir/ckpt_last if it exists.
  bool resume = false;
  /// Stop after this many epochs in this call (for resume tests); 0 = no cap.
  int epoch_budget = 0;
  bool filter_seen = true;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct FitResult {
  std::vector<EpochRecord> log;
  int best_epoch = -1;
  double best_valid_ndcg10 = 0.0;
  bool early_stopped = false;
  EncoderParams<float> best_params;
};

FitResult fit(Trainer& trainer, const SplitDataset& data, const FitOptions& options = {});

}  // namespace cl4srec
