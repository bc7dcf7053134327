#pragma once

// Flat `section.key = value` experiment configuration. Every key has a
// default; unknown keys are rejected; to_text() writes the fully
// materialized configuration in a fixed key order.

#include "cl4srec/augment.hpp"
#include "cl4srec/encoder.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cl4srec {

enum class TrainMode { CL4SRec, SASRec, SASRecAug };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& name);

struct AugmentConfig {
  std::vector<AugmentKind> ops{AugmentKind::Crop, AugmentKind::Mask, AugmentKind::Reorder};
  double eta = 0.6;
  double gamma = 0.3;
  double beta = 0.6;

  std::vector<AugmentOp> to_ops() const;
};

struct LossConfig {
  double lambda = 0.1;
  std::size_t negatives_k = 1;
  bool symmetric_cl = true;
  bool filter_history = false;
};

struct TrainConfig {
  TrainMode mode = TrainMode::CL4SRec;
  std::size_t batch_size = 256;
  double lr = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Linear decay never goes below lr * lr_floor.
  double lr_floor = 0.1;
  int max_epochs = 50;
  int patience = 10;
  std::uint64_t seed = 42;
  AugmentConfig augment;
  LossConfig loss;

  void validate() const;
};

struct EvalConfig {
  std::vector<std::size_t> ks{5, 10, 20};
  bool filter_seen = true;
};

struct ExperimentConfig {
  std::string dataset_dir;
  std::string dataset_name = "dataset";
  std::string delimiter = "\t";
  std::size_t min_count = 5;
  EncoderHyper encoder;
  TrainConfig train;
  EvalConfig eval;

  ExperimentConfig();

  /// Applies `key = value`; throws Error on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  void validate() const;
  std::string to_text() const;

  /// Parses text, starting from defaults.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Self-describing run directory name.
  std::string run_name() const;
};

}  // namespace cl4srec
