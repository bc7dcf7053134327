#pragma once

// Run-directory orchestration shared by the command-line tool and the
// acceptance suite: single training cells, sweeps, ablations and the
// similarity report.

#include "cl4srec/config.hpp"
#include "cl4srec/dataset_io.hpp"
#include "cl4srec/trainer.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace cl4srec {

/// Reads the processed dataset named by `config.dataset_dir` and splits it.
SplitDataset load_split(const ExperimentConfig& config);

struct CellResult {
  std::filesystem::path run_dir;
  EvalReport test;
  FitResult fit;
};

/// Trains one configuration into `out_root / config.run_name()`, writing the
/// materialized config, logs, checkpoints and the test report (from the
/// best-validation parameters).
CellResult run_cell(const ExperimentConfig& config, const SplitDataset& data, const std::filesystem::path& out_root,
                    bool resume = false, std::function<void(const EpochRecord&)> on_epoch = {});

/// Evaluates the best checkpoint of a finished run directory.
EvalReport evaluate_run(const std::filesystem::path& run_dir, Phase phase);

enum class SweepAxis { Proportion, Lambda };
SweepAxis parse_sweep_axis(const std::string& name);
std::vector<double> default_sweep_values(SweepAxis axis);

/// One cell per value; a failed cell is recorded with its error and the
/// sweep continues. Returns the CSV text.
std::string run_sweep(const ExperimentConfig& base, const SplitDataset& data, SweepAxis axis,
                      const std::vector<double>& values, const std::filesystem::path& out_root);

struct AblationRow {
  std::string aug;
  std::string method;
  EvalReport test;
};

/// SASRec, SASRec_aug and CL4SRec with shared seed and hyperparameters.
std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const SplitDataset& data,
                                      const std::filesystem::path& out_root);
std::string ablation_csv(const std::vector<AblationRow>& rows);

/// Final-slot representations (test-phase history) for every user.
std::map<UserId, RowVec<float>> user_representations(const EncoderParams<float>& params, const EncoderHyper& hyper,
                                                     const SplitDataset& data);

}  // namespace cl4srec
