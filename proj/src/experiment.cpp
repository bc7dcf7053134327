#include "cl4srec/experiment.hpp"

#include <sstream>

namespace cl4srec {

namespace fs = std::filesystem;

SplitDataset load_split(const ExperimentConfig& config) {
  if (config.dataset_dir.empty()) throw Error("data.dir is not set");
  const auto data = read_processed(config.dataset_dir);
  return leave_one_out_split(data.sequences, data.items.size());
}

CellResult run_cell(const ExperimentConfig& config, const SplitDataset& data, const fs::path& out_root,
                    bool resume, std::function<void(const EpochRecord&)> on_epoch) {
  config.validate();
  CellResult res;
  res.run_dir = out_root / config.run_name();
  fs::create_directories(res.run_dir);
  write_file_atomic(res.run_dir / "config.txt", config.to_text());

  Trainer trainer(data, config.encoder, config.train);
  FitOptions opts;
  opts.run_dir = res.run_dir;
  opts.resume = resume;
  opts.filter_seen = config.eval.filter_seen;
  opts.on_epoch = std::move(on_epoch);
  res.fit = fit(trainer, data, opts);

  EncoderScorer scorer(res.fit.best_params, trainer.hyper());
  EvalOptions eval_opts{config.eval.ks, config.eval.filter_seen};
  res.test = evaluate(scorer, data, Phase::Test, eval_opts);
  res.test.fingerprint = config.run_name();
  write_file_atomic(res.run_dir / "eval_test.json", res.test.to_json());
  write_file_atomic(res.run_dir / "eval_test.csv", res.test.csv_header() + "\n" + res.test.csv_row() + "\n");
  return res;
}

EvalReport evaluate_run(const fs::path& run_dir, Phase phase) {
  const auto config = ExperimentConfig::load(run_dir / "config.txt");
  const auto data = load_split(config);
  const auto ck = load_checkpoint(run_dir / "ckpt_best");
  EncoderScorer scorer(ck.params, ck.hyper);
  auto report = evaluate(scorer, data, phase, {config.eval.ks, config.eval.filter_seen});
  report.fingerprint = config.run_name();
  return report;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "proportion") return SweepAxis::Proportion;
  if (name == "lambda") return SweepAxis::Lambda;
  throw Error("unknown sweep axis '" + name + "' (expected proportion or lambda)");
}

std::vector<double> default_sweep_values(SweepAxis axis) {
  if (axis == SweepAxis::Lambda) return {0.1, 0.5, 1.0, 2.0, 4.0};
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

std::string run_sweep(const ExperimentConfig& base, const SplitDataset& data, SweepAxis axis,
                      const std::vector<double>& values, const fs::path& out_root) {
  const auto ks = base.eval.ks;
  std::ostringstream csv;
  csv << (axis == SweepAxis::Lambda ? "lambda" : "proportion") << ",status";
  EvalReport header;
  header.ks = ks;
  csv << ',' << header.csv_header() << ",run_dir\n";
  for (double v : values) {
    auto cfg = base;
    if (axis == SweepAxis::Lambda) {
      cfg.train.loss.lambda = v;
    } else {
      cfg.train.augment.eta = cfg.train.augment.gamma = cfg.train.augment.beta = v;
    }
    csv << v;
    try {
      const auto res = run_cell(cfg, data, out_root);
      csv << ",ok," << res.test.csv_row() << ',' << res.run_dir.string() << '\n';
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (auto& c : msg) {
        if (c == ',' || c == '\n') c = ' ';
      }
      csv << ",error: " << msg;
      for (std::size_t i = 0; i < 2 * ks.size() + 1; ++i) csv << ',';
      csv << '\n';
    }
  }
  return csv.str();
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const SplitDataset& data, const fs::path& out_root) {
  std::string aug;
  for (auto k : base.train.augment.ops) aug += (aug.empty() ? "" : "+") + to_string(k);
  std::vector<AblationRow> rows;
  for (auto mode : {TrainMode::SASRec, TrainMode::SASRecAug, TrainMode::CL4SRec}) {
    auto cfg = base;
    cfg.train.mode = mode;
    const auto res = run_cell(cfg, data, out_root);
    const std::string name = mode == TrainMode::SASRec ? "SASRec" : mode == TrainMode::SASRecAug ? "SASRec_aug" : "CL4SRec";
    rows.push_back({mode == TrainMode::SASRec ? "none" : aug, name, res.test});
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "aug,method,HR@20,NDCG@20\n";
  os.precision(6);
  os << std::fixed;
  for (const auto& r : rows) os << r.aug << ',' << r.method << ',' << r.test.hr.at(20) << ',' << r.test.ndcg.at(20) << '\n';
  return os.str();
}

std::map<UserId, RowVec<float>> user_representations(const EncoderParams<float>& params, const EncoderHyper& hyper,
                                                     const SplitDataset& data) {
  EncoderScorer scorer(params, hyper);
  std::map<UserId, RowVec<float>> out;
  for (const auto& u : data.users) out.emplace(u.user, scorer.representation(history(u, Phase::Test)));
  return out;
}

}  // namespace cl4srec
