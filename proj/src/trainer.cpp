#include "cl4srec/trainer.hpp"

#include "cl4srec/augment.hpp"
#include "cl4srec/dataset_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace cl4srec {

Trainer::Trainer(const SplitDataset& data, const EncoderHyper& hyper, const TrainConfig& config)
    : data_(data), hyper_(hyper), config_(config), rng_(config.seed) {
  hyper_.num_items = data.catalog_size;
  hyper_.validate();
  config_.validate();
  if (data.users.empty()) throw Error("trainer: empty dataset");
  params_ = init_params<float>(hyper_, rng_);
  optimizer_ = OptimizerState<float>::zeros(hyper_);
}

std::int64_t Trainer::planned_steps() const {
  const auto per_epoch = (data_.users.size() + config_.batch_size - 1) / config_.batch_size;
  return static_cast<std::int64_t>(per_epoch) * config_.max_epochs;
}

double Trainer::current_lr() const {
  return linear_decay(config_.lr, optimizer_.step, planned_steps(), config_.lr_floor);
}

BatchStats Trainer::train_batch(std::span<const std::size_t> users) {
  BatchStats stats;
  const auto ops = config_.augment.to_ops();
  const auto mask_id = hyper_.mask_id();
  const auto max_len = static_cast<std::size_t>(hyper_.max_len);
  const bool contrastive = config_.mode == TrainMode::CL4SRec && config_.loss.lambda > 0.0 && !ops.empty();
  const bool augment_main = config_.mode == TrainMode::SASRecAug && !ops.empty();

  // Next-item task over every non-padded slot of the training window.
  std::vector<SequenceStates<float>> main_states;
  std::vector<PredictionTarget> targets;
  main_states.reserve(users.size());
  for (auto idx : users) {
    const auto& u = data_.users.at(idx);
    std::vector<ItemId> seq = u.train;
    if (augment_main) {
      const auto& op = ops[std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng_)];
      auto aug = apply(op, seq, mask_id, rng_);
      ++stats.augmented_forwards;
      if (aug.size() >= 2) seq = std::move(aug);
    }
    if (seq.size() < 2) continue;
    const auto input = std::span<const ItemId>(seq).first(seq.size() - 1);
    auto window = make_window(input, max_len);
    const auto w = main_states.size();
    main_states.push_back(forward(window, params_, hyper_, Mode::Train, &rng_));

    std::unordered_set<ItemId> seen;
    if (config_.loss.filter_history) seen.insert(u.train.begin(), u.train.end());
    const auto keep = window.true_length;
    const auto pad = window.pad();
    for (std::size_t j = 0; j < keep; ++j) {
      const ItemId next = seq[seq.size() - keep + j];
      if (next == mask_id) continue;
      PredictionTarget tg;
      tg.window = w;
      tg.slot = static_cast<Eigen::Index>(pad + j);
      tg.positive = next;
      tg.negatives = sample_negatives(next, config_.loss.negatives_k, data_.catalog_size, rng_,
                                      config_.loss.filter_history ? &seen : nullptr);
      targets.push_back(std::move(tg));
    }
  }

  auto grads = EncoderParams<float>::zeros(hyper_);
  grads.set_zero();
  std::vector<Mat<float>> d_main(main_states.size());
  for (std::size_t i = 0; i < main_states.size(); ++i) {
    d_main[i] = Mat<float>::Zero(main_states[i].output.rows(), main_states[i].output.cols());
  }
  if (!targets.empty()) {
    std::vector<const Mat<float>*> outs;
    for (const auto& s : main_states) outs.push_back(&s.output);
    stats.main_loss = main_loss<float>(outs, targets, params_.item_emb, &d_main, &grads.item_emb);
  }
  stats.main_targets = targets.size();

  // Contrastive task over two augmented views per user.
  std::vector<SequenceStates<float>> views;
  Mat<float> d_reprs;
  if (contrastive) {
    for (auto idx : users) {
      const auto& u = data_.users.at(idx);
      auto pair = sample_pair(u.train, ops, mask_id, rng_, u.user);
      if (!pair) {
        ++stats.cl_skipped;
        continue;
      }
      views.push_back(forward(make_window(pair->view_i, max_len), params_, hyper_, Mode::Train, &rng_));
      views.push_back(forward(make_window(pair->view_j, max_len), params_, hyper_, Mode::Train, &rng_));
      stats.augmented_forwards += 2;
    }
    Mat<float> reprs(static_cast<Eigen::Index>(views.size()), hyper_.d);
    for (std::size_t i = 0; i < views.size(); ++i) reprs.row(static_cast<Eigen::Index>(i)) = views[i].representation();
    stats.cl_users = views.size() / 2;
    stats.cl_no_negatives = stats.cl_users < 2;
    stats.cl_loss = contrastive_loss<float>(reprs, {config_.loss.symmetric_cl}, &d_reprs);
  }
  const double lambda = config_.mode == TrainMode::CL4SRec ? config_.loss.lambda : 0.0;
  stats.total_loss = total_loss(stats.main_loss, stats.cl_loss, lambda);

  for (std::size_t i = 0; i < main_states.size(); ++i) backward(main_states[i], d_main[i], params_, hyper_, grads);
  if (contrastive && !stats.cl_no_negatives) {
    for (std::size_t i = 0; i < views.size(); ++i) {
      Mat<float> d_out = Mat<float>::Zero(views[i].output.rows(), views[i].output.cols());
      d_out.row(d_out.rows() - 1) = static_cast<float>(lambda) * d_reprs.row(static_cast<Eigen::Index>(i));
      backward(views[i], d_out, params_, hyper_, grads);
    }
  }

  stats.lr = current_lr();
  AdamConfig adam{config_.adam_beta1, config_.adam_beta2, config_.adam_epsilon};
  stats.applied = adam_step(params_, grads, optimizer_, stats.lr, adam);
  return stats;
}

EpochStats Trainer::train_epoch() {
  EpochStats ep;
  ep.epoch = epochs_done_ + 1;
  ep.lr = current_lr();
  std::vector<std::size_t> order(data_.users.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const auto n = std::min(config_.batch_size, order.size() - start);
    auto b = train_batch(std::span<const std::size_t>(order).subspan(start, n));
    if (!b.applied) ++ep.aborted_steps;
    ep.main_loss += b.main_loss;
    ep.cl_loss += b.cl_loss;
    ep.total_loss += b.total_loss;
    ep.batches.push_back(b);
  }
  const auto nb = static_cast<double>(ep.batches.size());
  ep.main_loss /= nb;
  ep.cl_loss /= nb;
  ep.total_loss /= nb;
  ++epochs_done_;
  return ep;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  ck.hyper = hyper_;
  ck.params = params_;
  ck.optimizer = optimizer_;
  ck.rng_state = rng_to_string(rng_);
  ck.meta["epoch"] = epochs_done_;
  return ck;
}

void Trainer::restore(const Checkpoint& ck) {
  const auto a = hyper_to_json(ck.hyper), b = hyper_to_json(hyper_);
  if (a != b) throw Error("checkpoint hyperparameters do not match the trainer");
  params_ = ck.params;
  optimizer_ = ck.optimizer;
  rng_ = rng_from_string(ck.rng_state);
  epochs_done_ = ck.meta.value("epoch", 0);
}

bool EarlyStopping::update(int epoch, double metric) {
  if (metric > best_) {
    best_ = metric;
    best_epoch_ = epoch;
    bad_epochs_ = 0;
    return true;
  }
  ++bad_epochs_;
  return false;
}

nlohmann::json EarlyStopping::to_json() const {
  return {{"best", best_epoch_ < 0 ? 0.0 : best_}, {"best_epoch", best_epoch_}, {"bad_epochs", bad_epochs_}};
}

void EarlyStopping::from_json(const nlohmann::json& j) {
  best_epoch_ = j.at("best_epoch");
  best_ = best_epoch_ < 0 ? -std::numeric_limits<double>::infinity() : j.at("best").get<double>();
  bad_epochs_ = j.at("bad_epochs");
}

nlohmann::json EpochRecord::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["lr"] = lr;
  j["main_loss"] = main_loss;
  j["cl_loss"] = cl_loss;
  j["valid_hr10"] = valid_hr10;
  j["valid_ndcg10"] = valid_ndcg10;
  j["elapsed_s"] = elapsed_s;
  return j;
}

EpochRecord EpochRecord::from_json(const nlohmann::json& j) {
  EpochRecord r;
  r.epoch = j.at("epoch");
  r.lr = j.at("lr");
  r.main_loss = j.at("main_loss");
  r.cl_loss = j.at("cl_loss");
  r.valid_hr10 = j.at("valid_hr10");
  r.valid_ndcg10 = j.at("valid_ndcg10");
  r.elapsed_s = j.at("elapsed_s");
  return r;
}

namespace {

std::vector<EpochRecord> read_log(const std::filesystem::path& path, int up_to_epoch) {
  std::vector<EpochRecord> out;
  if (!std::filesystem::exists(path)) return out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = EpochRecord::from_json(nlohmann::json::parse(line));
    if (r.epoch <= up_to_epoch) out.push_back(r);
  }
  return out;
}

void write_log(const std::filesystem::path& path, const std::vector<EpochRecord>& log) {
  std::string text;
  for (const auto& r : log) text += r.to_json().dump() + "\n";
  write_file_atomic(path, text);
}

}  // namespace

FitResult fit(Trainer& trainer, const SplitDataset& data, const FitOptions& options) {
  const auto& cfg = trainer.config();
  EarlyStopping stopper(cfg.patience);
  FitResult result;
  result.best_params = trainer.params();

  namespace fs = std::filesystem;
  if (options.run_dir) fs::create_directories(*options.run_dir);
  if (options.run_dir && options.resume && fs::exists(*options.run_dir / "ckpt_last")) {
    const auto ck = load_checkpoint(*options.run_dir / "ckpt_last");
    trainer.restore(ck);
    stopper.from_json(ck.meta.at("early_stopping"));
    result.log = read_log(*options.run_dir / "train_log.jsonl", trainer.epochs_done());
    if (fs::exists(*options.run_dir / "ckpt_best")) {
      result.best_params = load_checkpoint(*options.run_dir / "ckpt_best").params;
    }
  }

  EvalOptions eval_opts;
  eval_opts.ks = {10};
  eval_opts.filter_seen = options.filter_seen;
  int ran = 0;
  while (trainer.epochs_done() < cfg.max_epochs && !stopper.should_stop() &&
         (options.epoch_budget == 0 || ran < options.epoch_budget)) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ep = trainer.train_epoch();
    EncoderScorer scorer(trainer.params(), trainer.hyper());
    const auto valid = evaluate(scorer, data, Phase::Valid, eval_opts);

    EpochRecord rec;
    rec.epoch = ep.epoch;
    rec.lr = ep.lr;
    rec.main_loss = ep.main_loss;
    rec.cl_loss = ep.cl_loss;
    rec.valid_hr10 = valid.hr.at(10);
    rec.valid_ndcg10 = valid.ndcg.at(10);
    rec.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(rec);

    const bool improved = stopper.update(ep.epoch, rec.valid_ndcg10);
    if (improved) result.best_params = trainer.params();
    if (options.run_dir) {
      auto ck = trainer.checkpoint();
      ck.meta["early_stopping"] = stopper.to_json();
      if (improved) save_checkpoint(ck, *options.run_dir / "ckpt_best");
      save_checkpoint(ck, *options.run_dir / "ckpt_last");
      write_log(*options.run_dir / "train_log.jsonl", result.log);
    }
    if (options.on_epoch) options.on_epoch(rec);
    ++ran;
  }
  result.best_epoch = stopper.best_epoch();
  result.best_valid_ndcg10 = stopper.best_epoch() < 0 ? 0.0 : stopper.best();
  result.early_stopped = stopper.should_stop();
  return result;
}

}  // namespace cl4srec
