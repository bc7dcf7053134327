// cl4srec: preprocess, train, evaluate, sweep, ablate and simreport.

#include "cl4srec/baselines.hpp"
#include "cl4srec/experiment.hpp"
#include "cl4srec/synthetic.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cl4srec;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool need_out) {
  cmd->add_option("--config", c.config_path, "Experiment config (key = value lines)");
  cmd->add_option("--set", c.overrides, "Override a config key: section.key=value");
  cmd->add_option("--seed", c.seed, "Override train.seed");
  auto* out = cmd->add_option("--out", c.out, "Output path");
  if (need_out) out->required();
}

ExperimentConfig resolve(const Common& c) {
  auto cfg = c.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.train.seed = *c.seed;
  cfg.validate();
  return cfg;
}

void print_epoch(const EpochRecord& r) { std::cout << r.to_json().dump() << std::endl; }

std::vector<std::pair<UserId, UserId>> read_pairs(const fs::path& path, const IdIndex& users, std::size_t& unknown) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<UserId, UserId>> pairs;
  std::string a, b;
  unknown = 0;
  while (in >> a >> b) {
    const auto ua = users.find(a), ub = users.find(b);
    // Unknown ids map to 0, which the report skips and counts.
    if (!ua || !ub) ++unknown;
    pairs.emplace_back(ua, ub);
  }
  return pairs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive sequential recommendation laboratory"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic raw interaction log");
  std::string gen_kind = "clustered", gen_out;
  SyntheticConfig syn;
  std::size_t planted_len = 8;
  gen->add_option("--kind", gen_kind, "clustered | planted")->check(CLI::IsMember({"clustered", "planted"}));
  gen->add_option("--out", gen_out, "Raw TSV path")->required();
  gen->add_option("--users", syn.users);
  gen->add_option("--items", syn.items);
  gen->add_option("--clusters", syn.clusters);
  gen->add_option("--min-len", syn.min_len);
  gen->add_option("--max-len", syn.max_len);
  gen->add_option("--p-follow", syn.p_follow);
  gen->add_option("--p-home", syn.p_home);
  gen->add_option("--planted-length", planted_len);
  gen->add_option("--seed", syn.seed);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Binarize, deduplicate, 5-core filter and split a raw log");
  Common pre_c;
  std::string raw_path, delimiter;
  add_common(pre, pre_c, true);
  pre->add_option("--raw", raw_path, "Raw delimiter-separated log")->required();
  pre->add_option("--delimiter", delimiter, "Field delimiter (default: corpus.delimiter)");

  // train
  auto* train = app.add_subcommand("train", "Train one configuration");
  Common train_c;
  bool resume = false;
  add_common(train, train_c, true);
  train->add_flag("--resume", resume, "Continue from ckpt_last of the run directory");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Evaluate a run directory or the Pop baseline");
  Common ev_c;
  std::string ev_run, ev_phase = "test";
  bool ev_pop = false;
  add_common(ev, ev_c, false);
  ev->add_option("--run", ev_run, "Run directory (uses ckpt_best)");
  ev->add_flag("--pop", ev_pop, "Evaluate the popularity baseline on the config's dataset");
  ev->add_option("--phase", ev_phase)->check(CLI::IsMember({"valid", "test"}));

  // sweep
  auto* sw = app.add_subcommand("sweep", "Train one run per value of an axis and tabulate test metrics");
  Common sw_c;
  std::string axis;
  std::vector<double> values;
  add_common(sw, sw_c, true);
  sw->add_option("--axis", axis, "proportion | lambda")->required();
  sw->add_option("--values", values, "Values (default: the axis' standard grid)");

  // ablate
  auto* ab = app.add_subcommand("ablate", "SASRec vs SASRec_aug vs CL4SRec");
  Common ab_c;
  add_common(ab, ab_c, true);

  // simreport
  auto* sim = app.add_subcommand("simreport", "Cosine similarity histogram over user pairs");
  Common sim_c;
  std::string sim_run, pairs_path;
  add_common(sim, sim_c, true);
  sim->add_option("--run", sim_run, "Run directory")->required();
  sim->add_option("--pairs", pairs_path, "Two-column file of external user ids")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto records = gen_kind == "planted" ? generate_planted(syn.users, syn.items, planted_len, syn.seed)
                                                 : generate_clustered(syn);
      std::ostringstream os;
      write_raw(os, records);
      if (fs::path(gen_out).has_parent_path()) fs::create_directories(fs::path(gen_out).parent_path());
      write_file_atomic(gen_out, os.str());
      std::cout << "wrote " << records.size() << " records to " << gen_out << '\n';
    } else if (pre->parsed()) {
      const auto cfg = resolve(pre_c);
      ParseOptions popts;
      popts.delimiter = delimiter.empty() ? cfg.delimiter : delimiter;
      std::ifstream in(raw_path);
      if (!in) throw Error("cannot read " + raw_path);
      const auto records = read_records(in, popts);
      const auto data = preprocess(records, cfg.min_count);
      if (data.sequences.empty()) throw Error("no interactions survive filtering");
      write_processed(data, pre_c.out);
      const auto split = leave_one_out_split(data.sequences, data.items.size());
      std::cout << format_stats(data.stats);
      if (split.excluded_short) std::cout << "excluded_short\t" << split.excluded_short << '\n';
    } else if (train->parsed()) {
      const auto cfg = resolve(train_c);
      const auto data = load_split(cfg);
      std::cout << cfg.to_text() << std::flush;
      const auto res = run_cell(cfg, data, train_c.out, resume, print_epoch);
      std::cout << "run_dir\t" << res.run_dir.string() << '\n'
                << res.test.csv_header() << '\n'
                << res.test.csv_row() << '\n';
    } else if (ev->parsed()) {
      const auto phase = ev_phase == "valid" ? Phase::Valid : Phase::Test;
      EvalReport report;
      if (ev_pop) {
        const auto cfg = resolve(ev_c);
        const auto data = load_split(cfg);
        report = evaluate(PopModel::fit(data), data, phase, {cfg.eval.ks, cfg.eval.filter_seen});
        report.fingerprint = cfg.dataset_name + "_pop";
      } else {
        if (ev_run.empty()) throw Error("evaluate needs --run or --pop");
        report = evaluate_run(ev_run, phase);
      }
      if (!ev_c.out.empty()) write_file_atomic(ev_c.out, report.to_json());
      std::cout << report.csv_header() << '\n' << report.csv_row() << '\n';
    } else if (sw->parsed()) {
      const auto cfg = resolve(sw_c);
      const auto ax = parse_sweep_axis(axis);
      const auto data = load_split(cfg);
      if (values.empty()) values = default_sweep_values(ax);
      fs::create_directories(sw_c.out);
      const auto csv = run_sweep(cfg, data, ax, values, sw_c.out);
      write_file_atomic(fs::path(sw_c.out) / ("sweep_" + axis + ".csv"), csv);
      std::cout << csv;
    } else if (ab->parsed()) {
      const auto cfg = resolve(ab_c);
      const auto data = load_split(cfg);
      fs::create_directories(ab_c.out);
      const auto csv = ablation_csv(run_ablation(cfg, data, ab_c.out));
      write_file_atomic(fs::path(ab_c.out) / "ablation.csv", csv);
      std::cout << csv;
    } else if (sim->parsed()) {
      if (!fs::exists(pairs_path)) throw Error("pair list not found: " + pairs_path);
      const auto cfg = ExperimentConfig::load(fs::path(sim_run) / "config.txt");
      const auto ck = load_checkpoint(fs::path(sim_run) / "ckpt_best");
      const auto processed = read_processed(cfg.dataset_dir);
      const auto split = leave_one_out_split(processed.sequences, processed.items.size());
      std::size_t unknown = 0;
      const auto pairs = read_pairs(pairs_path, processed.users, unknown);
      const auto report = cosine_similarity_report(user_representations(ck.params, ck.hyper, split), pairs);
      write_file_atomic(sim_c.out, report.to_csv());
      std::cout << report.to_csv();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
