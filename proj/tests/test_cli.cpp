#include "doctest.h"

#include "cl4srec/dataset_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using cl4srec::read_file;
using cl4srec::write_file_atomic;

namespace {

struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / ("cl4srec_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    // A small clustered log and a config that trains in about a second.
    REQUIRE(run("generate --out " + str(root / "raw.tsv") + " --users 150 --items 80 --clusters 8 --seed 3") == 0);
    REQUIRE(run("preprocess --raw " + str(root / "raw.tsv") + " --out " + str(root / "data")) == 0);
    write_file_atomic(root / "base.cfg",
                      "data.dir = " + (root / "data").string() +
                          "\ndata.name = tiny\ncorpus.max_len = 8\nencoder.d = 8\nencoder.d_ff = 8\n"
                          "encoder.layers = 1\ntrain.batch_size = 64\ntrain.epochs = 1\naugment.ops = crop\n");
  }
  ~Workspace() { fs::remove_all(root); }

  static std::string str(const fs::path& p) { return "'" + p.string() + "'"; }

  int run(const std::string& args, const std::string& log = "last.log") const {
    const auto cmd = std::string(CL4SREC_CLI_PATH) + " " + args + " > " + str(root / log) + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string output(const std::string& log = "last.log") const { return read_file(root / log); }
  std::string cfg() const { return "--config " + str(root / "base.cfg"); }
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("command surface") {
  Workspace w;

  SUBCASE("preprocess is idempotent") {
    REQUIRE(w.run("preprocess --raw " + w.str(w.root / "raw.tsv") + " --out " + w.str(w.root / "again")) == 0);
    for (const auto* f : {"user_map.tsv", "item_map.tsv", "sequences.txt", "stats.tsv"}) {
      CHECK(read_file(w.root / "data" / f) == read_file(w.root / "again" / f));
    }
    CHECK(w.output().find("users\titems\tactions") != std::string::npos);
  }

  SUBCASE("preprocess errors") {
    CHECK(w.run("preprocess --raw " + w.str(w.root / "nope.tsv") + " --out " + w.str(w.root / "x")) != 0);
    CHECK(w.output().find("error:") != std::string::npos);
    write_file_atomic(w.root / "sparse.tsv", "u1\ti1\t1\nu2\ti2\t2\n");
    CHECK(w.run("preprocess --raw " + w.str(w.root / "sparse.tsv") + " --out " + w.str(w.root / "y")) != 0);
    CHECK_FALSE(fs::exists(w.root / "y"));
  }

  SUBCASE("train reports missing data and bad config before training") {
    CHECK(w.run("train --set data.dir=" + w.str(w.root / "missing") + " --out " + w.str(w.root / "runs")) != 0);
    CHECK(w.output().find("error:") != std::string::npos);
    CHECK(w.run("train " + w.cfg() + " --set encoder.heads=3 --out " + w.str(w.root / "runs")) != 0);
    CHECK(w.run("train " + w.cfg() + " --set train.nonsense=1 --out " + w.str(w.root / "runs")) != 0);
    CHECK_FALSE(fs::exists(w.root / "runs"));
  }

  SUBCASE("train writes a self-describing run and a rerun from its config reproduces it") {
    REQUIRE(w.run("train " + w.cfg() + " --seed 5 --out " + w.str(w.root / "runs")) == 0);
    const auto run_dir = w.root / "runs" / "tiny_cl4srec_crop-0.6_l0.1_s5";
    REQUIRE(fs::exists(run_dir / "config.txt"));
    CHECK(w.output().find("train.seed = 5") != std::string::npos);
    for (const auto* f : {"ckpt_best", "ckpt_last", "train_log.jsonl", "eval_test.json", "eval_test.csv"}) {
      CHECK(fs::exists(run_dir / f));
    }
    REQUIRE(w.run("train --config " + w.str(run_dir / "config.txt") + " --out " + w.str(w.root / "rerun")) == 0);
    const auto rerun_dir = w.root / "rerun" / run_dir.filename();
    CHECK(read_file(run_dir / "ckpt_best") == read_file(rerun_dir / "ckpt_best"));
    CHECK(read_file(run_dir / "eval_test.csv") == read_file(rerun_dir / "eval_test.csv"));

    REQUIRE(w.run("evaluate --run " + w.str(run_dir)) == 0);
    CHECK(w.output().find(read_file(run_dir / "eval_test.csv").substr(0, 10)) != std::string::npos);
    CHECK(w.run("evaluate --run " + w.str(run_dir) + " --phase valid --out " + w.str(w.root / "valid.json")) == 0);
    CHECK(fs::exists(w.root / "valid.json"));
  }

  SUBCASE("resuming a finished run leaves it unchanged") {
    REQUIRE(w.run("train " + w.cfg() + " --set train.epochs=2 --out " + w.str(w.root / "full")) == 0);
    REQUIRE(w.run("train " + w.cfg() + " --set train.epochs=2 --out " + w.str(w.root / "part")) == 0);
    REQUIRE(w.run("train " + w.cfg() + " --set train.epochs=2 --resume --out " + w.str(w.root / "part")) == 0);
    const auto name = "tiny_cl4srec_crop-0.6_l0.1_s42";
    CHECK(read_file(w.root / "full" / name / "ckpt_last") == read_file(w.root / "part" / name / "ckpt_last"));
    CHECK(count_lines(read_file(w.root / "part" / name / "train_log.jsonl")) == 2);
  }

  SUBCASE("popularity baseline") {
    REQUIRE(w.run("evaluate --pop " + w.cfg()) == 0);
    CHECK(w.output().find("HR@5,HR@10,HR@20,NDCG@5,NDCG@10,NDCG@20") != std::string::npos);
    CHECK(w.run("evaluate " + w.cfg()) != 0);
  }

  SUBCASE("sweeps emit one row per value") {
    REQUIRE(w.run("sweep " + w.cfg() + " --axis lambda --out " + w.str(w.root / "sl")) == 0);
    const auto lambda_csv = read_file(w.root / "sl" / "sweep_lambda.csv");
    CHECK(count_lines(lambda_csv) == 1 + 5);
    CHECK(lambda_csv.rfind("lambda,status,HR@5", 0) == 0);
    CHECK(lambda_csv.find("\n4,ok,") != std::string::npos);

    REQUIRE(w.run("sweep " + w.cfg() + " --set train.epochs=1 --axis proportion --out " + w.str(w.root / "sp")) == 0);
    const auto prop_csv = read_file(w.root / "sp" / "sweep_proportion.csv");
    CHECK(count_lines(prop_csv) == 1 + 9);
    for (const auto* v : {"\n0.1,ok,", "\n0.5,ok,", "\n0.9,ok,"}) CHECK(prop_csv.find(v) != std::string::npos);

    CHECK(w.run("sweep " + w.cfg() + " --axis depth --out " + w.str(w.root / "sx")) != 0);
  }

  SUBCASE("a single-value sweep equals train then evaluate") {
    REQUIRE(w.run("sweep " + w.cfg() + " --axis lambda --values 0.5 --out " + w.str(w.root / "one")) == 0);
    const auto csv = read_file(w.root / "one" / "sweep_lambda.csv");
    REQUIRE(w.run("train " + w.cfg() + " --set loss.lambda=0.5 --out " + w.str(w.root / "single")) == 0);
    const auto row = read_file(w.root / "single" / "tiny_cl4srec_crop-0.6_l0.5_s42" / "eval_test.csv");
    const auto metrics = row.substr(row.find('\n') + 1, row.size() - row.find('\n') - 2);
    CHECK(csv.find("0.5,ok," + metrics + ",") != std::string::npos);
  }

  SUBCASE("ablation has three rows and a repeated SASRec row is identical") {
    REQUIRE(w.run("ablate " + w.cfg() + " --out " + w.str(w.root / "ab1")) == 0);
    REQUIRE(w.run("ablate " + w.cfg() + " --out " + w.str(w.root / "ab2")) == 0);
    const auto a = read_file(w.root / "ab1" / "ablation.csv"), b = read_file(w.root / "ab2" / "ablation.csv");
    CHECK(count_lines(a) == 4);
    CHECK(a.rfind("aug,method,HR@20,NDCG@20\nnone,SASRec,", 0) == 0);
    CHECK(a.find("crop,SASRec_aug,") != std::string::npos);
    CHECK(a.find("crop,CL4SRec,") != std::string::npos);
    CHECK(a == b);
  }

  SUBCASE("similarity report") {
    REQUIRE(w.run("train " + w.cfg() + " --out " + w.str(w.root / "runs")) == 0);
    const auto run_dir = w.root / "runs" / "tiny_cl4srec_crop-0.6_l0.1_s42";
    const auto users = read_file(w.root / "data" / "user_map.tsv");
    std::istringstream in(users);
    std::string dense, a, b;
    in >> dense >> a >> dense >> b;

    write_file_atomic(w.root / "self.txt", a + " " + a + "\n" + b + " " + b + "\n");
    REQUIRE(w.run("simreport --run " + w.str(run_dir) + " --pairs " + w.str(w.root / "self.txt") + " --out " +
                  w.str(w.root / "self.csv")) == 0);
    const auto self = read_file(w.root / "self.csv");
    CHECK(self.find("0.95,1.00,2\n") != std::string::npos);
    CHECK(self.find("# pairs,2") != std::string::npos);

    write_file_atomic(w.root / "empty.txt", "");
    REQUIRE(w.run("simreport --run " + w.str(run_dir) + " --pairs " + w.str(w.root / "empty.txt") + " --out " +
                  w.str(w.root / "empty.csv")) == 0);
    CHECK(read_file(w.root / "empty.csv").find("# mean,undefined") != std::string::npos);

    write_file_atomic(w.root / "unknown.txt", a + " nobody\n");
    REQUIRE(w.run("simreport --run " + w.str(run_dir) + " --pairs " + w.str(w.root / "unknown.txt") + " --out " +
                  w.str(w.root / "unknown.csv")) == 0);
    CHECK(read_file(w.root / "unknown.csv").find("# skipped,1") != std::string::npos);

    CHECK(w.run("simreport --run " + w.str(run_dir) + " --pairs " + w.str(w.root / "absent.txt") + " --out " +
                w.str(w.root / "absent.csv")) != 0);
    CHECK_FALSE(fs::exists(w.root / "absent.csv"));
  }
}
