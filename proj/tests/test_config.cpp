#include "doctest.h"

#include "cl4srec/config.hpp"
#include "cl4srec/dataset_io.hpp"

#include <filesystem>
#include <sstream>

#include <unistd.h>

using namespace cl4srec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cl4srec_config_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("materialized config round-trips") {
  ExperimentConfig c;
  c.set("data.dir", "/tmp/x");
  c.set("loss.lambda", "0.5");
  c.set("augment.ops", "crop,reorder");
  c.set("train.mode", "sasrec_aug");
  c.set("eval.ks", "1,5");
  c.set("corpus.delimiter", "::");
  const auto text = c.to_text();
  const auto back = ExperimentConfig::parse(text);
  CHECK(back.to_text() == text);
  CHECK(back.train.loss.lambda == 0.5);
  CHECK(back.train.mode == TrainMode::SASRecAug);
  CHECK(back.eval.ks == std::vector<std::size_t>{1, 5});
  CHECK(back.delimiter == "::");

  for (const auto& k : ExperimentConfig::keys()) CHECK(text.find(k + " = ") != std::string::npos);
  const auto tab = ExperimentConfig::parse(ExperimentConfig{}.to_text());
  CHECK(tab.delimiter == "\t");
}

TEST_CASE("doubles survive the text form exactly") {
  ExperimentConfig c;
  c.train.lr = 0.1 + 0.2;
  c.train.augment.eta = 1.0 / 3.0;
  const auto back = ExperimentConfig::parse(c.to_text());
  CHECK(back.train.lr == c.train.lr);
  CHECK(back.train.augment.eta == c.train.augment.eta);
}

TEST_CASE("parsing rules") {
  const auto c = ExperimentConfig::parse("# comment\n\nencoder.d = 32\n  train.seed=7  \n");
  CHECK(c.encoder.d == 32);
  CHECK(c.train.seed == 7);
  CHECK_THROWS_AS(ExperimentConfig::parse("train.colour = red\n"), Error);
  CHECK_THROWS_AS(ExperimentConfig::parse("no equals sign\n"), Error);
  ExperimentConfig d;
  CHECK_THROWS_AS(d.set("encoder.d", "many"), Error);
  CHECK_THROWS_AS(d.set("train.mode", "bert"), Error);
  CHECK_THROWS_AS(d.set("loss.symmetric_cl", "maybe"), Error);
  CHECK(d.get("encoder.d") == "64");
  CHECK_THROWS_AS(d.get("nope"), Error);
}

TEST_CASE("validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.train.batch_size = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.train.lr = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.encoder.heads = 5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.train.loss.lambda = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.train.mode = TrainMode::SASRecAug;
  c.train.augment.ops.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  for (double lambda : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    c = ExperimentConfig{};
    c.set("loss.lambda", std::to_string(lambda));
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("run names encode dataset, mode, augmentation, rate, lambda and seed") {
  ExperimentConfig c;
  c.dataset_name = "beauty";
  c.set("augment.ops", "crop");
  c.train.augment.eta = 0.6;
  c.train.loss.lambda = 0.1;
  c.train.seed = 3;
  CHECK(c.run_name() == "beauty_cl4srec_crop-0.6_l0.1_s3");
  c.train.mode = TrainMode::SASRec;
  CHECK(c.run_name() == "beauty_sasrec_noaug_l0_s3");
  c.train.mode = TrainMode::CL4SRec;
  c.train.loss.lambda = 2.0;
  c.train.seed = 4;
  CHECK(c.run_name() == "beauty_cl4srec_crop-0.6_l2_s4");
}

TEST_CASE("tiny raw file gives hand-counted statistics") {
  // Users a and b pass a 2-core; c has one item and x, y, z lose support.
  std::istringstream raw(
      "a\tx\t5\t1\na\ty\t4\t2\na\tx\t3\t9\nb\tx\t1\t3\nb\ty\t1\t4\nc\tz\t2\t5\n");
  const auto records = read_records(raw, ParseOptions{});
  const auto data = preprocess(records, 2);
  CHECK(data.stats.users == 2);
  CHECK(data.stats.items == 2);
  CHECK(data.stats.actions == 4);
  CHECK(data.stats.avg_length == doctest::Approx(2.0));
  CHECK(data.stats.density == doctest::Approx(1.0));
  const auto text = format_stats(data.stats);
  CHECK(text.find("users\titems\tactions\tavg_length\tdensity_pct") != std::string::npos);
  CHECK(text.find("2\t2\t4\t2.0\t100.00") != std::string::npos);
}

TEST_CASE("processed datasets round-trip and are written reproducibly") {
  const auto dir = scratch("io");
  std::vector<RawRecord> records;
  for (int u = 0; u < 8; ++u) {
    for (int i = 0; i < 6; ++i) records.push_back({"user" + std::to_string(u), "item" + std::to_string((u + i) % 7), i});
  }
  const auto data = preprocess(records);
  write_processed(data, dir / "a");
  write_processed(data, dir / "b");
  for (const auto* f : {"user_map.tsv", "item_map.tsv", "sequences.txt", "stats.tsv"}) {
    CHECK(read_file(dir / "a" / f) == read_file(dir / "b" / f));
  }
  const auto back = read_processed(dir / "a");
  REQUIRE(back.sequences.size() == data.sequences.size());
  for (std::size_t i = 0; i < back.sequences.size(); ++i) CHECK(back.sequences[i].items == data.sequences[i].items);
  CHECK(back.items.size() == data.items.size());
  CHECK(back.users.external(1) == data.users.external(1));
  CHECK(back.stats.actions == data.stats.actions);

  write_processed(data, dir / "a");
  CHECK_FALSE(fs::exists(dir / "a.partial"));
  CHECK_THROWS_AS(read_processed(dir / "missing"), Error);
  fs::remove_all(dir);
}

TEST_CASE("atomic writes leave no temporary files behind") {
  const auto dir = scratch("atomic");
  write_file_atomic(dir / "out.txt", "one");
  write_file_atomic(dir / "out.txt", "two");
  CHECK(read_file(dir / "out.txt") == "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(write_file_atomic(dir / "no" / "such" / "dir" / "x", "y"), Error);
  fs::remove_all(dir);
}
