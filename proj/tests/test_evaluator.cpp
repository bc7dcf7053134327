#include "doctest.h"

#include "oracles.hpp"

#include "cl4srec/evaluator.hpp"

#include "json.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <set>

using namespace cl4srec;

namespace {

class FixedScorer : public Scorer {
 public:
  explicit FixedScorer(std::function<void(const UserSplit&, Phase, std::span<double>)> f) : f_(std::move(f)) {}
  void score(const UserSplit& u, Phase p, std::span<double> out) const override { f_(u, p, out); }

 private:
  std::function<void(const UserSplit&, Phase, std::span<double>)> f_;
};

SplitDataset random_split(std::size_t users, std::size_t catalog, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<ItemId> item(1, static_cast<ItemId>(catalog));
  SplitDataset s;
  s.catalog_size = catalog;
  for (std::size_t u = 0; u < users; ++u) {
    UserSplit x;
    x.user = static_cast<UserId>(u + 1);
    for (int i = 0; i < 4; ++i) x.train.push_back(item(rng));
    x.valid_target = item(rng);
    x.test_target = item(rng);
    s.users.push_back(x);
  }
  return s;
}

void check_monotone(const EvalReport& r) {
  CHECK(r.hr.at(5) <= r.hr.at(10));
  CHECK(r.hr.at(10) <= r.hr.at(20));
  CHECK(r.ndcg.at(5) <= r.ndcg.at(10));
  CHECK(r.ndcg.at(10) <= r.ndcg.at(20));
}

}  // namespace

TEST_CASE("rank basics") {
  const std::vector<double> s = {0, 0.1, 0.9, 0.5, 0.2};
  CHECK(rank_target(s, 2, {}) == 1);
  CHECK(rank_target(s, 1, {}) == 4);
  const std::vector<ItemId> seen = {2, 3};
  CHECK(rank_target(s, 1, seen) == 2);
  const std::vector<double> flat(7, 1.0);
  CHECK(rank_target(flat, 3, {}) == 6);
  CHECK_THROWS_AS(rank_target(s, 0, {}), Error);
  CHECK_THROWS_AS(rank_target(s, 9, {}), Error);

  const std::vector<double> six = {0, 0.3, 0.7, 0.3, 0.1, 0.9, 0.3};
  for (ItemId t = 1; t <= 6; ++t) CHECK(rank_target(six, t, {}) == oracle::rank_by_sort(six, t, {}));
}

TEST_CASE("rank matches the full-sort oracle on 1000 random instances") {
  Rng rng(1);
  std::uniform_int_distribution<int> coarse(0, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> scores(101);
    // Coarse scores force frequent ties.
    for (auto& x : scores) x = coarse(rng) / 4.0;
    const auto target = std::uniform_int_distribution<ItemId>(1, 100)(rng);
    std::set<ItemId> seen;
    for (int i = 0; i < 10; ++i) seen.insert(std::uniform_int_distribution<ItemId>(1, 100)(rng));
    const std::vector<ItemId> seen_vec(seen.begin(), seen.end());
    CHECK(rank_target(scores, target, seen_vec) == oracle::rank_by_sort(scores, target, seen));
  }
}

TEST_CASE("score shift leaves ranks unchanged") {
  Rng rng(2);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(51), shifted(51);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = std::round(n(rng) * 8) / 8;
      shifted[i] = s[i] + 3.0;
    }
    const auto t = std::uniform_int_distribution<ItemId>(1, 50)(rng);
    CHECK(rank_target(s, t, {}) == rank_target(shifted, t, {}));
  }
}

TEST_CASE("hit ratio and NDCG") {
  CHECK(hr_at_k(1, 5) == 1.0);
  CHECK(ndcg_at_k(1, 5) == 1.0);
  CHECK(hr_at_k(7, 5) == 0.0);
  CHECK(ndcg_at_k(7, 5) == 0.0);
  CHECK(ndcg_at_k(3, 10) == 0.5);
  CHECK(hr_at_k(5, 5) == 1.0);
}

TEST_CASE("phase histories") {
  const UserSplit u{1, {4, 5, 6}, 7, 8};
  CHECK(history(u, Phase::Valid) == std::vector<ItemId>{4, 5, 6});
  CHECK(history(u, Phase::Test) == std::vector<ItemId>{4, 5, 6, 7});
  CHECK(target(u, Phase::Valid) == 7);
  CHECK(target(u, Phase::Test) == 8);
}

TEST_CASE("perfect scorer scores one everywhere") {
  const auto split = random_split(50, 30, 3);
  FixedScorer perfect([](const UserSplit& u, Phase p, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[target(u, p)] = 1.0;
  });
  for (auto phase : {Phase::Valid, Phase::Test}) {
    const auto r = evaluate(perfect, split, phase);
    for (auto k : r.ks) {
      CHECK(r.hr.at(k) == 1.0);
      CHECK(r.ndcg.at(k) == 1.0);
    }
  }
}

TEST_CASE("filtering removes history items from the candidate set") {
  SplitDataset split;
  split.catalog_size = 6;
  split.users.push_back({1, {1, 2}, 3, 4});
  FixedScorer favours_history([](const UserSplit&, Phase, std::span<double> out) {
    const double s[] = {0, 9, 8, 7, 1, 0.5, 0.2};
    std::copy(std::begin(s), std::end(s), out.begin());
  });
  CHECK(evaluate(favours_history, split, Phase::Test, {{5, 10, 20}, true}).ranks[0].second == 1);
  CHECK(evaluate(favours_history, split, Phase::Test, {{5, 10, 20}, false}).ranks[0].second == 4);
  CHECK(evaluate(favours_history, split, Phase::Valid, {{5, 10, 20}, true}).ranks[0].second == 1);
}

TEST_CASE("random scorer hits about k/m") {
  const std::size_t m = 100, users = 20000;
  const auto split = random_split(users, m, 4);
  Rng rng(5);
  FixedScorer random_scores([&rng](const UserSplit&, Phase, std::span<double> out) {
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& x : out) x = u(rng);
  });
  const auto r = evaluate(random_scores, split, Phase::Test, {{5, 10, 20}, false});
  for (std::size_t k : {5u, 10u, 20u}) {
    const double p = static_cast<double>(k) / static_cast<double>(m);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(users));
    CHECK(std::abs(r.hr.at(k) - p) < 3 * sigma);
  }
  check_monotone(r);
}

TEST_CASE("reports serialize in table order") {
  const auto split = random_split(20, 40, 6);
  Rng rng(7);
  FixedScorer random_scores([&rng](const UserSplit&, Phase, std::span<double> out) {
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& x : out) x = u(rng);
  });
  const auto r = evaluate(random_scores, split, Phase::Test);
  check_monotone(r);
  CHECK(r.csv_header() == "HR@5,HR@10,HR@20,NDCG@5,NDCG@10,NDCG@20");
  const auto row = r.csv_row();
  CHECK(std::count(row.begin(), row.end(), ',') == 5);
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("users") == 20);
}

TEST_CASE("cosine and histogram bins") {
  const std::vector<float> a = {1, 0}, b = {0, 2}, c = {-3, 0}, z = {0, 0};
  CHECK(cosine(a, a) == doctest::Approx(1.0));
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(a, c) == doctest::Approx(-1.0));
  CHECK(std::isnan(cosine(a, z)));
  CHECK(SimilarityReport::bin_of(1.0) == 39);
  CHECK(SimilarityReport::bin_of(0.95) == 39);
  CHECK(SimilarityReport::bin_of(0.0) == 20);
  CHECK(SimilarityReport::bin_of(-1.0) == 0);
  CHECK(SimilarityReport::bin_of(0.049) == 20);
}

TEST_CASE("similarity report over hand-set pairs") {
  std::map<UserId, RowVec<float>> reprs;
  auto vec = [](float x, float y) {
    RowVec<float> v(2);
    v << x, y;
    return v;
  };
  reprs[1] = vec(1, 0);
  reprs[2] = vec(1, 1);
  reprs[3] = vec(0, 1);
  reprs[4] = vec(0, 0);
  const std::vector<std::pair<UserId, UserId>> pairs = {{1, 2}, {1, 3}, {2, 2}, {1, 4}, {1, 99}};
  const auto r = cosine_similarity_report(reprs, pairs);
  CHECK(r.pairs == 3);
  CHECK(r.skipped == 2);
  // cos = 0.7071 -> bin 34, 0 -> bin 20, 1 -> bin 39
  CHECK(r.bins[34] == 1);
  CHECK(r.bins[20] == 1);
  CHECK(r.bins[39] == 1);
  REQUIRE(r.mean);
  CHECK(*r.mean == doctest::Approx((std::sqrt(0.5) + 0 + 1) / 3).epsilon(1e-6));

  const auto empty = cosine_similarity_report(reprs, {});
  CHECK_FALSE(empty.mean);
  CHECK(empty.to_csv().find("undefined") != std::string::npos);
}
