#include "doctest.h"

#include "cl4srec/baselines.hpp"

using namespace cl4srec;

TEST_CASE("popularity counts come from the training split only") {
  SplitDataset split;
  split.catalog_size = 4;
  split.users.push_back({1, {1, 1, 2}, 3, 3});
  split.users.push_back({2, {1, 4}, 3, 3});
  const auto pop = PopModel::fit(split);
  CHECK(pop.counts() == std::vector<double>{0, 3, 1, 0, 1});
}

TEST_CASE("popular item ranks first for every user") {
  SplitDataset split;
  split.catalog_size = 2;
  for (UserId u = 1; u <= 10; ++u) split.users.push_back({u, {1}, 1, 1});
  for (UserId u = 11; u <= 13; ++u) split.users.push_back({u, {2}, 1, 1});
  const auto pop = PopModel::fit(split);
  const auto r = evaluate(pop, split, Phase::Test, {{1}, false});
  CHECK(r.hr.at(1) == 1.0);
}

TEST_CASE("scores are user-independent and ties are pessimistic") {
  SplitDataset split;
  split.catalog_size = 3;
  split.users.push_back({1, {1, 2}, 3, 1});
  split.users.push_back({2, {3}, 2, 2});
  const auto pop = PopModel::fit(split);
  std::vector<double> a(4), b(4);
  pop.score(split.users[0], Phase::Test, a);
  pop.score(split.users[1], Phase::Valid, b);
  CHECK(a == b);
  // Items 1, 2 and 3 each have one count: a three-way tie puts the target last.
  const auto r = evaluate(pop, split, Phase::Test, {{1, 3}, false});
  for (const auto& [u, rank] : r.ranks) CHECK(rank == 3);
  std::vector<double> wrong(2);
  CHECK_THROWS_AS(pop.score(split.users[0], Phase::Test, wrong), Error);
}

TEST_CASE("adding an interaction never lowers an item's position") {
  SplitDataset split;
  split.catalog_size = 5;
  split.users.push_back({1, {1, 2, 2, 3, 3, 3}, 4, 5});
  const auto before = PopModel::fit(split);
  split.users[0].train.push_back(2);
  const auto after = PopModel::fit(split);
  std::vector<double> s0(6), s1(6);
  before.score(split.users[0], Phase::Test, s0);
  after.score(split.users[0], Phase::Test, s1);
  CHECK(rank_target(s1, 2, {}) <= rank_target(s0, 2, {}));
}
