#include <doctest.h>

#include "adx/learning.hpp"

using namespace adx;

TEST_CASE("ucb core validates its parameters") {
  CHECK_THROWS_AS(UcbCore(0, 10, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(UcbCore(5, 10, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(UcbCore(5, 10, 1.0), std::invalid_argument);
}

TEST_CASE("unplayed arms have infinite index and are tried first") {
  UcbCore core(3, 0, 0.0);
  core.update(0, 0.9);
  CHECK(core.indexOf(1) == std::numeric_limits<double>::infinity());
  // deterministicSelect prefers the first unplayed arm over the played one.
  int pick = core.deterministicSelect();
  CHECK(pick != 0);
}

TEST_CASE("running means are exact averages") {
  UcbCore core(1, 0, 0.0);
  core.update(0, 1.0);
  core.update(0, 0.0);
  core.update(0, 0.5);
  CHECK(core.mean(0) == doctest::Approx(0.5));
  CHECK(core.count(0) == 3);
  CHECK(core.totalPlays() == 3);
}

TEST_CASE("epsilon-greedy action distribution") {
  // Equal pull counts so the exploration bonuses cancel and the index argmax
  // is unambiguously the high-mean arm.
  UcbCore core(4, 0, 0.2);
  for (int i = 0; i < 20; ++i)
    for (int a = 0; a < 4; ++a) core.update(a, a == 2 ? 1.0 : 0.0);
  std::vector<double> p;
  core.actionProbabilities(p);
  double sum = 0.0;
  for (double x : p) sum += x;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(p[2] == doctest::Approx(0.2 / 4 + 0.8));
  CHECK(p[0] == doctest::Approx(0.05));
}

TEST_CASE("during the exploration schedule the distribution is a point mass") {
  UcbCore core(3, 9, 0.1);
  std::vector<double> p;
  core.actionProbabilities(p);
  CHECK(p[0] == doctest::Approx(1.0));
  core.update(0, 0.0);
  core.actionProbabilities(p);
  CHECK(p[1] == doctest::Approx(1.0));
}

TEST_CASE("q update follows the temporal-difference rule") {
  BoltzmannQ q(2, 2, 0.1, 0.9, 1.0);
  q.q(0, 0) = 0.2;
  q.q(1, 0) = 0.3;  // maxQ(next state) = 0.3
  q.update(0, 0, 0.4, 1);
  // 0.2 + 0.1 * (0.4 + 0.9 * 0.3 - 0.2) = 0.247
  CHECK(q.q(0, 0) == doctest::Approx(0.247));
}

TEST_CASE("q update single-step overwrite and decay") {
  BoltzmannQ q(1, 1, 1.0, 0.0, 1.0);
  q.update(0, 0, 0.5, 0);
  CHECK(q.q(0, 0) == doctest::Approx(0.5));
  q.update(0, 0, 0.0, 0);
  CHECK(q.q(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("q table parameter validation") {
  CHECK_THROWS_AS(BoltzmannQ(0, 2, 0.1, 0.9, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BoltzmannQ(2, 2, 0.0, 0.9, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BoltzmannQ(2, 2, 1.5, 0.9, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BoltzmannQ(2, 2, 0.1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("boltzmann sampling respects the distribution") {
  BoltzmannQ q(1, 2, 0.1, 0.9, 0.1);
  q.q(0, 1) = 1.0;  // action 1 gets nearly all the mass at tau 0.1
  Rng rng(21);
  int ones = 0;
  for (int i = 0; i < 1000; ++i) ones += q.sample(0, rng);
  CHECK(ones > 990);
}

TEST_CASE("argmax and max agree") {
  BoltzmannQ q(1, 5, 0.1, 0.9, 1.0);
  q.q(0, 3) = 2.0;
  q.q(0, 1) = 1.0;
  CHECK(q.argmaxQ(0) == 3);
  CHECK(q.maxQ(0) == doctest::Approx(2.0));
}
