#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "adx/distributions.hpp"
#include "adx/game.hpp"
#include "adx/learning.hpp"
#include "adx/price.hpp"

namespace adx {

// Coarse action grid shared by the learning agents (101 arms, step 0.01).
inline constexpr int kCoarseArms = 101;

inline Price armToPrice(int arm, const PriceGrid& grid, int arms = kCoarseArms) {
  return grid.snapNearest(static_cast<double>(arm) / (arms - 1));
}

class GreedyAdvertiser : public Advertiser {
 public:
  explicit GreedyAdvertiser(Price vmax) : vmax_(vmax) {}
  Price bid(const GameState&, Rng&) override { return vmax_; }
  std::string name() const override { return "greedy"; }
  Price vmax() const { return vmax_; }

 private:
  Price vmax_;
};

class RandomAdvertiser : public Advertiser {
 public:
  explicit RandomAdvertiser(BidDistribution dist) : dist_(std::move(dist)) {}
  Price bid(const GameState&, Rng& rng) override { return dist_.sample(rng); }
  std::string name() const override { return dist_.name(); }
  const BidDistribution& distribution() const { return dist_; }

 private:
  BidDistribution dist_;
};

// Learn Then Bid: opt out (bid 0) for the first m rounds while recording the
// posted prices, then bid a constant price balancing campaign reach and
// budget for the remaining n - m rounds.
class LtbAdvertiser : public Advertiser {
 public:
  LtbAdvertiser(const PriceGrid& grid, int m, double f, int totalRounds,
                double totalBudget)
      : grid_(grid), m_(m), f_(f), n_(totalRounds), totalBudget_(totalBudget) {
    if (m < 1 || m >= totalRounds) throw std::invalid_argument("need 1 <= m < n");
    if (!(f > 0.0) || !(f < 1.0)) throw std::invalid_argument("need 0 < f < 1");
    observed_.reserve(m);
  }

  Price bid(const GameState&, Rng&) override {
    if (static_cast<int>(observed_.size()) < m_) return Price{0};
    if (!learned_) {
      learnedPrice_ = computeLearnedPrice();
      learned_ = true;
    }
    return learnedPrice_;
  }

  void observe(const RoundOutcome& outcome, Rng&) override {
    // Posted prices are visible whether or not the round sold.
    if (static_cast<int>(observed_.size()) < m_)
      observed_.push_back(outcome.reserve.index);
  }

  std::string name() const override { return "ltb"; }

  bool learningDone() const { return static_cast<int>(observed_.size()) >= m_; }
  int explorationRounds() const { return m_; }

  // Constant bid after the learning phase; valid once m prices were observed.
  Price learnedPrice() const {
    if (!learningDone()) throw std::logic_error("learning phase not finished");
    if (!learned_) {
      learnedPrice_ = computeLearnedPrice();
      learned_ = true;
    }
    return learnedPrice_;
  }

  // Empirical tail over the m observed prices: fraction >= z.
  double empiricalTail(Price z) const {
    if (observed_.empty()) return 0.0;
    int cnt = 0;
    for (int p : observed_)
      if (p >= z.index) ++cnt;
    return static_cast<double>(cnt) / observed_.size();
  }

 private:
  Price computeLearnedPrice() const {
    double target = f_ * n_ / (n_ - m_);
    int maxObserved = *std::max_element(observed_.begin(), observed_.end());
    if (target > 1.0) return Price{maxObserved};  // reach target infeasible

    // Reach price: largest observed price whose empirical tail meets the
    // target win fraction.
    int reach = 0;
    for (int p : observed_)
      if (p > reach && empiricalTail(Price{p}) >= target) reach = p;

    // Budget price: largest grid price whose projected spend fits the total
    // budget.
    int budgetPrice = 0;
    for (int z = grid_.resolution(); z >= 0; --z) {
      double spend = grid_.value(Price{z}) * (n_ - m_) * empiricalTail(Price{z});
      if (spend <= totalBudget_) { budgetPrice = z; break; }
    }
    return Price{std::min(reach, budgetPrice)};
  }

  PriceGrid grid_;
  int m_;
  double f_;
  int n_;
  double totalBudget_;
  std::vector<int> observed_;
  mutable bool learned_ = false;
  mutable Price learnedPrice_{0};
};

class UcbAdvertiser : public Advertiser {
 public:
  UcbAdvertiser(const PriceGrid& grid, int explorationRounds, double epsilon,
                int arms = kCoarseArms)
      : grid_(grid), core_(arms, explorationRounds, epsilon) {}

  Price bid(const GameState&, Rng& rng) override {
    lastArm_ = core_.select(rng);
    return armToPrice(lastArm_, grid_, core_.arms());
  }

  void observe(const RoundOutcome& outcome, Rng&) override {
    core_.update(lastArm_, grid_.currency(outcome.advertiserPayoff));
  }

  std::string name() const override { return "ucb"; }
  const UcbCore& core() const { return core_; }

 private:
  PriceGrid grid_;
  UcbCore core_;
  int lastArm_ = 0;
};

class QLearnAdvertiser : public Advertiser {
 public:
  QLearnAdvertiser(const PriceGrid& grid, double alpha, double gamma, double tau,
                   Money dailyBudget, int budgetBuckets = 10, int arms = kCoarseArms)
      : grid_(grid), dailyBudget_(dailyBudget), buckets_(budgetBuckets),
        q_(budgetBuckets, arms, alpha, gamma, tau) {}

  Price bid(const GameState& state, Rng& rng) override {
    lastState_ = bucketOf(state.budget);
    lastArm_ = q_.sample(lastState_, rng);
    return armToPrice(lastArm_, grid_, q_.actions());
  }

  void observe(const RoundOutcome& outcome, Rng&) override {
    int s2 = bucketOf(outcome.budgetAfter);
    q_.update(lastState_, lastArm_, grid_.currency(outcome.advertiserPayoff), s2);
  }

  std::string name() const override { return "qlearn"; }

  int bucketOf(Money budget) const {
    if (dailyBudget_ <= 0) return 0;
    auto b = static_cast<int>(budget * buckets_ / dailyBudget_);
    return std::clamp(b, 0, buckets_ - 1);
  }

  const BoltzmannQ& table() const { return q_; }
  BoltzmannQ& table() { return q_; }
  int currentBucket(const GameState& state) const { return bucketOf(state.budget); }

 private:
  PriceGrid grid_;
  Money dailyBudget_;
  int buckets_;
  BoltzmannQ q_;
  int lastState_ = 0;
  int lastArm_ = 0;
};

}  // namespace adx
