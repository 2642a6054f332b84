#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "adx/advertisers.hpp"
#include "adx/distributions.hpp"
#include "adx/game.hpp"
#include "adx/learning.hpp"
#include "adx/price.hpp"

namespace adx {

class FixedReservePublisher : public Publisher {
 public:
  explicit FixedReservePublisher(Price r, std::string name = "fixed")
      : reserve_(r), name_(std::move(name)) {}
  Price reserve(Rng&) override { return reserve_; }
  std::string name() const override { return name_; }

 private:
  Price reserve_;
  std::string name_;
};

// Brute-force revenue argmax over the grid for a known bid tail; ties break
// toward the lower price.
inline Price argmax_revenue(const PriceGrid& grid, const std::vector<double>& tail) {
  int best = 0;
  double bestRev = -1.0;
  for (int r = 0; r < grid.size(); ++r) {
    double rev = grid.value(Price{r}) * tail[r];
    if (rev > bestRev) { bestRev = rev; best = r; }
  }
  return Price{best};
}

// Clairvoyant per-round benchmark: posts min(bid, remaining budget) snapped
// down to the grid. Denominator of every competitive ratio.
class OnlineOptPublisher : public Publisher, public BidOracle {
 public:
  explicit OnlineOptPublisher(const PriceGrid& grid) : grid_(grid) {}

  void revealBid(Price bid, const GameState& state) override {
    Money cap = std::min<Money>(state.budget, grid_.resolution());
    next_ = Price{static_cast<int>(std::min<Money>(bid.index, cap))};
  }

  Price reserve(Rng&) override { return next_; }
  std::string name() const override { return "online-opt"; }

 private:
  PriceGrid grid_;
  Price next_{0};
};

// Best response with a-priori knowledge of the advertiser's true type,
// parameters and (for stateful types) live internal state. Constructed by
// the harness only; learning publishers can never build one.
class OfflineOptPublisher : public Publisher, public StateOracle {
 public:
  static OfflineOptPublisher forGreedy(const PriceGrid& grid, const GreedyAdvertiser& adv) {
    OfflineOptPublisher p(grid);
    p.fixed_ = adv.vmax();
    return p;
  }

  static OfflineOptPublisher forRandom(const PriceGrid& grid, const RandomAdvertiser& adv) {
    OfflineOptPublisher p(grid);
    p.fixed_ = argmax_revenue(grid, adv.distribution().tailGrid());
    return p;
  }

  // A bandit bidder's response to a constant reserve depends on its own
  // exploration schedule, so the best constant is found by simulating the
  // episode against a fresh copy of the advertiser for every candidate.
  static OfflineOptPublisher forUcb(const PriceGrid& grid, const UcbAdvertiser& adv,
                                    const EpisodeConfig& cfg) {
    OfflineOptPublisher p(grid);
    Money bestRev = -1;
    for (int arm = 0; arm < kCoarseArms; ++arm) {
      Price r = armToPrice(arm, grid);
      Money rev = 0;
      for (std::uint64_t s = 0; s < 3; ++s) {
        UcbAdvertiser probe(grid, adv.core().explorationRounds(), adv.core().epsilon());
        FixedReservePublisher fixed(r);
        rev += run_episode(probe, fixed, cfg, mixSeed(0x5eedu, s)).publisherRevenue();
      }
      if (rev > bestRev) { bestRev = rev; p.fixed_ = r; }
    }
    return p;
  }

  // Opt-out rounds earn nothing for anyone; afterwards the advertiser bids a
  // known constant, and matching it sells every remaining round at the
  // highest price the advertiser will pay.
  static OfflineOptPublisher forLtb(const PriceGrid& grid, const LtbAdvertiser& adv) {
    OfflineOptPublisher p(grid);
    p.ltb_ = &adv;
    p.fixed_ = Price{grid.resolution()};
    return p;
  }

  // Re-derived every round from the advertiser's live Boltzmann distribution.
  static OfflineOptPublisher forQLearn(const PriceGrid& grid, const QLearnAdvertiser& adv) {
    OfflineOptPublisher p(grid);
    p.qlearn_ = &adv;
    return p;
  }

  void revealState(const GameState& state) override { state_ = state; }

  Price reserve(Rng&) override {
    if (ltb_) {
      if (!ltb_->learningDone()) return Price{grid_.resolution()};
      return ltb_->learnedPrice();
    }
    if (qlearn_) return qlearnBestResponse();
    return fixed_;
  }

  std::string name() const override { return "offline-opt"; }

 private:
  explicit OfflineOptPublisher(const PriceGrid& grid) : grid_(grid) {}

  Price qlearnBestResponse() const {
    int s = qlearn_->currentBucket(state_);
    std::vector<double> pmf;
    qlearn_->table().actionProbabilities(s, pmf);
    int arms = qlearn_->table().actions();
    // r* = argmax over the action grid of r * P(bid >= r).
    double tail = 0.0;
    double bestRev = -1.0;
    int best = 0;
    for (int a = arms - 1; a >= 0; --a) {
      tail += pmf[a];
      Price r = armToPrice(a, grid_, arms);
      double rev = grid_.value(r) * tail;
      if (rev >= bestRev) { bestRev = rev; best = a; }  // ties toward lower price
    }
    return armToPrice(best, grid_, arms);
  }

  PriceGrid grid_;
  Price fixed_{0};
  const LtbAdvertiser* ltb_ = nullptr;
  const QLearnAdvertiser* qlearn_ = nullptr;
  GameState state_{};
};

// Reinforcement-learning baselines over the coarse reserve grid; reward is
// the reserve when sold, zero otherwise.
class UcbPublisher : public Publisher {
 public:
  UcbPublisher(const PriceGrid& grid, int explorationRounds, double epsilon,
               int arms = kCoarseArms)
      : grid_(grid), core_(arms, explorationRounds, epsilon) {}

  Price reserve(Rng& rng) override {
    lastArm_ = core_.select(rng);
    return armToPrice(lastArm_, grid_, core_.arms());
  }

  void observe(const CensoredObservation& obs, Rng&) override {
    core_.update(lastArm_, obs.sold ? grid_.value(obs.reserve) : 0.0);
  }

  std::string name() const override { return "ucb-pub"; }
  const UcbCore& core() const { return core_; }

 private:
  PriceGrid grid_;
  UcbCore core_;
  int lastArm_ = 0;
};

class QLearnPublisher : public Publisher {
 public:
  QLearnPublisher(const PriceGrid& grid, const EpisodeConfig& config, double alpha,
                  double gamma, double tau, int buckets = 10, int arms = kCoarseArms)
      : grid_(grid), impressionsPerDay_(config.impressionsPerDay), buckets_(buckets),
        q_(buckets, arms, alpha, gamma, tau) {}

  Price reserve(Rng& rng) override {
    lastState_ = bucket();
    lastArm_ = q_.sample(lastState_, rng);
    return armToPrice(lastArm_, grid_, q_.actions());
  }

  void observe(const CensoredObservation& obs, Rng&) override {
    double reward = obs.sold ? grid_.value(obs.reserve) : 0.0;
    ++posInDay_;
    q_.update(lastState_, lastArm_, reward, bucket());
  }

  void onDayStart(int, Rng&) override { posInDay_ = 0; }

  std::string name() const override { return "qlearn-pub"; }
  const BoltzmannQ& table() const { return q_; }

 private:
  int bucket() const {
    int b = posInDay_ * buckets_ / impressionsPerDay_;
    return std::clamp(b, 0, buckets_ - 1);
  }

  PriceGrid grid_;
  int impressionsPerDay_;
  int buckets_;
  BoltzmannQ q_;
  int posInDay_ = 0;
  int lastState_ = 0;
  int lastArm_ = 0;
};

}  // namespace adx
