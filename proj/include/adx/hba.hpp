#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "adx/advertisers.hpp"
#include "adx/distributions.hpp"
#include "adx/game.hpp"
#include "adx/km.hpp"
#include "adx/learning.hpp"
#include "adx/price.hpp"

namespace adx {

// A simulable hypothesis about the advertiser: exposes the predictive tail of
// its next-bid distribution over the price grid and is kept in lockstep with
// the episode using only the public (censored) history.
class TypeModel {
 public:
  virtual ~TypeModel() = default;
  virtual void onRound(const CensoredObservation& obs) { (void)obs; }
  virtual void onDayStart(int day) { (void)day; }
  // tailGrid()[i] = P(next bid >= i) under this hypothesis.
  virtual const std::vector<double>& tailGrid() const = 0;
  virtual bool randomClass() const { return false; }
  virtual std::string name() const = 0;

  double tail(Price p) const { return tailGrid()[p.index]; }
};

// Likelihood of a censored observation under a type model: the model's tail
// at the posted reserve when sold, its complement otherwise.
inline double censored_likelihood(const TypeModel& model, const CensoredObservation& obs) {
  double t = model.tail(obs.reserve);
  return obs.sold ? t : 1.0 - t;
}

class GreedyTypeModel : public TypeModel {
 public:
  GreedyTypeModel(const PriceGrid& grid, Price vmax) : tail_(grid.size(), 0.0) {
    for (int i = 0; i <= vmax.index; ++i) tail_[i] = 1.0;
  }
  const std::vector<double>& tailGrid() const override { return tail_; }
  std::string name() const override { return "greedy"; }

 private:
  std::vector<double> tail_;
};

class RandomTypeModel : public TypeModel {
 public:
  explicit RandomTypeModel(BidDistribution dist) : dist_(std::move(dist)) {}
  const std::vector<double>& tailGrid() const override { return dist_.tailGrid(); }
  bool randomClass() const override { return true; }
  std::string name() const override { return dist_.name(); }
  const BidDistribution& distribution() const { return dist_; }

 private:
  BidDistribution dist_;
};

// Lockstep Learn-Then-Bid hypothesis. The model observes exactly what the
// true advertiser would: the publisher's posted reserves.
class LtbTypeModel : public TypeModel {
 public:
  LtbTypeModel(const PriceGrid& grid, int m, double f, int totalRounds,
               double totalBudget)
      : grid_(grid), replica_(grid, m, f, totalRounds, totalBudget),
        tail_(grid.size(), 0.0) {
    tail_[0] = 1.0;  // opt-out phase: point mass at bid 0
  }

  void onRound(const CensoredObservation& obs) override {
    if (!replica_.learningDone()) {
      RoundOutcome forged;
      forged.reserve = obs.reserve;
      Rng dummy(0);
      replica_.observe(forged, dummy);
      if (replica_.learningDone()) {
        Price b = replica_.learnedPrice();
        std::fill(tail_.begin(), tail_.end(), 0.0);
        for (int i = 0; i <= b.index; ++i) tail_[i] = 1.0;
      }
    }
  }

  const std::vector<double>& tailGrid() const override { return tail_; }
  std::string name() const override { return "ltb"; }

 private:
  PriceGrid grid_;
  LtbAdvertiser replica_;
  std::vector<double> tail_;
};

namespace detail {
// Expand a pmf over coarse arms into a tail over the fine grid.
inline void armPmfToTail(const std::vector<double>& pmf, const PriceGrid& grid,
                         int arms, std::vector<double>& tail) {
  tail.assign(grid.size(), 0.0);
  for (int a = 0; a < arms; ++a) tail[armToPrice(a, grid, arms).index] += pmf[a];
  for (int i = grid.size() - 2; i >= 0; --i) tail[i] += tail[i + 1];
}
}  // namespace detail

// Lockstep UCB hypothesis: plays its own deterministic arm choice against the
// observed reserves and predicts the epsilon-greedy mixture.
class UcbTypeModel : public TypeModel {
 public:
  UcbTypeModel(const PriceGrid& grid, int explorationRounds, double epsilon,
               int arms = kCoarseArms)
      : grid_(grid), core_(arms, explorationRounds, epsilon) {
    rebuild();
  }

  void onRound(const CensoredObservation& obs) override {
    int arm = core_.deterministicSelect();
    Price bid = armToPrice(arm, grid_, core_.arms());
    double reward = bid >= obs.reserve ? grid_.value(bid) - grid_.value(obs.reserve) : 0.0;
    core_.update(arm, reward);
    rebuild();
  }

  const std::vector<double>& tailGrid() const override { return tail_; }
  std::string name() const override { return "ucb"; }

 private:
  void rebuild() {
    core_.actionProbabilities(pmf_);
    detail::armPmfToTail(pmf_, grid_, core_.arms(), tail_);
  }

  PriceGrid grid_;
  UcbCore core_;
  std::vector<double> pmf_;
  std::vector<double> tail_;
};

// Lockstep Q-learning hypothesis with a hypothetical budget trajectory.
class QLearnTypeModel : public TypeModel {
 public:
  QLearnTypeModel(const PriceGrid& grid, double alpha, double gamma, double tau,
                  Money dailyBudget, int budgetBuckets = 10, int arms = kCoarseArms)
      : grid_(grid), dailyBudget_(dailyBudget), buckets_(budgetBuckets),
        q_(budgetBuckets, arms, alpha, gamma, tau), budget_(dailyBudget) {
    rebuild();
  }

  void onDayStart(int) override {
    budget_ = dailyBudget_;
    rebuild();
  }

  void onRound(const CensoredObservation& obs) override {
    int s = bucketOf(budget_);
    int arm = q_.argmaxQ(s);
    Price bid = armToPrice(arm, grid_, q_.actions());
    Money cost = obs.reserve.index;
    bool sells = bid >= obs.reserve && budget_ >= cost;
    double reward = sells ? grid_.value(bid) - grid_.value(obs.reserve) : 0.0;
    if (sells) budget_ -= cost;
    q_.update(s, arm, reward, bucketOf(budget_));
    rebuild();
  }

  const std::vector<double>& tailGrid() const override { return tail_; }
  bool randomClass() const override { return true; }
  std::string name() const override { return "qlearn"; }

 private:
  int bucketOf(Money budget) const {
    if (dailyBudget_ <= 0) return 0;
    auto b = static_cast<int>(budget * buckets_ / dailyBudget_);
    return std::clamp(b, 0, buckets_ - 1);
  }

  void rebuild() {
    q_.actionProbabilities(bucketOf(budget_), pmf_);
    detail::armPmfToTail(pmf_, grid_, q_.actions(), tail_);
  }

  PriceGrid grid_;
  Money dailyBudget_;
  int buckets_;
  BoltzmannQ q_;
  Money budget_;
  std::vector<double> pmf_;
  std::vector<double> tail_;
};

enum class PosteriorMode { Sum, Product };

// Normalized posterior weights over the hypothesized type space. Sum mode
// accumulates per-round likelihoods per type; product mode is the Bayes
// product with a per-round floor against irreversible elimination.
class BeliefState {
 public:
  BeliefState(std::size_t types, PosteriorMode mode, double likelihoodFloor = 1e-6)
      : mode_(mode), floor_(likelihoodFloor),
        weights_(types, 1.0 / types),
        acc_(types, mode == PosteriorMode::Sum ? 0.0 : 1.0 / types) {
    if (types == 0) throw std::invalid_argument("empty type space");
  }

  void update(const std::vector<double>& likelihoods) {
    double sum = 0.0;
    if (mode_ == PosteriorMode::Sum) {
      for (std::size_t i = 0; i < acc_.size(); ++i) {
        acc_[i] += likelihoods[i];
        sum += acc_[i];
      }
    } else {
      for (std::size_t i = 0; i < acc_.size(); ++i) {
        // Exact zeros eliminate; small positive likelihoods (grid-snapping
        // artifacts) are floored instead.
        double l = likelihoods[i] > 0.0 ? std::max(likelihoods[i], floor_) : 0.0;
        acc_[i] *= l;
        sum += acc_[i];
      }
    }
    if (sum <= 0.0) {
      // Total model mismatch: reset to uniform.
      std::fill(weights_.begin(), weights_.end(), 1.0 / weights_.size());
      if (mode_ == PosteriorMode::Product)
        std::fill(acc_.begin(), acc_.end(), 1.0 / acc_.size());
      return;
    }
    for (std::size_t i = 0; i < acc_.size(); ++i) weights_[i] = acc_[i] / sum;
    if (mode_ == PosteriorMode::Product) acc_ = weights_;  // renormalized product
  }

  const std::vector<double>& weights() const { return weights_; }

  int argmax() const {
    int best = 0;
    for (std::size_t i = 1; i < weights_.size(); ++i)
      if (weights_[i] > weights_[best]) best = static_cast<int>(i);
    return best;
  }

 private:
  PosteriorMode mode_;
  double floor_;
  std::vector<double> weights_;
  std::vector<double> acc_;
};

// Piecewise utility of a candidate reserve given the last censored outcome:
// known when the censoring brackets it, otherwise the belief-weighted
// expected revenue v * T(v).
inline double censored_utility(Price candidate, const CensoredObservation& obs,
                               const std::vector<double>& mixtureTail,
                               const PriceGrid& grid) {
  double v = grid.value(candidate);
  if (candidate <= obs.reserve && obs.sold) return v;
  if (candidate >= obs.reserve && !obs.sold) return 0.0;
  return v * mixtureTail[candidate.index];
}

struct HbaParams {
  PosteriorMode mode = PosteriorMode::Sum;
  double likelihoodFloor = 1e-6;
  double gamma = 0.95;  // TD discount
  double alpha = 0.1;   // TD learning rate
  KmParams km{};
  int qBuckets = 10;
  int qArms = kCoarseArms;
  bool trackBeliefs = false;
};

// Belief-based publisher for censored posted-price play: maintains a
// posterior over the hypothesized type space, prices by expected-revenue
// maximization against the belief mixture, and hands pricing to the
// Random-KM subroutine when the maximum-posterior type is stochastic.
class HbaPublisher : public Publisher {
 public:
  HbaPublisher(const PriceGrid& grid, const EpisodeConfig& config,
               std::vector<std::unique_ptr<TypeModel>> models, HbaParams params = {})
      : grid_(grid), config_(config), models_(std::move(models)), params_(params),
        beliefs_(models_.size(), params.mode, params.likelihoodFloor),
        qtable_(params.qBuckets, params.qArms, params.alpha,
                std::min(params.gamma, 0.999999), 1.0),
        budget_(PriceGrid(config.gridResolution).moneyFromCurrency(config.dailyBudget)) {
    if (models_.empty()) throw std::invalid_argument("empty type space");
  }

  Price reserve(Rng& rng) override {
    if (kmActive_) {
      if (!km_->finished()) return km_->nextReserve(rng);
      return km_->result();
    }
    std::vector<double> scores = expectedPayoffs();
    double best = *std::max_element(scores.begin(), scores.end());
    ties_.clear();
    for (int i = 0; i < static_cast<int>(scores.size()); ++i)
      if (scores[i] == best) ties_.push_back(i);
    if (ties_.size() == 1) return Price{ties_[0]};
    std::uniform_int_distribution<std::size_t> pick(0, ties_.size() - 1);
    return Price{ties_[pick(rng)]};
  }

  void observe(const CensoredObservation& obs, Rng&) override {
    // The advertiser's remaining budget is derivable from the censored
    // history (sales at known reserves), so a budget-refused round is not
    // evidence against any type: no model could have sold.
    Money cost = obs.reserve.index;
    bool affordable = budget_ >= cost;
    likelihoods_.resize(models_.size());
    for (std::size_t i = 0; i < models_.size(); ++i) {
      double t = affordable ? models_[i]->tail(obs.reserve) : 0.0;
      likelihoods_[i] = obs.sold ? t : 1.0 - t;
    }
    if (obs.sold) budget_ -= cost;

    mixtureTailInto(mixTail_);
    beliefs_.update(likelihoods_);

    // TD update of every candidate's value from the censored utility.
    int s = bucket(posInDay_);
    int s2 = bucket((posInDay_ + 1) % config_.impressionsPerDay);
    for (int a = 0; a < params_.qArms; ++a) {
      Price v = armToPrice(a, grid_, params_.qArms);
      double u = censored_utility(v, obs, mixTail_, grid_);
      qtable_.update(s, a, u, s2);
    }

    for (auto& m : models_) m->onRound(obs);
    if (kmActive_ && !km_->finished()) km_->observe(obs);

    if (params_.trackBeliefs) trajectory_.push_back(beliefs_.weights());
    ++posInDay_;
  }

  void onDayStart(int day, Rng&) override {
    posInDay_ = 0;
    budget_ = grid_.moneyFromCurrency(config_.dailyBudget);
    for (auto& m : models_) m->onDayStart(day);
    if (day > 0) evaluateKmBranch();
  }

  std::string name() const override { return "hba-km"; }

  // E(r) over the fine grid: belief-weighted immediate revenue plus the
  // discounted continuation value from the Q-table.
  std::vector<double> expectedPayoffs() const {
    std::vector<double> mix;
    mixtureTailInto(mix);
    double cont = params_.gamma * qtable_.maxQ(bucket((posInDay_ + 1) % config_.impressionsPerDay));
    std::vector<double> scores(grid_.size());
    for (int i = 0; i < grid_.size(); ++i) {
      double immediate = budget_ >= i ? grid_.value(Price{i}) * mix[i] : 0.0;
      scores[i] = immediate + cont;
    }
    return scores;
  }

  const BeliefState& beliefs() const { return beliefs_; }
  const std::vector<double>& beliefWeights() const { return beliefs_.weights(); }
  const std::vector<std::unique_ptr<TypeModel>>& typeModels() const { return models_; }
  const BoltzmannQ& qtable() const { return qtable_; }
  bool kmEngaged() const { return km_ != nullptr; }
  bool kmActive() const { return kmActive_; }
  const RandomKmEstimator* kmEstimator() const { return km_.get(); }

  // Posterior mass on the stochastic (Random / dynamic-distribution) class.
  double randomClassMass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < models_.size(); ++i)
      if (models_[i]->randomClass()) m += beliefs_.weights()[i];
    return m;
  }

  void mixtureTailInto(std::vector<double>& out) const {
    out.assign(grid_.size(), 0.0);
    const auto& w = beliefs_.weights();
    for (std::size_t i = 0; i < models_.size(); ++i) {
      const auto& t = models_[i]->tailGrid();
      for (int x = 0; x < grid_.size(); ++x) out[x] += w[i] * t[x];
    }
  }

  void writeBeliefCsv(std::ostream& os) const {
    os << "round";
    for (const auto& m : models_) os << ',' << m->name();
    os << '\n';
    os << std::fixed << std::setprecision(6);
    for (std::size_t t = 0; t < trajectory_.size(); ++t) {
      os << t;
      for (double w : trajectory_[t]) os << ',' << w;
      os << '\n';
    }
  }

 private:
  int bucket(int posInDay) const {
    return std::clamp(posInDay * params_.qBuckets / config_.impressionsPerDay, 0,
                      params_.qBuckets - 1);
  }

  void evaluateKmBranch() {
    // Re-checked at every day boundary so a misidentified stochastic
    // opponent can be corrected later.
    bool randomTop = models_[beliefs_.argmax()]->randomClass();
    if (randomTop) {
      if (!km_) km_ = std::make_unique<RandomKmEstimator>(grid_, params_.km);
      kmActive_ = true;
    } else {
      kmActive_ = false;
    }
  }

  PriceGrid grid_;
  EpisodeConfig config_;
  std::vector<std::unique_ptr<TypeModel>> models_;
  HbaParams params_;
  BeliefState beliefs_;
  BoltzmannQ qtable_;
  std::unique_ptr<RandomKmEstimator> km_;
  bool kmActive_ = false;
  int posInDay_ = 0;
  Money budget_ = 0;
  std::vector<double> likelihoods_;
  std::vector<double> mixTail_;
  std::vector<int> ties_;
  std::vector<std::vector<double>> trajectory_;
};

}  // namespace adx
