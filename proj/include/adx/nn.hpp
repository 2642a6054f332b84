#pragma once

#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <vector>

#include "adx/advertisers.hpp"
#include "adx/game.hpp"
#include "adx/price.hpp"
#include "adx/rng.hpp"

namespace adx {

struct TrainingSample {
  double bid = 0.0;
  double reserve = 0.0;
  double payoff = 0.0;
};

// Fully connected feedforward net, sigmoid activations throughout.
// Inputs: (bid, reserve). Output: predicted advertiser payoff.
class FeedForwardNet {
 public:
  FeedForwardNet(int hiddenLayers, int hiddenWidth) {
    if (hiddenLayers < 1 || hiddenLayers > 4)
      throw std::invalid_argument("hidden layers must be in 1..4");
    sizes_.push_back(2);
    for (int i = 0; i < hiddenLayers; ++i) sizes_.push_back(hiddenWidth);
    sizes_.push_back(1);
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
      n += static_cast<std::size_t>(sizes_[l] + 1) * sizes_[l + 1];  // +1 bias
    weights_.assign(n, 0.0);
  }

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }

  void randomize(Rng& rng, double scale = 0.5) {
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto& w : weights_) w = u(rng);
  }

  double forward(double bid, double reserve) const {
    std::vector<double> act = {bid, reserve};
    std::vector<double> next;
    std::size_t w = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      next.assign(sizes_[l + 1], 0.0);
      for (int j = 0; j < sizes_[l + 1]; ++j) {
        double z = weights_[w++];  // bias
        for (int i = 0; i < sizes_[l]; ++i) z += weights_[w++] * act[i];
        next[j] = sigmoid(z);
      }
      act.swap(next);
    }
    return act[0];
  }

  double mse(const std::vector<TrainingSample>& samples) const {
    if (samples.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : samples) {
      double e = forward(s.bid, s.reserve) - s.payoff;
      sum += e * e;
    }
    return sum / samples.size();
  }

  static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

 private:
  std::vector<int> sizes_;
  std::vector<double> weights_;
};

struct HillClimberParams {
  double sigma = 0.1;       // proposal std
  int proposals = 200;      // proposals per training call
  int patience = 50;        // consecutive rejections counted as convergence
};

// Random-restart-free hill climbing on buffer MSE: propose a Gaussian
// perturbation of all weights, keep it iff the MSE strictly decreases.
class HillClimber {
 public:
  explicit HillClimber(HillClimberParams params = {}) : params_(params) {}

  // Returns the final MSE on the buffer.
  double train(FeedForwardNet& net, const std::vector<TrainingSample>& samples,
               Rng& rng) const {
    if (samples.empty()) return 0.0;
    double best = net.mse(samples);
    std::normal_distribution<double> noise(0.0, params_.sigma);
    std::vector<double> saved;
    int rejections = 0;
    for (int p = 0; p < params_.proposals && rejections < params_.patience; ++p) {
      saved = net.weights();
      for (auto& w : net.weights()) w += noise(rng);
      double cand = net.mse(samples);
      if (cand < best) {
        best = cand;
        rejections = 0;
      } else {
        net.weights() = saved;
        ++rejections;
      }
    }
    return best;
  }

 private:
  HillClimberParams params_;
};

struct NeuralAdvertiserParams {
  int hiddenLayers = 2;
  int hiddenWidth = 6;
  int reserveWindow = 100;   // W reserves averaged over in act()
  int trainChunk = 100;      // samples collected per day after day 0
  HillClimberParams climber;
};

// Out-of-type-space adversary: predicts its own payoff as a function of
// (bid, reserve) and bids the arm with the best mean prediction over the
// recently observed reserves. Trained by hill climbing at each day start on
// the previous day's sample buffer.
class NeuralAdvertiser : public Advertiser {
 public:
  NeuralAdvertiser(const PriceGrid& grid, NeuralAdvertiserParams params,
                   std::uint64_t seed)
      : grid_(grid), params_(params),
        net_(params.hiddenLayers, params.hiddenWidth),
        climber_(params.climber), rng_(mixSeed(seed, hashLabel("nn"))) {
    net_.randomize(rng_);
  }

  Price bid(const GameState&, Rng&) override {
    int bestArm = 0;
    double bestScore = -1.0;
    for (int arm = 0; arm < kCoarseArms; ++arm) {
      double b = static_cast<double>(arm) / (kCoarseArms - 1);
      double score = meanPrediction(b);
      if (score > bestScore) { bestScore = score; bestArm = arm; }
    }
    return armToPrice(bestArm, grid_);
  }

  void observe(const RoundOutcome& outcome, Rng&) override {
    reserves_.push_back(grid_.value(outcome.reserve));
    if (static_cast<int>(reserves_.size()) > params_.reserveWindow)
      reserves_.pop_front();
    bool collect = day_ == 0 || samplesToday_ < params_.trainChunk;
    if (collect) {
      buffer_.push_back({grid_.value(outcome.bid), grid_.value(outcome.reserve),
                         grid_.currency(outcome.advertiserPayoff)});
    }
    ++samplesToday_;
  }

  void onDayStart(int day, Rng&) override {
    day_ = day;
    samplesToday_ = 0;
    if (day > 0 && !buffer_.empty()) {
      lastInitialMse_ = net_.mse(buffer_);
      lastFinalMse_ = trainToConvergence();
      buffer_.clear();
    }
  }

  std::string name() const override { return "nn"; }

  // Iterated hill climbing until a full call yields no accepted step.
  double trainToConvergence() {
    double prev = net_.mse(buffer_);
    for (int iter = 0; iter < 50; ++iter) {
      double cur = climber_.train(net_, buffer_, rng_);
      if (!(cur < prev)) break;
      prev = cur;
    }
    return prev;
  }

  void trainOn(const std::vector<TrainingSample>& samples) {
    buffer_ = samples;
    lastInitialMse_ = net_.mse(buffer_);
    lastFinalMse_ = trainToConvergence();
    buffer_.clear();
  }

  const FeedForwardNet& net() const { return net_; }
  FeedForwardNet& net() { return net_; }
  const std::vector<TrainingSample>& buffer() const { return buffer_; }
  double lastInitialMse() const { return lastInitialMse_; }
  double lastFinalMse() const { return lastFinalMse_; }

 private:
  double meanPrediction(double bidValue) const {
    double sum = 0.0;
    if (reserves_.empty()) {
      // No history yet: uniform prior over the reserve grid.
      for (int arm = 0; arm < kCoarseArms; ++arm)
        sum += net_.forward(bidValue, static_cast<double>(arm) / (kCoarseArms - 1));
      return sum / kCoarseArms;
    }
    for (double r : reserves_) sum += net_.forward(bidValue, r);
    return sum / reserves_.size();
  }

  PriceGrid grid_;
  NeuralAdvertiserParams params_;
  FeedForwardNet net_;
  HillClimber climber_;
  Rng rng_;
  std::deque<double> reserves_;
  std::vector<TrainingSample> buffer_;
  int day_ = 0;
  int samplesToday_ = 0;
  double lastInitialMse_ = 0.0;
  double lastFinalMse_ = 0.0;
};

}  // namespace adx
