#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "adx/rng.hpp"

namespace adx {

// UCB1 with round-robin initialisation for the first `explorationRounds`
// plays and epsilon-greedy selection afterwards. Shared by the UCB
// advertiser, the UCB publisher baseline and the HBA type model.
class UcbCore {
 public:
  UcbCore(int arms, int explorationRounds, double epsilon)
      : arms_(arms), exploration_(explorationRounds), epsilon_(epsilon),
        counts_(arms, 0), means_(arms, 0.0) {
    if (arms < 1) throw std::invalid_argument("need at least one arm");
    if (epsilon < 0.0 || epsilon >= 1.0)
      throw std::invalid_argument("epsilon must be in [0,1)");
  }

  int arms() const { return arms_; }
  int explorationRounds() const { return exploration_; }
  double epsilon() const { return epsilon_; }
  int totalPlays() const { return t_; }
  int count(int arm) const { return counts_[arm]; }
  double mean(int arm) const { return means_[arm]; }

  double indexOf(int arm) const {
    if (counts_[arm] == 0) return std::numeric_limits<double>::infinity();
    return means_[arm] + std::sqrt(2.0 * std::log(static_cast<double>(std::max(t_, 1))) /
                                   counts_[arm]);
  }

  // Deterministic choice: exploration schedule, then unplayed arms, then the
  // maximal UCB index (ties to the lowest arm). Used both for greedy
  // selection and for the model's predictive distribution.
  int deterministicSelect() const {
    if (t_ < exploration_) return t_ % arms_;
    int best = 0;
    double bestIdx = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < arms_; ++a) {
      double idx = indexOf(a);
      if (idx > bestIdx) { bestIdx = idx; best = a; }
    }
    return best;
  }

  int select(Rng& rng) {
    if (t_ < exploration_) return t_ % arms_;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon_) {
      std::uniform_int_distribution<int> pick(0, arms_ - 1);
      return pick(rng);
    }
    return deterministicSelect();
  }

  void update(int arm, double reward) {
    ++t_;
    ++counts_[arm];
    means_[arm] += (reward - means_[arm]) / counts_[arm];
  }

  // Predictive action distribution of this policy at the current state.
  void actionProbabilities(std::vector<double>& out) const {
    out.assign(arms_, 0.0);
    if (t_ < exploration_) {
      out[t_ % arms_] = 1.0;
      return;
    }
    double base = epsilon_ / arms_;
    for (auto& p : out) p = base;
    out[deterministicSelect()] += 1.0 - epsilon_;
  }

 private:
  int arms_;
  int exploration_;
  double epsilon_;
  int t_ = 0;
  std::vector<int> counts_;
  std::vector<double> means_;
};

// Tabular Q-learning with Boltzmann (soft-max) action selection.
class BoltzmannQ {
 public:
  BoltzmannQ(int states, int actions, double alpha, double gamma, double tau)
      : states_(states), actions_(actions), alpha_(alpha), gamma_(gamma), tau_(tau),
        q_(static_cast<std::size_t>(states) * actions, 0.0) {
    if (states < 1 || actions < 1) throw std::invalid_argument("empty state/action space");
    if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("alpha must be in (0,1]");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must be in [0,1)");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  }

  int states() const { return states_; }
  int actions() const { return actions_; }
  double q(int s, int a) const { return q_[static_cast<std::size_t>(s) * actions_ + a]; }
  double& q(int s, int a) { return q_[static_cast<std::size_t>(s) * actions_ + a]; }

  void actionProbabilities(int s, std::vector<double>& out) const {
    out.resize(actions_);
    double maxq = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < actions_; ++a) maxq = std::max(maxq, q(s, a));
    double sum = 0.0;
    for (int a = 0; a < actions_; ++a) {
      out[a] = std::exp((q(s, a) - maxq) / tau_);
      sum += out[a];
    }
    for (auto& p : out) p /= sum;
  }

  int sample(int s, Rng& rng) const {
    std::vector<double> p;
    actionProbabilities(s, p);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng);
    double acc = 0.0;
    for (int a = 0; a < actions_; ++a) {
      acc += p[a];
      if (x <= acc) return a;
    }
    return actions_ - 1;
  }

  double maxQ(int s) const {
    double m = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < actions_; ++a) m = std::max(m, q(s, a));
    return m;
  }

  int argmaxQ(int s) const {
    int best = 0;
    for (int a = 1; a < actions_; ++a)
      if (q(s, a) > q(s, best)) best = a;
    return best;
  }

  void update(int s, int a, double reward, int s2) {
    double& cell = q(s, a);
    cell += alpha_ * (reward + gamma_ * maxQ(s2) - cell);
  }

 private:
  int states_, actions_;
  double alpha_, gamma_, tau_;
  std::vector<double> q_;
};

}  // namespace adx
