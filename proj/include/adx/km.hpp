#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "adx/game.hpp"
#include "adx/price.hpp"
#include "adx/rng.hpp"

namespace adx {

// Doubly censored tallies over the price grid. A sale at reserve r right
// censors every x <= r; a refusal left censors every x >= r.
struct KmCounters {
  std::vector<std::int64_t> R, L;

  explicit KmCounters(const PriceGrid& grid)
      : R(grid.size(), 0), L(grid.size(), 0) {}

  void record(const CensoredObservation& obs) {
    if (obs.sold) {
      for (int x = 0; x <= obs.reserve.index; ++x) ++R[x];
    } else {
      for (int x = obs.reserve.index; x < static_cast<int>(L.size()); ++x) ++L[x];
    }
  }
};

struct TailEstimate {
  std::vector<double> value;
  std::vector<bool> defined;
};

inline TailEstimate tail_estimate(const KmCounters& c) {
  TailEstimate t;
  t.value.assign(c.R.size(), 0.0);
  t.defined.assign(c.R.size(), false);
  for (std::size_t x = 0; x < c.R.size(); ++x) {
    auto total = c.R[x] + c.L[x];
    if (total > 0) {
      t.value[x] = static_cast<double>(c.R[x]) / total;
      t.defined[x] = true;
    }
  }
  return t;
}

struct KmParams {
  int k = 1000;   // random-query rounds (phase 1)
  int l = 10;     // candidate half-width in grid steps
  int kc = 500;   // rounds per candidate (phase 2)
};

struct KmTraceRow {
  int round;
  int phase;
  int reserve;
  bool sold;
};

// Two-phase reserve search against a stochastic opponent: uniform random
// queries build a pooled tail estimate, then each candidate around the
// provisional argmax is queried k_c times and re-estimated from its own
// Bernoulli outcomes alone.
class RandomKmEstimator {
 public:
  RandomKmEstimator(const PriceGrid& grid, KmParams params, bool keepTrace = false)
      : grid_(grid), params_(params), counters_(grid), keepTrace_(keepTrace) {
    if (params.k < 1 || params.kc < 1) throw std::invalid_argument("k, k_c must be >= 1");
    if (params.l < 0) throw std::invalid_argument("l must be >= 0");
  }

  bool finished() const { return phase_ == 3; }

  Price result() const {
    if (!finished()) throw std::logic_error("estimator still running");
    return result_;
  }

  Price nextReserve(Rng& rng) {
    switch (phase_) {
      case 1: {
        std::uniform_int_distribution<int> pick(0, grid_.resolution());
        pending_ = Price{pick(rng)};
        return pending_;
      }
      case 2:
        pending_ = candidates_[candidateIdx_];
        return pending_;
      default:
        return result_;
    }
  }

  void observe(const CensoredObservation& obs) {
    if (keepTrace_) trace_.push_back({rounds_, phase_, obs.reserve.index, obs.sold});
    ++rounds_;
    if (phase_ == 1) {
      counters_.record(obs);
      if (++phase1Rounds_ == params_.k) startPhase2();
    } else if (phase_ == 2) {
      ++candidateTotals_[candidateIdx_];
      if (obs.sold) ++candidateSold_[candidateIdx_];
      if (candidateTotals_[candidateIdx_] == params_.kc) {
        if (++candidateIdx_ == static_cast<int>(candidates_.size())) finish();
      }
    }
  }

  const KmCounters& counters() const { return counters_; }
  const std::vector<Price>& candidates() const { return candidates_; }
  Price phase1Argmax() const { return phase1Argmax_; }

  double candidateTail(int i) const {
    if (candidateTotals_[i] == 0) return 0.0;
    return static_cast<double>(candidateSold_[i]) / candidateTotals_[i];
  }

  const std::vector<KmTraceRow>& trace() const { return trace_; }

  void writeTraceCsv(std::ostream& os) const {
    os << "round,phase,reserve,sold\n";
    os << std::fixed << std::setprecision(6);
    for (const auto& r : trace_)
      os << r.round << ',' << r.phase << ',' << grid_.value(Price{r.reserve}) << ','
         << (r.sold ? 1 : 0) << '\n';
  }

  void writeCandidateCsv(std::ostream& os) const {
    os << "candidate,tail_estimate,expected_revenue\n";
    os << std::fixed << std::setprecision(6);
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      double t = candidateTail(static_cast<int>(i));
      double v = grid_.value(candidates_[i]);
      os << v << ',' << t << ',' << v * t << '\n';
    }
  }

 private:
  void startPhase2() {
    TailEstimate t = tail_estimate(counters_);
    phase1Argmax_ = argmaxRevenue(t);
    int lo = std::max(0, phase1Argmax_.index - params_.l);
    int hi = std::min(grid_.resolution(), phase1Argmax_.index + params_.l);
    for (int c = lo; c <= hi; ++c) candidates_.push_back(Price{c});
    candidateSold_.assign(candidates_.size(), 0);
    candidateTotals_.assign(candidates_.size(), 0);
    phase_ = 2;
  }

  void finish() {
    int best = 0;
    double bestRev = -1.0;
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      double rev = grid_.value(candidates_[i]) * candidateTail(static_cast<int>(i));
      if (rev > bestRev) { bestRev = rev; best = static_cast<int>(i); }
    }
    result_ = candidates_[best];
    phase_ = 3;
  }

  Price argmaxRevenue(const TailEstimate& t) const {
    int best = 0;
    double bestRev = -1.0;
    for (int x = 0; x < grid_.size(); ++x) {
      if (!t.defined[x]) continue;
      double rev = grid_.value(Price{x}) * t.value[x];
      if (rev > bestRev) { bestRev = rev; best = x; }
    }
    // Nothing sold anywhere: all bids sit below the smallest query, so the
    // only region worth probing is the bottom of the grid.
    if (bestRev <= 0.0) return Price{0};
    return Price{best};
  }

  PriceGrid grid_;
  KmParams params_;
  KmCounters counters_;
  bool keepTrace_;
  int phase_ = 1;
  int rounds_ = 0;
  int phase1Rounds_ = 0;
  Price pending_{0};
  Price phase1Argmax_{0};
  Price result_{0};
  std::vector<Price> candidates_;
  int candidateIdx_ = 0;
  std::vector<int> candidateSold_;
  std::vector<int> candidateTotals_;
  std::vector<KmTraceRow> trace_;
};

// Run the estimator to completion against an environment that answers a
// posted reserve with a sold flag.
template <typename SellFn>
Price random_km(const PriceGrid& grid, KmParams params, SellFn&& sells, Rng& rng) {
  RandomKmEstimator est(grid, params);
  while (!est.finished()) {
    Price r = est.nextReserve(rng);
    est.observe(CensoredObservation{r, sells(r)});
  }
  return est.result();
}

}  // namespace adx
