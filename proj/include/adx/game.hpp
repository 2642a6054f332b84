#pragma once

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adx/price.hpp"
#include "adx/rng.hpp"

namespace adx {

struct GameState {
  Money budget = 0;  // remaining daily budget, grid units
  int round = 0;     // global round index
  int day = 0;
};

struct RoundOutcome {
  Price bid;
  Price reserve;
  bool sold = false;
  Money publisherPayoff = 0;
  Money advertiserPayoff = 0;
  Money budgetAfter = 0;
  int day = 0;
  int round = 0;
};

// The only signal the publisher receives each round.
struct CensoredObservation {
  Price reserve;
  bool sold = false;
};

inline CensoredObservation censor(const RoundOutcome& o) {
  return CensoredObservation{o.reserve, o.sold};
}

// One auction round. A sale the advertiser cannot afford is refused and the
// round counts as unsold for both sides.
inline std::pair<RoundOutcome, GameState> step(const GameState& state, Price bid,
                                               Price reserve) {
  RoundOutcome out;
  out.bid = bid;
  out.reserve = reserve;
  out.day = state.day;
  out.round = state.round;

  Money cost = reserve.index;
  bool affordable = state.budget >= cost;
  out.sold = bid >= reserve && affordable;
  if (out.sold) {
    out.publisherPayoff = cost;
    out.advertiserPayoff = bid.index - reserve.index;
  }

  GameState next = state;
  if (out.sold) next.budget -= cost;
  next.round += 1;
  out.budgetAfter = next.budget;
  return {out, next};
}

struct EpisodeConfig {
  int days = 60;
  int impressionsPerDay = 1000;
  double dailyBudget = 500.0;  // currency units
  int gridResolution = 1000;

  int totalRounds() const { return days * impressionsPerDay; }
};

class Advertiser {
 public:
  virtual ~Advertiser() = default;
  virtual Price bid(const GameState& state, Rng& rng) = 0;
  // Full-information feedback: the advertiser sees the whole outcome.
  virtual void observe(const RoundOutcome& outcome, Rng& rng) { (void)outcome; (void)rng; }
  virtual void onDayStart(int day, Rng& rng) { (void)day; (void)rng; }
  virtual std::string name() const = 0;
};

class Publisher {
 public:
  virtual ~Publisher() = default;
  virtual Price reserve(Rng& rng) = 0;
  // Censored feedback only; the interface carries no bid information.
  virtual void observe(const CensoredObservation& obs, Rng& rng) { (void)obs; (void)rng; }
  virtual void onDayStart(int day, Rng& rng) { (void)day; (void)rng; }
  virtual std::string name() const = 0;
};

// Clairvoyant hook, implemented only by the online-optimal benchmark. The
// episode loop reveals the current bid before asking for a reserve.
class BidOracle {
 public:
  virtual ~BidOracle() = default;
  virtual void revealBid(Price bid, const GameState& state) = 0;
};

// State hook for the offline-optimal benchmark, whose best responses against
// stateful opponents are defined per advertiser state.
class StateOracle {
 public:
  virtual ~StateOracle() = default;
  virtual void revealState(const GameState& state) = 0;
};

struct EpisodeLog {
  std::uint64_t seed = 0;
  EpisodeConfig config;
  std::vector<RoundOutcome> rounds;

  Money publisherRevenue() const {
    Money sum = 0;
    for (const auto& r : rounds) sum += r.publisherPayoff;
    return sum;
  }

  void toCsv(std::ostream& os) const {
    PriceGrid grid(config.gridResolution);
    os << "day,round,bid,reserve,sold,publisher_payoff,advertiser_payoff,budget_after\n";
    os << std::fixed << std::setprecision(6);
    for (const auto& r : rounds) {
      os << r.day << ',' << r.round << ',' << grid.value(r.bid) << ','
         << grid.value(r.reserve) << ',' << (r.sold ? 1 : 0) << ','
         << grid.currency(r.publisherPayoff) << ','
         << grid.currency(r.advertiserPayoff) << ','
         << grid.currency(r.budgetAfter) << '\n';
    }
  }
};

inline EpisodeLog run_episode(Advertiser& advertiser, Publisher& publisher,
                              const EpisodeConfig& config, std::uint64_t seed) {
  if (config.days < 1 || config.impressionsPerDay < 1)
    throw std::invalid_argument("episode needs at least one round");
  if (config.dailyBudget < 0.0)
    throw std::invalid_argument("daily budget must be nonnegative");

  PriceGrid grid(config.gridResolution);
  Rng advRng(mixSeed(seed, hashLabel("advertiser")));
  Rng pubRng(mixSeed(seed, hashLabel("publisher")));

  EpisodeLog log;
  log.seed = seed;
  log.config = config;
  log.rounds.reserve(static_cast<std::size_t>(config.totalRounds()));

  auto* bidOracle = dynamic_cast<BidOracle*>(&publisher);
  auto* stateOracle = dynamic_cast<StateOracle*>(&publisher);

  GameState state;
  for (int day = 0; day < config.days; ++day) {
    state.day = day;
    state.budget = grid.moneyFromCurrency(config.dailyBudget);
    advertiser.onDayStart(day, advRng);
    publisher.onDayStart(day, pubRng);
    for (int imp = 0; imp < config.impressionsPerDay; ++imp) {
      Price b = advertiser.bid(state, advRng);
      if (bidOracle) bidOracle->revealBid(b, state);
      if (stateOracle) stateOracle->revealState(state);
      Price r = publisher.reserve(pubRng);
      auto [outcome, next] = step(state, b, r);
      state = next;
      advertiser.observe(outcome, advRng);
      publisher.observe(censor(outcome), pubRng);
      log.rounds.push_back(outcome);
    }
  }
  return log;
}

}  // namespace adx
