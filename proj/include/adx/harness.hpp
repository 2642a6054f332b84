#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "adx/advertisers.hpp"
#include "adx/baselines.hpp"
#include "adx/distributions.hpp"
#include "adx/game.hpp"
#include "adx/hba.hpp"
#include "adx/nn.hpp"
#include "adx/price.hpp"

namespace adx {

// ---------------------------------------------------------------------------
// Advertiser specifications and factories

struct AdvertiserSpec {
  std::string family;  // greedy|uniform|normal|lognormal|exponential|logistic|ltb|ucb|qlearn|nn
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  std::string paramId;

  bool adaptive() const {
    return family == "greedy" || family == "ltb" || family == "ucb" || family == "qlearn";
  }
  bool randomFamily() const {
    return family == "uniform" || family == "normal" || family == "lognormal" ||
           family == "exponential" || family == "logistic";
  }
  std::string className() const { return randomFamily() ? "randomized" : "adaptive"; }
};

inline DistParams specToDist(const AdvertiserSpec& s) {
  if (s.family == "uniform") return DistParams::uniform(0.0, s.p1);
  if (s.family == "normal") return DistParams::normal(s.p1, s.p2);
  if (s.family == "lognormal") return DistParams::logNormal(s.p1, s.p2);
  if (s.family == "exponential") return DistParams::exponential(s.p1);
  if (s.family == "logistic") return DistParams::logistic(s.p1, s.p2);
  throw std::invalid_argument("not a random family: " + s.family);
}

inline std::unique_ptr<Advertiser> makeAdvertiser(const AdvertiserSpec& s,
                                                  const PriceGrid& grid,
                                                  const EpisodeConfig& cfg,
                                                  std::uint64_t seed = 0) {
  Money dailyBudget = grid.moneyFromCurrency(cfg.dailyBudget);
  if (s.family == "greedy")
    return std::make_unique<GreedyAdvertiser>(grid.snapNearest(s.p1));
  if (s.randomFamily())
    return std::make_unique<RandomAdvertiser>(BidDistribution(grid, specToDist(s)));
  if (s.family == "ltb")
    return std::make_unique<LtbAdvertiser>(grid, static_cast<int>(s.p1), s.p2,
                                           cfg.totalRounds(),
                                           cfg.dailyBudget * cfg.days);
  if (s.family == "ucb")
    return std::make_unique<UcbAdvertiser>(grid, static_cast<int>(s.p1), s.p2);
  if (s.family == "qlearn")
    return std::make_unique<QLearnAdvertiser>(grid, s.p1, s.p2, s.p3, dailyBudget);
  if (s.family == "nn") {
    NeuralAdvertiserParams np;
    np.hiddenLayers = static_cast<int>(s.p1);
    return std::make_unique<NeuralAdvertiser>(grid, np, seed);
  }
  throw std::invalid_argument("unknown advertiser family: " + s.family);
}

inline std::unique_ptr<TypeModel> makeTypeModel(const AdvertiserSpec& s,
                                                const PriceGrid& grid,
                                                const EpisodeConfig& cfg) {
  Money dailyBudget = grid.moneyFromCurrency(cfg.dailyBudget);
  if (s.family == "greedy")
    return std::make_unique<GreedyTypeModel>(grid, grid.snapNearest(s.p1));
  if (s.randomFamily())
    return std::make_unique<RandomTypeModel>(BidDistribution(grid, specToDist(s)));
  if (s.family == "ltb")
    return std::make_unique<LtbTypeModel>(grid, static_cast<int>(s.p1), s.p2,
                                          cfg.totalRounds(), cfg.dailyBudget * cfg.days);
  if (s.family == "ucb")
    return std::make_unique<UcbTypeModel>(grid, static_cast<int>(s.p1), s.p2);
  if (s.family == "qlearn")
    return std::make_unique<QLearnTypeModel>(grid, s.p1, s.p2, s.p3, dailyBudget);
  throw std::invalid_argument("no type model for family: " + s.family);
}

// Hypothesized type space: one default hypothesis per family, with the true
// opponent's own parameters substituted into its family slot (everything but
// the type itself is common knowledge). Out-of-space opponents (the neural
// adversary) get the plain default space.
inline std::vector<AdvertiserSpec> defaultTypeSpaceSpecs(const EpisodeConfig& cfg) {
  int m = std::min(100, std::max(1, cfg.totalRounds() / 10));
  return {
      {"greedy", 0.8, 0, 0, "hyp"},
      {"ltb", static_cast<double>(m), 0.5, 0, "hyp"},
      {"ucb", 100, 0.1, 0, "hyp"},
      {"uniform", 1.0, 0, 0, "hyp"},
      {"normal", 0.45, 4e-6, 0, "hyp"},
      {"qlearn", 0.2, 0.9, 300, "hyp"},
  };
}

inline std::vector<std::unique_ptr<TypeModel>> buildTypeSpace(
    const AdvertiserSpec& truth, const PriceGrid& grid, const EpisodeConfig& cfg) {
  std::vector<AdvertiserSpec> specs = defaultTypeSpaceSpecs(cfg);
  bool substituted = false;
  for (auto& s : specs) {
    if (s.family == truth.family) {
      s = truth;
      substituted = true;
    }
  }
  if (!substituted && truth.family != "nn") specs.push_back(truth);
  std::vector<std::unique_ptr<TypeModel>> models;
  models.reserve(specs.size());
  for (const auto& s : specs) models.push_back(makeTypeModel(s, grid, cfg));
  return models;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct BaselineParams {
  int ucbExploration = 101;
  double ucbEpsilon = 0.1;
  double qAlpha = 0.2;
  double qGamma = 0.9;
  double qTau = 0.05;
};

struct ExperimentConfig {
  EpisodeConfig episode{};
  std::uint64_t baseSeed = 12345;
  int numSeeds = 100;
  int pointsPerAxis = 5;
  std::vector<std::string> publishers = {"offline-opt", "hba-km", "qlearn-pub", "ucb-pub"};
  HbaParams hba{};
  BaselineParams baselines{};
  std::vector<int> nnHiddenLayers = {1, 2, 3, 4};
  int nnChunk = 100;           // mixture-rotation chunk, impressions
  int nnSeeds = 5;
  int threads = 0;             // 0 = hardware concurrency
  std::string outDir = "out";

  static ExperimentConfig fullScale() {
    ExperimentConfig c;
    c.episode = {60, 1000, 500.0, 1000};
    c.hba.mode = PosteriorMode::Product;
    return c;
  }

  // Desk-scale preset: small enough for minutes-long runs.
  static ExperimentConfig desk() {
    ExperimentConfig c;
    c.episode = {10, 200, 100.0, 1000};
    c.numSeeds = 10;
    c.pointsPerAxis = 3;
    c.hba.mode = PosteriorMode::Product;
    c.hba.km = KmParams{100, 8, 15};
    c.nnHiddenLayers = {2};
    c.nnChunk = 66;
    return c;
  }
};

inline std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> v;
  if (points <= 1) { v.push_back(lo); return v; }
  for (int i = 0; i < points; ++i)
    v.push_back(lo + (hi - lo) * i / (points - 1));
  return v;
}

namespace detail {
inline std::string fmtParam(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}
}  // namespace detail

// The parameter sweep: every swept family with `pointsPerAxis` points per
// parameter axis, cartesian products per family.
inline std::vector<AdvertiserSpec> buildSweepSpecs(int points) {
  using detail::fmtParam;
  std::vector<AdvertiserSpec> cells;
  for (double b : linspace(0.5, 1.0, points))
    cells.push_back({"uniform", b, 0, 0, "b=" + fmtParam(b)});
  for (double mu : linspace(0.25, 0.65, points))
    for (double var : linspace(2e-6, 6e-6, points))
      cells.push_back({"normal", mu, var, 0,
                       "mu=" + fmtParam(mu) + ";var=" + fmtParam(var)});
  for (double mu : linspace(-7.0, -5.4, points))
    for (double sigma : linspace(0.5, 1.0, points))
      cells.push_back({"lognormal", mu, sigma, 0,
                       "mu=" + fmtParam(mu) + ";sigma=" + fmtParam(sigma)});
  for (double beta : linspace(1.0 / 900.0, 1.0 / 500.0, points))
    cells.push_back({"exponential", beta, 0, 0, "beta=" + fmtParam(beta)});
  for (double v : linspace(0.5, 1.0, points))
    cells.push_back({"greedy", v, 0, 0, "vmax=" + fmtParam(v)});
  for (double m : linspace(20, 200, points))
    for (double f : linspace(0.3, 0.7, points))
      cells.push_back({"ltb", std::round(m), f, 0,
                       "m=" + fmtParam(std::round(m)) + ";f=" + fmtParam(f)});
  for (double k : linspace(20, 200, points))
    for (double eps : linspace(0.01, 0.30, points))
      cells.push_back({"ucb", std::round(k), eps, 0,
                       "k=" + fmtParam(std::round(k)) + ";eps=" + fmtParam(eps)});
  for (double a : linspace(0.1, 0.3, points))
    for (double g : linspace(0.80, 0.99, points))
      for (double t : linspace(100, 1000, points))
        cells.push_back({"qlearn", a, g, t,
                         "alpha=" + fmtParam(a) + ";gamma=" + fmtParam(g) +
                             ";tau=" + fmtParam(t)});
  return cells;
}

// ---------------------------------------------------------------------------
// Metrics

inline double competitive_ratio(double algRevenue, double onlineOptRevenue) {
  if (algRevenue < 0.0 || onlineOptRevenue < 0.0)
    throw std::invalid_argument("negative revenue");
  if (onlineOptRevenue == 0.0) {
    if (algRevenue == 0.0) return 1.0;  // degenerate day, by convention
    return std::numeric_limits<double>::quiet_NaN();  // flagged invalid
  }
  return algRevenue / onlineOptRevenue;
}

struct ResultRow {
  std::string publisher;
  std::string advertiser;
  std::string paramId;
  std::string className;  // adaptive | randomized | nn-single | nn-mixture
  std::uint64_t seed = 0;
  double revenue = 0.0;
  double onlineOptRevenue = 0.0;
  double ratio = 0.0;
};

struct Aggregate {
  double meanCr = 0.0;
  double stdCr = 0.0;
  double meanRevenue = 0.0;
  int count = 0;
};

template <typename Pred>
Aggregate aggregate(const std::vector<ResultRow>& rows, Pred&& keep) {
  Aggregate a;
  double sum = 0.0, sumSq = 0.0, rev = 0.0;
  for (const auto& r : rows) {
    if (!keep(r) || std::isnan(r.ratio)) continue;
    sum += r.ratio;
    sumSq += r.ratio * r.ratio;
    rev += r.revenue;
    ++a.count;
  }
  if (a.count > 0) {
    a.meanCr = sum / a.count;
    a.stdCr = std::sqrt(std::max(0.0, sumSq / a.count - a.meanCr * a.meanCr));
    a.meanRevenue = rev / a.count;
  }
  return a;
}

struct MetricsReport {
  std::vector<ResultRow> rows;
  std::vector<std::string> failures;  // per-cell errors, sweep never aborts

  Aggregate forPublisher(const std::string& pub) const {
    return aggregate(rows, [&](const ResultRow& r) { return r.publisher == pub; });
  }
  Aggregate forPublisherClass(const std::string& pub, const std::string& cls) const {
    return aggregate(rows, [&](const ResultRow& r) {
      return r.publisher == pub && r.className == cls;
    });
  }
};

// ---------------------------------------------------------------------------
// Episode wiring

inline std::unique_ptr<Publisher> makePublisher(const std::string& name,
                                                const PriceGrid& grid,
                                                const ExperimentConfig& cfg,
                                                const AdvertiserSpec& truth,
                                                Advertiser& advertiser) {
  if (name == "online-opt") return std::make_unique<OnlineOptPublisher>(grid);
  if (name == "ucb-pub")
    return std::make_unique<UcbPublisher>(grid, cfg.baselines.ucbExploration,
                                          cfg.baselines.ucbEpsilon);
  if (name == "qlearn-pub")
    return std::make_unique<QLearnPublisher>(grid, cfg.episode, cfg.baselines.qAlpha,
                                             cfg.baselines.qGamma, cfg.baselines.qTau);
  if (name == "hba-km")
    return std::make_unique<HbaPublisher>(grid, cfg.episode,
                                          buildTypeSpace(truth, grid, cfg.episode),
                                          cfg.hba);
  if (name == "offline-opt") {
    if (auto* g = dynamic_cast<GreedyAdvertiser*>(&advertiser))
      return std::make_unique<OfflineOptPublisher>(OfflineOptPublisher::forGreedy(grid, *g));
    if (auto* r = dynamic_cast<RandomAdvertiser*>(&advertiser))
      return std::make_unique<OfflineOptPublisher>(OfflineOptPublisher::forRandom(grid, *r));
    if (auto* l = dynamic_cast<LtbAdvertiser*>(&advertiser))
      return std::make_unique<OfflineOptPublisher>(OfflineOptPublisher::forLtb(grid, *l));
    if (auto* u = dynamic_cast<UcbAdvertiser*>(&advertiser))
      return std::make_unique<OfflineOptPublisher>(
          OfflineOptPublisher::forUcb(grid, *u, cfg.episode));
    if (auto* q = dynamic_cast<QLearnAdvertiser*>(&advertiser))
      return std::make_unique<OfflineOptPublisher>(OfflineOptPublisher::forQLearn(grid, *q));
    throw std::invalid_argument("offline-opt has no best response for " + advertiser.name());
  }
  if (name.rfind("fixed:", 0) == 0)
    return std::make_unique<FixedReservePublisher>(grid.snapNearest(std::stod(name.substr(6))));
  throw std::invalid_argument("unknown publisher: " + name);
}

inline std::uint64_t cellSeed(const ExperimentConfig& cfg, const AdvertiserSpec& spec,
                              int seedIdx) {
  return mixSeed(cfg.baseSeed,
                 hashLabel(spec.family + "/" + spec.paramId) ^ splitmix64(seedIdx));
}

// Matched-seed discipline: each publisher plays the same (cell, seed) episode
// that produced the online-opt denominator.
inline std::vector<ResultRow> runCell(const ExperimentConfig& cfg,
                                      const AdvertiserSpec& spec) {
  PriceGrid grid(cfg.episode.gridResolution);
  std::vector<ResultRow> rows;
  for (int s = 0; s < cfg.numSeeds; ++s) {
    std::uint64_t seed = cellSeed(cfg, spec, s);
    auto advOpt = makeAdvertiser(spec, grid, cfg.episode, seed);
    OnlineOptPublisher onlineOpt(grid);
    double denom = grid.currency(
        run_episode(*advOpt, onlineOpt, cfg.episode, seed).publisherRevenue());
    for (const auto& pubName : cfg.publishers) {
      auto adv = makeAdvertiser(spec, grid, cfg.episode, seed);
      auto pub = makePublisher(pubName, grid, cfg, spec, *adv);
      double revenue = grid.currency(
          run_episode(*adv, *pub, cfg.episode, seed).publisherRevenue());
      rows.push_back({pubName, spec.family, spec.paramId, spec.className(), seed,
                      revenue, denom, competitive_ratio(revenue, denom)});
    }
  }
  return rows;
}

template <typename CellFn>
void parallelForCells(int numCells, int threads, CellFn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, numCells));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < numCells; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline MetricsReport run_sweep(const ExperimentConfig& cfg) {
  std::vector<AdvertiserSpec> cells = buildSweepSpecs(cfg.pointsPerAxis);
  std::vector<std::vector<ResultRow>> perCell(cells.size());
  std::vector<std::string> failures(cells.size());
  parallelForCells(static_cast<int>(cells.size()), cfg.threads, [&](int i) {
    try {
      perCell[i] = runCell(cfg, cells[i]);
    } catch (const std::exception& e) {
      failures[i] = cells[i].family + "/" + cells[i].paramId + ": " + e.what();
    }
  });
  MetricsReport report;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!failures[i].empty()) report.failures.push_back(failures[i]);
    for (auto& r : perCell[i]) report.rows.push_back(std::move(r));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Neural-adversary protocols

// Rotates chunks of impressions among several publishers within a day; used
// to pre-train the neural adversary on a mixture of pricing algorithms.
class RotatingPublisher : public Publisher {
 public:
  RotatingPublisher(std::vector<std::unique_ptr<Publisher>> pubs, int chunk)
      : pubs_(std::move(pubs)), chunk_(chunk) {}

  Price reserve(Rng& rng) override { return current().reserve(rng); }

  void observe(const CensoredObservation& obs, Rng& rng) override {
    current().observe(obs, rng);
    ++pos_;
  }

  void onDayStart(int day, Rng& rng) override {
    pos_ = 0;
    for (auto& p : pubs_) p->onDayStart(day, rng);
  }

  std::string name() const override { return "mixture"; }

 private:
  Publisher& current() {
    std::size_t i = static_cast<std::size_t>(pos_ / chunk_) % pubs_.size();
    return *pubs_[i];
  }

  std::vector<std::unique_ptr<Publisher>> pubs_;
  int chunk_;
  int pos_ = 0;
};

enum class NnProtocol { Single, Mixture };

inline MetricsReport run_nn_protocol(NnProtocol mode, const ExperimentConfig& baseCfg) {
  // Against a high-bidding adaptive adversary a binding budget lets every
  // pricing algorithm extract the cap, which collapses the comparison; the
  // neural protocols therefore run with the budget lifted to the maximum
  // possible daily spend so revenue differences reflect pricing skill.
  ExperimentConfig cfg = baseCfg;
  cfg.episode.dailyBudget = static_cast<double>(cfg.episode.impressionsPerDay);
  PriceGrid grid(cfg.episode.gridResolution);
  std::vector<std::string> pubs = {"hba-km", "qlearn-pub", "ucb-pub"};
  std::string cls = mode == NnProtocol::Single ? "nn-single" : "nn-mixture";
  MetricsReport report;

  for (int h : cfg.nnHiddenLayers) {
    AdvertiserSpec spec{"nn", static_cast<double>(h), 0, 0,
                        "hidden=" + std::to_string(h)};
    for (int s = 0; s < cfg.nnSeeds; ++s) {
      std::uint64_t seed = cellSeed(cfg, spec, s);

      std::optional<std::vector<double>> pretrained;
      if (mode == NnProtocol::Mixture) {
        // Day-one rotation among the three pricing algorithms.
        auto nn = makeAdvertiser(spec, grid, cfg.episode, seed);
        std::vector<std::unique_ptr<Publisher>> rotated;
        for (const auto& p : pubs)
          rotated.push_back(makePublisher(p, grid, cfg, spec, *nn));
        RotatingPublisher mixture(std::move(rotated), cfg.nnChunk);
        EpisodeConfig dayOne = cfg.episode;
        dayOne.days = 1;
        run_episode(*nn, mixture, dayOne, seed);
        auto& neural = dynamic_cast<NeuralAdvertiser&>(*nn);
        Rng dummy(0);
        neural.onDayStart(1, dummy);  // train on the rotation day's buffer
        pretrained = neural.net().weights();
      }

      auto makeNn = [&]() {
        auto adv = makeAdvertiser(spec, grid, cfg.episode, seed);
        if (pretrained)
          dynamic_cast<NeuralAdvertiser&>(*adv).net().weights() = *pretrained;
        return adv;
      };

      auto advOpt = makeNn();
      OnlineOptPublisher onlineOpt(grid);
      double denom = grid.currency(
          run_episode(*advOpt, onlineOpt, cfg.episode, seed).publisherRevenue());

      for (const auto& pubName : pubs) {
        auto adv = makeNn();
        auto pub = makePublisher(pubName, grid, cfg, spec, *adv);
        double revenue = grid.currency(
            run_episode(*adv, *pub, cfg.episode, seed).publisherRevenue());
        report.rows.push_back({pubName, "nn", spec.paramId, cls, seed, revenue, denom,
                               competitive_ratio(revenue, denom)});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output

inline void writeCsv(const MetricsReport& report, std::ostream& os) {
  os << "publisher,advertiser,param_id,seed,revenue,online_opt_revenue,competitive_ratio\n";
  os << std::fixed << std::setprecision(6);
  for (const auto& r : report.rows) {
    os << r.publisher << ',' << r.advertiser << ',' << r.paramId << ',' << r.seed
       << ',' << r.revenue << ',' << r.onlineOptRevenue << ',' << r.ratio << '\n';
  }
}

inline nlohmann::ordered_json summaryJson(const MetricsReport& report) {
  nlohmann::ordered_json out;
  std::vector<std::string> pubs;
  for (const auto& r : report.rows)
    if (std::find(pubs.begin(), pubs.end(), r.publisher) == pubs.end())
      pubs.push_back(r.publisher);
  std::vector<std::string> classes;
  for (const auto& r : report.rows)
    if (std::find(classes.begin(), classes.end(), r.className) == classes.end())
      classes.push_back(r.className);
  for (const auto& p : pubs) {
    auto overall = report.forPublisher(p);
    nlohmann::ordered_json entry;
    entry["mean_cr"] = overall.meanCr;
    entry["std_cr"] = overall.stdCr;
    entry["mean_revenue"] = overall.meanRevenue;
    entry["episodes"] = overall.count;
    for (const auto& c : classes) {
      auto agg = report.forPublisherClass(p, c);
      if (agg.count == 0) continue;
      entry[c] = {{"mean_cr", agg.meanCr},
                  {"std_cr", agg.stdCr},
                  {"mean_revenue", agg.meanRevenue},
                  {"episodes", agg.count}};
    }
    out[p] = entry;
  }
  if (!report.failures.empty()) out["failures"] = report.failures;
  return out;
}

inline void emit_results(const MetricsReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto csvPath = fs::path(dir) / "results.csv";
  auto jsonPath = fs::path(dir) / "summary.json";
  {
    std::ofstream csv(csvPath);
    if (!csv) throw std::runtime_error("cannot write " + csvPath.string());
    writeCsv(report, csv);
  }
  {
    std::ofstream js(jsonPath);
    if (!js) throw std::runtime_error("cannot write " + jsonPath.string());
    js << summaryJson(report).dump(2) << '\n';
  }
}

// Re-aggregate a results.csv produced by emit_results.
inline MetricsReport readCsv(std::istream& is) {
  MetricsReport report;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    ResultRow r;
    std::getline(ss, r.publisher, ',');
    std::getline(ss, r.advertiser, ',');
    std::getline(ss, r.paramId, ',');
    std::getline(ss, field, ','); r.seed = std::stoull(field);
    std::getline(ss, field, ','); r.revenue = std::stod(field);
    std::getline(ss, field, ','); r.onlineOptRevenue = std::stod(field);
    std::getline(ss, field, ','); r.ratio = std::stod(field);
    AdvertiserSpec probe{r.advertiser, 0, 0, 0, ""};
    r.className = r.advertiser == "nn" ? "nn" : probe.className();
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace adx
