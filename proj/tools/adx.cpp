// Command-line front end: single episodes, parameter sweeps, the neural
// adversary protocols, standalone reserve estimation, and CSV re-aggregation.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adx/harness.hpp"
#include "adx/km.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void applyConfigFile(adx::ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path);
  json j = json::parse(in);
  if (j.contains("episode")) {
    const auto& e = j["episode"];
    cfg.episode.days = e.value("days", cfg.episode.days);
    cfg.episode.impressionsPerDay =
        e.value("impressions_per_day", cfg.episode.impressionsPerDay);
    cfg.episode.dailyBudget = e.value("daily_budget", cfg.episode.dailyBudget);
    cfg.episode.gridResolution = e.value("grid_resolution", cfg.episode.gridResolution);
  }
  cfg.baseSeed = j.value("base_seed", cfg.baseSeed);
  cfg.numSeeds = j.value("num_seeds", cfg.numSeeds);
  cfg.pointsPerAxis = j.value("points_per_axis", cfg.pointsPerAxis);
  if (j.contains("publishers"))
    cfg.publishers = j["publishers"].get<std::vector<std::string>>();
  if (j.contains("hba")) {
    const auto& h = j["hba"];
    std::string mode = h.value("mode", std::string("sum"));
    if (mode == "sum") cfg.hba.mode = adx::PosteriorMode::Sum;
    else if (mode == "product") cfg.hba.mode = adx::PosteriorMode::Product;
    else throw std::runtime_error("hba.mode must be sum or product");
    cfg.hba.gamma = h.value("gamma", cfg.hba.gamma);
    cfg.hba.alpha = h.value("alpha", cfg.hba.alpha);
    cfg.hba.likelihoodFloor = h.value("likelihood_floor", cfg.hba.likelihoodFloor);
    if (h.contains("km")) {
      const auto& k = h["km"];
      cfg.hba.km.k = k.value("k", cfg.hba.km.k);
      cfg.hba.km.l = k.value("l", cfg.hba.km.l);
      cfg.hba.km.kc = k.value("kc", cfg.hba.km.kc);
    }
  }
  if (j.contains("baselines")) {
    const auto& b = j["baselines"];
    cfg.baselines.ucbExploration = b.value("ucb_exploration", cfg.baselines.ucbExploration);
    cfg.baselines.ucbEpsilon = b.value("ucb_epsilon", cfg.baselines.ucbEpsilon);
    cfg.baselines.qAlpha = b.value("q_alpha", cfg.baselines.qAlpha);
    cfg.baselines.qGamma = b.value("q_gamma", cfg.baselines.qGamma);
    cfg.baselines.qTau = b.value("q_tau", cfg.baselines.qTau);
  }
  if (j.contains("nn")) {
    const auto& n = j["nn"];
    if (n.contains("hidden_layers"))
      cfg.nnHiddenLayers = n["hidden_layers"].get<std::vector<int>>();
    cfg.nnChunk = n.value("chunk", cfg.nnChunk);
    cfg.nnSeeds = n.value("seeds", cfg.nnSeeds);
  }
  cfg.threads = j.value("threads", cfg.threads);
  cfg.outDir = j.value("out_dir", cfg.outDir);
}

adx::AdvertiserSpec parseAdvertiser(const std::string& family,
                                    const std::string& params) {
  adx::AdvertiserSpec spec{family, 0, 0, 0, params};
  std::stringstream ss(params);
  std::string tok;
  double* slots[3] = {&spec.p1, &spec.p2, &spec.p3};
  int i = 0;
  while (std::getline(ss, tok, ',') && i < 3)
    if (!tok.empty()) *slots[i++] = std::stod(tok);
  return spec;
}

int fail(const std::string& what) {
  ordered_json err;
  err["error"] = what;
  std::cerr << err.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated posted-price auction simulator"};
  app.require_subcommand(1);

  std::string configPath;
  std::uint64_t seed = 12345;
  bool desk = false;
  std::string outDir;
  app.add_option("--config", configPath, "JSON config file");
  app.add_option("--seed", seed, "base seed");
  app.add_flag("--desk", desk, "desk-scale preset (small episodes, few seeds)");
  app.add_option("--out", outDir, "output directory");

  auto* runCmd = app.add_subcommand("run", "run one episode and log every round");
  std::string advFamily = "uniform", advParams = "1.0", pubName = "hba-km";
  runCmd->add_option("--advertiser", advFamily,
                     "greedy|uniform|normal|lognormal|exponential|logistic|ltb|ucb|qlearn|nn");
  runCmd->add_option("--params", advParams, "comma-separated family parameters");
  runCmd->add_option("--publisher", pubName,
                     "hba-km|offline-opt|online-opt|ucb-pub|qlearn-pub|fixed:<v>");

  auto* sweepCmd = app.add_subcommand("sweep", "full parameter sweep, all publishers");

  auto* nnCmd = app.add_subcommand("nn", "neural adversary protocol");
  std::string nnMode = "single";
  nnCmd->add_option("--mode", nnMode, "single|mixture");

  auto* estCmd = app.add_subcommand("estimate",
                                    "standalone reserve estimation vs a stochastic bidder");
  std::string estFamily = "uniform", estParams = "1.0";
  int estK = 2000, estL = 20, estKc = 500;
  estCmd->add_option("--advertiser", estFamily, "random bid family");
  estCmd->add_option("--params", estParams, "family parameters");
  estCmd->add_option("--k", estK, "random-query rounds");
  estCmd->add_option("--l", estL, "candidate half-width, grid steps");
  estCmd->add_option("--kc", estKc, "rounds per candidate");

  auto* reportCmd = app.add_subcommand("report", "re-aggregate a results.csv");
  std::string reportIn;
  reportCmd->add_option("--in", reportIn, "results.csv path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    adx::ExperimentConfig cfg =
        desk ? adx::ExperimentConfig::desk() : adx::ExperimentConfig::fullScale();
    if (!configPath.empty()) applyConfigFile(cfg, configPath);
    if (app.count("--seed")) cfg.baseSeed = seed;
    if (!outDir.empty()) cfg.outDir = outDir;

    if (runCmd->parsed()) {
      adx::PriceGrid grid(cfg.episode.gridResolution);
      adx::AdvertiserSpec spec = parseAdvertiser(advFamily, advParams);
      auto adv = adx::makeAdvertiser(spec, grid, cfg.episode, cfg.baseSeed);
      auto pub = adx::makePublisher(pubName, grid, cfg, spec, *adv);
      adx::EpisodeLog log = adx::run_episode(*adv, *pub, cfg.episode, cfg.baseSeed);
      std::filesystem::create_directories(cfg.outDir);
      auto path = std::filesystem::path(cfg.outDir) / "episode.csv";
      std::ofstream out(path);
      if (!out) return fail("cannot write " + path.string());
      log.toCsv(out);
      ordered_json summary;
      summary["advertiser"] = adv->name();
      summary["publisher"] = pub->name();
      summary["seed"] = cfg.baseSeed;
      summary["rounds"] = log.rounds.size();
      summary["publisher_revenue"] = grid.currency(log.publisherRevenue());
      summary["log"] = path.string();
      std::cout << summary.dump(2) << '\n';
      return 0;
    }

    if (sweepCmd->parsed()) {
      adx::MetricsReport report = adx::run_sweep(cfg);
      adx::emit_results(report, cfg.outDir);
      std::cout << adx::summaryJson(report).dump(2) << '\n';
      return report.failures.empty() ? 0 : 1;
    }

    if (nnCmd->parsed()) {
      if (nnMode != "single" && nnMode != "mixture")
        return fail("--mode must be single or mixture");
      adx::NnProtocol mode =
          nnMode == "single" ? adx::NnProtocol::Single : adx::NnProtocol::Mixture;
      adx::MetricsReport report = adx::run_nn_protocol(mode, cfg);
      adx::emit_results(report, cfg.outDir);
      std::cout << adx::summaryJson(report).dump(2) << '\n';
      return 0;
    }

    if (estCmd->parsed()) {
      adx::PriceGrid grid(cfg.episode.gridResolution);
      adx::AdvertiserSpec spec = parseAdvertiser(estFamily, estParams);
      adx::BidDistribution dist(grid, adx::specToDist(spec));
      adx::RandomKmEstimator est(grid, {estK, estL, estKc}, /*keepTrace=*/true);
      adx::Rng envRng(adx::mixSeed(cfg.baseSeed, adx::hashLabel("estimate-env")));
      adx::Rng pubRng(adx::mixSeed(cfg.baseSeed, adx::hashLabel("estimate-pub")));
      while (!est.finished()) {
        adx::Price r = est.nextReserve(pubRng);
        adx::Price b = dist.sample(envRng);
        est.observe(adx::CensoredObservation{r, b.index >= r.index});
      }
      std::filesystem::create_directories(cfg.outDir);
      auto tracePath = std::filesystem::path(cfg.outDir) / "estimate_trace.csv";
      auto candPath = std::filesystem::path(cfg.outDir) / "estimate_candidates.csv";
      { std::ofstream t(tracePath); est.writeTraceCsv(t); }
      { std::ofstream c(candPath); est.writeCandidateCsv(c); }
      adx::Price truth = adx::argmax_revenue(grid, dist.tailGrid());
      ordered_json out;
      out["advertiser"] = spec.family;
      out["params"] = estParams;
      out["estimated_reserve"] = grid.value(est.result());
      out["phase1_argmax"] = grid.value(est.phase1Argmax());
      out["true_optimum"] = grid.value(truth);
      out["true_optimum_revenue"] = grid.value(truth) * dist.tail(truth);
      out["estimate_revenue"] = grid.value(est.result()) * dist.tail(est.result());
      out["trace"] = tracePath.string();
      out["candidates"] = candPath.string();
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (reportCmd->parsed()) {
      std::ifstream in(reportIn);
      if (!in) return fail("cannot read " + reportIn);
      adx::MetricsReport report = adx::readCsv(in);
      std::cout << adx::summaryJson(report).dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return 0;
}
