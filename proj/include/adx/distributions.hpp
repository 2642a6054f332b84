#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "adx/price.hpp"
#include "adx/rng.hpp"

namespace adx {

enum class DistKind { Uniform, Normal, LogNormal, Exponential, Logistic };

inline std::string distName(DistKind k) {
  switch (k) {
    case DistKind::Uniform: return "uniform";
    case DistKind::Normal: return "normal";
    case DistKind::LogNormal: return "lognormal";
    case DistKind::Exponential: return "exponential";
    case DistKind::Logistic: return "logistic";
  }
  return "?";
}

struct DistParams {
  DistKind kind = DistKind::Uniform;
  // Uniform: U{a, b}. Normal: N(mu, sigma^2). LogNormal: ln N(mu, sigma).
  // Exponential: rate beta in grid-index units. Logistic: (mu, s).
  double a = 0.0, b = 1.0;
  double mu = 0.0, sigma = 1.0;
  double beta = 1.0;
  double s = 1.0;

  static DistParams uniform(double lo, double hi) {
    DistParams p; p.kind = DistKind::Uniform; p.a = lo; p.b = hi; return p;
  }
  static DistParams normal(double mu, double variance) {
    DistParams p; p.kind = DistKind::Normal; p.mu = mu; p.sigma = std::sqrt(variance); return p;
  }
  static DistParams logNormal(double mu, double sigma) {
    DistParams p; p.kind = DistKind::LogNormal; p.mu = mu; p.sigma = sigma; return p;
  }
  static DistParams exponential(double beta) {
    DistParams p; p.kind = DistKind::Exponential; p.beta = beta; return p;
  }
  static DistParams logistic(double mu, double s) {
    DistParams p; p.kind = DistKind::Logistic; p.mu = mu; p.s = s; return p;
  }
};

inline double stdNormalCdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// A bid distribution over the price grid: continuous samples are clipped to
// [0,1] and snapped to the nearest grid point. Tail probabilities are the
// exact mass of the snapped distribution, precomputed per grid index.
class BidDistribution {
 public:
  BidDistribution(const PriceGrid& grid, const DistParams& params)
      : grid_(grid), params_(params) {
    validate(params);
    tail_.resize(grid.size());
    tail_[0] = 1.0;
    for (int i = 1; i < grid.size(); ++i) {
      double lo = (static_cast<double>(i) - 0.5) / grid.resolution();
      tail_[i] = 1.0 - rawCdf(lo);
    }
  }

  const DistParams& params() const { return params_; }
  DistKind kind() const { return params_.kind; }
  const PriceGrid& grid() const { return grid_; }

  Price sample(Rng& rng) const { return grid_.snapNearest(rawSample(rng)); }

  // P(snapped bid >= p).
  double tail(Price p) const { return tail_[p.index]; }
  const std::vector<double>& tailGrid() const { return tail_; }

  // CDF of the underlying continuous distribution at value x in [0,1] units.
  double rawCdf(double x) const {
    const DistParams& p = params_;
    switch (p.kind) {
      case DistKind::Uniform:
        if (x <= p.a) return 0.0;
        if (x >= p.b) return 1.0;
        return (x - p.a) / (p.b - p.a);
      case DistKind::Normal:
        return stdNormalCdf((x - p.mu) / p.sigma);
      case DistKind::LogNormal:
        if (x <= 0.0) return 0.0;
        return stdNormalCdf((std::log(x) - p.mu) / p.sigma);
      case DistKind::Exponential:
        // beta is a rate in grid-index units; x in value units.
        if (x <= 0.0) return 0.0;
        return 1.0 - std::exp(-p.beta * x * grid_.resolution());
      case DistKind::Logistic:
        return 1.0 / (1.0 + std::exp(-(x - p.mu) / p.s));
    }
    return 0.0;
  }

  std::string name() const { return distName(params_.kind); }

  static void validate(const DistParams& p) {
    switch (p.kind) {
      case DistKind::Uniform:
        if (!(p.b > p.a) || p.a < 0.0)
          throw std::invalid_argument("uniform requires 0 <= a < b");
        break;
      case DistKind::Normal:
      case DistKind::LogNormal:
        if (!(p.sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
        break;
      case DistKind::Exponential:
        if (!(p.beta > 0.0)) throw std::invalid_argument("beta must be > 0");
        break;
      case DistKind::Logistic:
        if (!(p.s > 0.0)) throw std::invalid_argument("logistic s must be > 0");
        break;
    }
  }

 private:
  double rawSample(Rng& rng) const {
    const DistParams& p = params_;
    switch (p.kind) {
      case DistKind::Uniform: {
        std::uniform_real_distribution<double> d(p.a, p.b);
        return d(rng);
      }
      case DistKind::Normal: {
        std::normal_distribution<double> d(p.mu, p.sigma);
        return d(rng);
      }
      case DistKind::LogNormal: {
        std::normal_distribution<double> d(p.mu, p.sigma);
        return std::exp(d(rng));
      }
      case DistKind::Exponential: {
        std::exponential_distribution<double> d(p.beta);
        return d(rng) / grid_.resolution();
      }
      case DistKind::Logistic: {
        std::uniform_real_distribution<double> d(1e-12, 1.0 - 1e-12);
        double u = d(rng);
        return p.mu + p.s * std::log(u / (1.0 - u));
      }
    }
    return 0.0;
  }

  PriceGrid grid_;
  DistParams params_;
  std::vector<double> tail_;
};

}  // namespace adx
