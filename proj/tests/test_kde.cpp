#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dol/error.hpp"
#include "dol/kde.hpp"

using namespace dol;

namespace {

std::vector<double> normal_sample(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = N(rng);
  return x;
}

double direct_kde(const std::vector<double>& x, double h, double at) {
  double s = 0.0;
  for (double v : x) {
    const double z = (at - v) / h;
    s += std::exp(-0.5 * z * z);
  }
  return s / (x.size() * h * std::sqrt(2.0 * M_PI));
}

}  // namespace

TEST(Kde, GridMatchesDirectSumAtSameBandwidth) {
  const auto x = normal_sample(5000, 3);
  const KernelDensity kde(x);
  EXPECT_FALSE(kde.used_fallback());
  for (double at : {-2.5, -1.0, 0.0, 0.4, 1.7}) {
    const double direct = direct_kde(x, kde.bandwidth(), at);
    EXPECT_NEAR(kde.log_density(at), std::log(direct), 1e-3) << at;
  }
}

TEST(Kde, RecoversNormalDensity) {
  const auto x = normal_sample(50'000, 5);
  const KernelDensity kde(x);
  for (double at : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const double truth = -0.5 * at * at - 0.5 * std::log(2.0 * M_PI);
    // Four standard errors of a Gaussian-kernel estimate, relative.
    const double se = std::sqrt(1.0 / (50'000.0 * kde.bandwidth() * 2.0 * std::sqrt(M_PI) * std::exp(truth)));
    EXPECT_NEAR(kde.log_density(at), truth, 4.0 * se + 0.005) << at;
  }
  // Diffusion bandwidth for a normal sample is close to the normal-reference rule.
  const double silverman = 1.06 * std::pow(50'000.0, -0.2);
  EXPECT_GT(kde.bandwidth(), 0.5 * silverman);
  EXPECT_LT(kde.bandwidth(), 1.5 * silverman);
}

TEST(Kde, PlugInRuleAndFloor) {
  auto x = normal_sample(2000, 9);
  KdeConfig cfg;
  cfg.rule = BandwidthRule::plug_in;
  const KernelDensity kde(x, cfg);
  std::vector<double> s = x;
  std::sort(s.begin(), s.end());
  double mean = 0.0, ss = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (x.size() - 1));
  auto q = [&](double p) {
    const double h = (s.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    return s[lo] + (h - lo) * (s[lo + 1] - s[lo]);
  };
  const double iqr = q(0.75) - q(0.25);
  EXPECT_NEAR(kde.bandwidth(), 0.9 * std::min(sd, iqr / 1.34) * std::pow(2000.0, -0.2), 1e-12);
  // Far outside the support the density is floored, not -inf.
  EXPECT_TRUE(std::isfinite(kde.log_density(1e6)));
  EXPECT_DOUBLE_EQ(kde.log_density(1e6), kde.log_floor());
}

TEST(Kde, TooFewSamplesThrows) {
  const auto x = normal_sample(50, 1);
  const std::vector<double> q = {0.0};
  EXPECT_THROW(kde_log_density(x, q), DataError);
}
