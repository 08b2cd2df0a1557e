#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dol/error.hpp"
#include "dol/gamma_process.hpp"
#include "dol/records.hpp"

using namespace dol;

namespace {

GammaProcessParams flat_params(double a = 0.05) {
  GammaProcessParams p;
  p.u = 0.05;
  p.tau_star = 4.0;
  p.xi = 0.3;
  p.law.powers = {a};
  return p;
}

// Independent ladder sum on a fresh ramp tau = k t: level l has been exceeded
// for t - l/k hours. Increments of width `step` from 0 up to kt.
double ramp_eta_oracle(const GammaProcessParams& p, double k, double t, double step) {
  const double top = k * t;
  double eta = 0.0;
  for (double lo = 0.0; lo < top; lo += step) {
    const double hi = std::min(lo + step, top);
    const double w = std::max(hi - p.tau_star, 0.0) - std::max(lo - p.tau_star, 0.0);
    if (w > 0.0) eta += p.law(t - lo / k) * w;
  }
  return p.u * eta;
}

}  // namespace

TEST(GammaProcess, BrokenPowerLawShape) {
  const auto p = gamma_reference_params();
  const auto& g = p.law;
  EXPECT_NEAR(g(0.00144), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(g(0.0), 0.0);
  // Continuous at each breakpoint.
  for (double t : g.times) EXPECT_NEAR(g(t * (1 + 1e-12)), g(t * (1 - 1e-12)), 1e-9 * g(t));
  // First piece is flat for practical purposes.
  EXPECT_NEAR(g(1e-6), 1.0, 1e-7);
  EXPECT_NEAR(g(2327.0), std::pow(2327.0 / 0.00144, 0.027), 1e-9 * g(2327.0));
  EXPECT_NEAR(g(1e4), g(2327.0) * std::pow(1e4 / 2327.0, 0.094), 1e-9 * g(1e4));
  const double h = 1e-6 * 100.0;
  EXPECT_NEAR(g.derivative(100.0), (g(100.0 + h) - g(100.0 - h)) / (2 * h), 1e-6 * g.derivative(100.0));
  // Without breakpoints g(t) = t^a.
  EXPECT_NEAR(flat_params(0.2).law(5.0), std::pow(5.0, 0.2), 1e-14);
  GammaProcessParams bad = p;
  bad.law.times = {3.0, 1.0};
  EXPECT_THROW(validate(bad), DomainError);
}

TEST(GammaProcess, ConstantLoadReducesExactly) {
  const auto p = gamma_reference_params();
  for (double tau : {3.0, 20.68, 31.02}) {
    const PiecewiseProfile held({0.0}, {tau}, 1e5);
    for (double t : {1e-4, 0.3, 100.0, 2190.0, 9e4}) {
      const double expected = p.u * p.law(t) * std::max(tau - p.tau_star, 0.0);
      EXPECT_NEAR(eta_of_t(p, held, t), expected, 1e-12 * std::max(expected, 1e-300));
      EXPECT_NEAR(eta_step_profile(p, held, t), expected, 1e-12 * std::max(expected, 1e-300));
    }
  }
}

TEST(GammaProcess, LadderAgreesWithRefinedSum) {
  const auto p = gamma_reference_params();
  for (double k : {4.464226, 89.1774, kReferenceRate}) {
    for (double load : {20.0, 40.0, 60.0}) {
      const double t = load / k;
      const double eta = eta_of_t(p, make_ramp(k), t);
      const double oracle = ramp_eta_oracle(p, k, t, p.delta_tau / 10.0);
      EXPECT_NEAR(eta, oracle, 0.005 * oracle) << "k=" << k << " load=" << load;
    }
  }
}

TEST(GammaProcess, StepProfileMatchesLadder) {
  const auto p = gamma_reference_params();
  const PiecewiseProfile step({0.0, 5.0, 50.0}, {12.0, 25.0, 18.0}, 200.0);
  for (double t : {1.0, 5.0, 30.0, 120.0}) {
    const double a = eta_of_t(p, step, t);
    EXPECT_NEAR(eta_step_profile(p, step, t), a, 1e-12 * a);
  }
}

TEST(GammaProcess, DensityIsMinusSurvivalSlope) {
  const auto p = gamma_reference_params();
  const auto hold = make_constant(kReferenceRate, 31.02, 2190.0);
  const std::vector<LoadProfile> profiles = {make_ramp(89.1774), hold, make_rcr(hold, kReferenceRate)};
  const std::vector<double> times = {0.5, 100.0, 2190.005};
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double t = times[i];
    const double h = 1e-4 * std::min(t, 0.001);
    const double fd = -(gp_survival(p, profiles[i], t + h) - gp_survival(p, profiles[i], t - h)) / (2 * h);
    const double d = std::exp(gp_log_density(p, profiles[i], t));
    EXPECT_NEAR(d, fd, 5e-4 * fd) << i;
  }
  EXPECT_DOUBLE_EQ(survival_from_eta(0.0, 0.3), 1.0);
}

TEST(GammaProcess, CachedLikelihoodMatchesDirect) {
  const auto p = gamma_reference_params();
  const auto m = resized(reference_design(), 1.0, 25);
  std::vector<FailureRecord> recs;
  for (const auto& g : m.groups) {
    auto r = gp_simulate(p, g, g.size, 8);
    recs.insert(recs.end(), r.begin(), r.end());
  }
  const GpLikelihoodCache cache(recs, m);
  const double direct = cache.log_likelihood_direct(p);
  EXPECT_NEAR(cache.log_likelihood(p, Execution::serial), direct, 1e-8 * std::abs(direct));
  EXPECT_EQ(cache.log_likelihood(p, Execution::serial), cache.log_likelihood(p, Execution::parallel));
  EXPECT_NEAR(gp_log_likelihood(p, recs, m), direct, 1e-8 * std::abs(direct));
  // A censored-only dataset contributes log survival terms only.
  std::vector<FailureRecord> censored;
  for (const auto& r : recs) {
    if (r.outcome == Outcome::censored) censored.push_back(r);
  }
  if (!censored.empty()) {
    double expected = 0.0;
    for (const auto& r : censored) {
      const auto& prof = m.group(r.group).profile;
      expected += std::log(gp_survival(p, prof, test_horizon(prof)));
    }
    EXPECT_NEAR(gp_log_likelihood(p, censored, m), expected, 1e-8 * std::abs(expected) + 1e-12);
  }
}

TEST(GammaProcess, SplittingTheLawLeavesEtaUnchanged) {
  auto p = flat_params(0.08);
  auto q = p;
  q.law.times = {7.0};
  q.law.powers = {0.08, 0.08};
  q.u = p.u * p.law(7.0);
  const auto prof = make_rcr(make_constant(kReferenceRate, 25.0, 100.0), kReferenceRate);
  for (double t : {0.01, 3.0, 50.0, 100.004}) {
    EXPECT_NEAR(eta_of_t(q, prof, t), eta_of_t(p, prof, t), 1e-12 * eta_of_t(p, prof, t));
  }
  const auto v = gp_to_vector(q);
  const auto back = gp_from_vector(v, q.delta_tau);
  EXPECT_NEAR(back.u, q.u, 1e-15 * q.u);
  EXPECT_NEAR(back.law.times[0], 7.0, 1e-13);
  EXPECT_TRUE(gp_in_prior(v, GpPrior{}));
}

TEST(GammaProcess, SimulatedTimesFollowSurvival) {
  const auto p = gamma_reference_params();
  const auto prof = LoadProfile{make_ramp(89.1774)};
  const int n = 4000;
  auto t = gp_simulate_times(p, prof, n, 31);
  std::sort(t.begin(), t.end());
  // DKW: sup |F_n - F| <= sqrt(log(2/0.001)/(2n)) with probability 0.999.
  const double eps = std::sqrt(std::log(2.0 / 0.001) / (2.0 * n));
  double worst = 0.0;
  for (int i = 0; i < n; i += 10) {
    const double F = 1.0 - gp_survival(p, prof, t[i]);
    worst = std::max({worst, std::abs(F - (i + 1.0) / n), std::abs(F - double(i) / n)});
  }
  EXPECT_LT(worst, eps);
  EXPECT_EQ(gp_simulate_times(p, prof, 100, 31, Execution::serial),
            gp_simulate_times(p, prof, 100, 31, Execution::parallel));
}

TEST(GammaProcess, ShortChainIsReproducible) {
  const auto p = gamma_reference_params();
  const auto m = resized(reference_design(), 1.0, 15);
  std::vector<FailureRecord> recs;
  for (const auto& g : m.groups) {
    auto r = gp_simulate(p, g, g.size, 4);
    recs.insert(recs.end(), r.begin(), r.end());
  }
  const GpLikelihoodCache cache(recs, m);
  GpMcmcConfig cfg;
  cfg.iterations = 300;
  cfg.burn_in = 100;
  cfg.thinning = 20;
  cfg.adapt_interval = 50;
  const auto a = gp_mcmc_fit(cache, p, cfg, GpPrior{}, 12);
  const auto b = gp_mcmc_fit(cache, p, cfg, GpPrior{}, 12);
  ASSERT_EQ(a.samples.size(), 10u);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].log_likelihood, b.samples[i].log_likelihood);
  }
  EXPECT_GE(a.best.log_likelihood, cache.log_likelihood(p));
}
