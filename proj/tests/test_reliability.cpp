#include <gtest/gtest.h>

#include <cmath>

#include "dol/error.hpp"
#include "dol/reliability.hpp"
#include "dol/units.hpp"

using namespace dol;

TEST(Reliability, BetaIndexAndGrid) {
  EXPECT_DOUBLE_EQ(beta_index(0.5), 0.0);
  EXPECT_NEAR(beta_index(0.025), 1.959963984540054, 1e-12);
  EXPECT_TRUE(std::isinf(beta_index(0.0)) && beta_index(0.0) > 0);
  EXPECT_TRUE(std::isinf(beta_index(1.0)) && beta_index(1.0) < 0);
  const auto g = phi_grid(0.5, 1.5, 0.05);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_NEAR(g.back(), 1.5, 1e-12);
}

TEST(Reliability, LoadScale) {
  const LoadModelConfig cfg;
  EXPECT_NEAR(cfg.load_scale(1.0), 20.68 / (0.25 * 1.25 + 1.5), 1e-12);
  EXPECT_DOUBLE_EQ(cfg.horizon_hours(), 50 * kHoursPerYear);
  LoadModelConfig bad;
  bad.dead_sd = -1.0;
  EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Reliability, LoadPathMoments) {
  const LoadModelConfig cfg;
  const int n = 4000;
  double events = 0.0, live_time = 0.0;
  for (int i = 0; i < n; ++i) {
    auto eng = make_engine(77, streams::load_path, i);
    const auto path = sample_standard_path(cfg, eng);
    ASSERT_DOUBLE_EQ(path.starts.front(), 0.0);
    ASSERT_GE(path.dead, 0.0);
    events += path.extraordinary_events;
    for (std::size_t j = 0; j < path.live.size(); ++j) {
      const double end = j + 1 < path.starts.size() ? path.starts[j + 1] : path.horizon;
      live_time += path.live[j] * (end - path.starts[j]);
    }
  }
  // One event per year on average.
  EXPECT_NEAR(events / n, 50.0, 0.5);
  // Time-averaged live load: sustained mean plus events active 2 weeks per year.
  const double sustained = cfg.sustained_shape * cfg.sustained_scale;
  const double extra = cfg.extra_shape * cfg.extra_scale * (2.0 * kHoursPerWeek) / kHoursPerYear;
  EXPECT_NEAR(live_time / (n * cfg.horizon_hours()), sustained + extra, 0.02 * (sustained + extra));
}

TEST(Reliability, ProfileScalesLinearlyInPhi) {
  const LoadModelConfig cfg;
  auto eng = make_engine(5, streams::load_path, 0);
  const auto path = sample_standard_path(cfg, eng);
  const auto a = to_profile(path, cfg, 0.7);
  const auto b = to_profile(path, cfg, 1.4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(b.values()[j], 2.0 * a.values()[j], 1e-12);
}

TEST(Reliability, EstimatorsAgree) {
  ReliabilityConfig cfg;
  cfg.trials = 4000;
  const std::vector<double> phis = {1.2, 2.0};
  for (const ModelParams& m : {ModelParams{UsParams{}}, ModelParams{gamma_reference_params()}}) {
    cfg.estimator = PfEstimator::conditional;
    const auto cond = prob_failure_curve(m, phis, cfg, 3);
    cfg.estimator = PfEstimator::indicator;
    const auto ind = prob_failure_curve(m, phis, cfg, 3);
    for (std::size_t i = 0; i < phis.size(); ++i) {
      const double se = std::sqrt(std::max(cond[i] * (1 - cond[i]), 1e-4) / cfg.trials);
      EXPECT_NEAR(cond[i], ind[i], 4.0 * se) << model_name(kind_of(m)) << " phi=" << phis[i];
    }
  }
}

TEST(Reliability, SerialAndParallelIdentical) {
  ReliabilityConfig cfg;
  cfg.trials = 300;
  const std::vector<double> phis = {0.8, 1.0, 1.3};
  for (const ModelParams& m : {ModelParams{UsParams{}}, ModelParams{canadian_reference_hyperparams()},
                               ModelParams{gamma_reference_params()}}) {
    cfg.execution = Execution::serial;
    const auto a = prob_failure_curve(m, phis, cfg, 8);
    cfg.execution = Execution::parallel;
    const auto b = prob_failure_curve(m, phis, cfg, 8);
    EXPECT_EQ(a, b);
  }
}

TEST(Reliability, BandContainsPointCurve) {
  ReliabilityConfig cfg;
  cfg.trials = 500;
  const UsParams p;
  const auto draws = us_parameter_draws(p, 1.0, 1.0, 0.01, 10, 4);
  ASSERT_EQ(draws.size(), 10u);
  const auto phis = phi_grid(0.8, 1.2, 0.1);
  const auto curve = phi_beta_curve(p, draws, phis, cfg, 200, 6);
  for (std::size_t i = 0; i < phis.size(); ++i) {
    EXPECT_LE(curve.beta_lo[i], curve.beta[i]);
    EXPECT_GE(curve.beta_hi[i], curve.beta[i]);
  }
  const auto none = phi_beta_curve(p, {}, phis, cfg, 200, 6);
  EXPECT_EQ(none.beta_lo, none.beta);
  EXPECT_EQ(none.beta_hi, none.beta);
}
