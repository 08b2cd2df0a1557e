#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "dol/error.hpp"
#include "dol/records.hpp"
#include "dol/us_model.hpp"

using namespace dol;

namespace {

// Damage is additive in this model: alpha(t) = int_0^t exp(-A + B' tau(s)/s_z) ds.
// Composite Simpson on `cells` panels between each pair of kinks, then
// bisection on alpha = 1.
double damage_quadrature(const UsParams& p, double z, const std::function<double(double)>& tau,
                         double t0, double t1, int cells = 4000) {
  const double s = std::exp(p.w * z);
  auto f = [&](double t) { return std::exp(-p.A + p.b_prime() * tau(t) / s); };
  const double h = (t1 - t0) / cells;
  double acc = f(t0) + f(t1);
  for (int i = 1; i < cells; ++i) acc += f(t0 + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double bisect(const std::function<double(double)>& g, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(UsModel, RampMatchesQuadrature) {
  const UsParams p;
  for (double z : {-1.5, 0.0, 0.8}) {
    for (double k : {26.78, kReferenceRate, 8034.0}) {
      const double t = us_failure_time_ramp(p, z, k);
      const double oracle = bisect(
          [&](double T) {
            return damage_quadrature(p, z, [k](double s) { return k * s; }, 0.0, T) - 1.0;
          },
          0.0, 4.0 * t);
      EXPECT_NEAR(t, oracle, 1e-8 * oracle) << "z=" << z << " k=" << k;
    }
  }
}

TEST(UsModel, ReferenceRampGivesMedianStrength) {
  // At Z = 0 a fresh specimen on the reference ramp fails near tau_M: the
  // failure load solves B'k/s e^A = exp(B' tau/s) - 1.
  const UsParams p;
  const double t = us_failure_time_ramp(p, 0.0, kReferenceRate);
  const double load = kReferenceRate * t;
  EXPECT_NEAR(std::exp(p.b_prime() * load) - 1.0, p.b_prime() * kReferenceRate * std::exp(p.A),
              1e-9 * std::exp(p.b_prime() * load));
}

TEST(UsModel, ConstantAndReloadMatchQuadrature) {
  const UsParams p;
  const double z = -0.3;
  const auto hold = make_constant(kReferenceRate, 31.02, 2190.0);
  const auto out = us_failure_time_constant(p, z, hold);
  auto tau = [&](double t) { return std::min(kReferenceRate * t, 31.02); };
  if (out.phase == Phase::survived) {
    const double a = damage_quadrature(p, z, tau, 0.0, hold.ramp_end()) +
                     damage_quadrature(p, z, tau, hold.ramp_end(), 2190.0);
    EXPECT_NEAR(out.damage, a, 1e-8 * a);
  } else {
    ASSERT_EQ(out.phase, Phase::hold);
    const double r = hold.ramp_end();
    const double oracle = bisect(
        [&](double T) {
          return damage_quadrature(p, z, tau, 0.0, r) + damage_quadrature(p, z, tau, r, T) - 1.0;
        },
        r, 2190.0);
    EXPECT_NEAR(out.time, oracle, 1e-7 * oracle);
  }
  // A weak specimen survives a low hold with damage carried into the reload.
  const auto low = make_constant(kReferenceRate, 15.0, 2190.0);
  const auto rcr = make_rcr(low, kReferenceRate);
  const auto survived = us_failure_time_constant(p, 0.5, low);
  ASSERT_EQ(survived.phase, Phase::survived);
  const double tf = us_failure_time_rcr(p, 0.5, rcr, survived.damage);
  const double oracle = bisect(
      [&](double T) {
        return survived.damage +
               damage_quadrature(p, 0.5, [](double s) { return kReferenceRate * (s - 2190.0); },
                                 2190.0, T) -
               1.0;
      },
      2190.0, 2191.0);
  EXPECT_NEAR(tf, oracle, 1e-9 * oracle);
  EXPECT_THROW(us_failure_time_rcr(p, 0.5, rcr, 1.5), DomainError);
}

TEST(UsModel, SimulationIsDeterministicAndConsistent) {
  const UsParams p;
  const auto m = reference_design();
  const auto& g9 = m.groups[8];
  const auto a = us_simulate(p, g9, 200, 42, Execution::parallel);
  const auto b = us_simulate(p, g9, 200, 42, Execution::serial);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].outcome, b[i].outcome);
    EXPECT_EQ(a[i].time, b[i].time);
    EXPECT_NO_THROW(check_consistent(a[i], g9));
  }
}

TEST(UsModel, FitRecoversTruthOnFullDesign) {
  const UsParams truth;
  const auto m = reference_design();
  std::vector<FailureRecord> recs;
  for (const auto& g : m.groups) {
    auto r = us_simulate(truth, g, g.size, 2024);
    recs.insert(recs.end(), r.begin(), r.end());
  }
  const double tau_m = reference_median_strength(recs, m);
  // Median ramp failure load (Z = 0) is log(B'k e^A + 1)/B', not tau_M itself.
  const double median_load = std::log(truth.b_prime() * kReferenceRate * std::exp(truth.A) + 1.0) / truth.b_prime();
  EXPECT_NEAR(tau_m, median_load, 0.06 * median_load);
  const auto fit = us_nls_fit(recs, m, tau_m);
  EXPECT_NEAR(fit.estimate.w, truth.w, 0.1 * truth.w);
  EXPECT_NEAR(fit.estimate.b_prime(), truth.b_prime(), 0.15 * truth.b_prime());
  EXPECT_GT(fit.se_A, 0.0);
  EXPECT_GT(fit.se_B, 0.0);
  EXPECT_GT(fit.se_w, 0.0);
  EXPECT_EQ(fit.records_used + static_cast<int>(fit.excluded_ids.size()) +
                static_cast<int>(fit.unusable_ids.size()),
            static_cast<int>(recs.size()));
  ASSERT_FALSE(fit.trace.empty());
  EXPECT_EQ(fit.trace.back().iteration, fit.iterations);
}
