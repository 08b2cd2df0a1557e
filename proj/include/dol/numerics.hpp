#pragma once

#include <functional>
#include <span>
#include <vector>

namespace dol {

struct RootConfig {
  double abs_tol = 1e-14;
  double rel_tol = 1e-13;
  int max_iterations = 300;
};

/// Bracketed root of a continuous scalar function (Brent/TOMS 748 style).
/// Requires f(lo) * f(hi) <= 0; throws BracketError otherwise and
/// ConvergenceError when the iteration budget runs out.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const RootConfig& cfg = {});

/// Root of an increasing function of x on (lower, upper), bracketed by
/// doubling the step away from `guess` along the x axis. Callers working on
/// a log-time axis pass log-times. Throws BracketError when the sign change
/// cannot be found inside the limits.
double find_increasing_root(const std::function<double(double)>& f, double guess, double step,
                            double lower, double upper, const RootConfig& cfg = {});

/// gamma(s, x) = integral_0^x e^-u u^(s-1) du. s <= 0 or x < 0 throw DomainError.
double lower_incomplete_gamma(double s, double x);

/// log(gamma(s, x) e^x / x^s), finite for x -> 0 (limit -log s). Used by the
/// implicit ADM solutions, where the x^s and e^-x factors cancel analytically.
double log_scaled_lower_gamma(double s, double x);

/// Regularised gamma CDF P(X <= x) for X ~ Gamma(shape, scale).
double gamma_cdf(double x, double shape, double scale);

/// d/d(shape) of gamma_cdf at fixed x and scale, by central differencing in
/// the shape (step 1e-6 max(1, shape)); one-sided near shape = 0.
double gamma_cdf_shape_derivative(double x, double shape, double scale);

double normal_cdf(double z);
double normal_quantile(double p);

/// E[Z_(i:n)] for i = 1..n, by quadrature of the exact order-statistic density.
std::vector<double> expected_normal_order_stats(int n);

/// Blom's approximation Phi^-1((i - 0.375) / (n + 0.25)); a fast mode only.
std::vector<double> blom_scores(int n);

/// Order-statistic interpolation quantiles (linear between closest ranks,
/// the "type 7" definition). `samples` need not be sorted.
std::vector<double> quantiles(std::span<const double> samples, std::span<const double> probs);
double quantile_sorted(std::span<const double> sorted, double prob);

/// The 19 probabilities 0.05, 0.10, ..., 0.95.
std::vector<double> equally_spaced_probs(int count = 19);

// ---------------------------------------------------------------------------
// Damage ODE oracle

struct OdeConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-200;  // damage below this is irrelevant to the failure time
  double initial_step = 1e-6;
  double min_step = 1e-300;
  long max_steps = 5'000'000;
};

/// Result of integrating d(alpha)/dt = f(t, alpha) until alpha reaches 1.
struct OdeOutcome {
  bool failed = false;
  double time = 0.0;    ///< failure time, or the horizon when survived
  double damage = 0.0;  ///< alpha at `time`
};

using DamageRate = std::function<double(double t, double alpha)>;

/// Adaptive Dormand-Prince 5(4) integration of a nonnegative damage rate from
/// (t0, alpha0) to `horizon`, locating the first crossing of alpha = 1.
/// `kinks` are times where the rate is not smooth; steps stop exactly there.
/// Throws IntegrationError on step underflow or an exhausted step budget.
OdeOutcome integrate_damage_ode(const DamageRate& rate, double t0, double alpha0, double horizon,
                                std::span<const double> kinks = {}, const OdeConfig& cfg = {});

}  // namespace dol
