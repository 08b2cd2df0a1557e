#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dol/load_profile.hpp"
#include "dol/parallel.hpp"
#include "dol/records.hpp"
#include "dol/rng.hpp"

namespace dol {

/// Canadian (Foschi-Yao) damage model in its dimensionally consistent form
///
///   mu d(alpha)/dt = [a tau_s (tau/tau_s - sigma0)_+]^b
///                  + [c tau_s (tau/tau_s - sigma0)_+]^n alpha,
///
/// with mu = 1 hour. tau_s is not free: it is the reference-rate ramp
/// strength implied by the other five effects.
struct CanadianEffects {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double n = 0.0;
  double sigma0 = 0.0;
  double tau_s = 0.0;  ///< filled in by solve_short_term_strength
  double ref_rate = kReferenceRate;

  double t_s() const { return tau_s / ref_rate; }
};

inline constexpr double kCanadianTimeConstant = 1.0;  // mu, hours

/// Lognormal hyperparameters (location, scale) for a, b, c, n and for
/// eta where sigma0 = eta / (1 + eta).
struct CanadianHyperParams {
  double mu_a = 0.0, sigma_a = 0.0;
  double mu_b = 0.0, sigma_b = 0.0;
  double mu_c = 0.0, sigma_c = 0.0;
  double mu_n = 0.0, sigma_n = 0.0;
  double mu_s0 = 0.0, sigma_s0 = 0.0;

  std::array<double, 10> to_array() const;
  static CanadianHyperParams from_array(const std::array<double, 10>& v);
  static const std::array<const char*, 10>& names();
};

/// Published hyperparameter estimates, except that mu_a is recalibrated so
/// the median-effects specimen has tau_s = 44.60 MPa with stresses in MPa
/// and time in hours (the printed mu_a = -12.6 implies tau_s of order 1e6).
CanadianHyperParams canadian_reference_hyperparams();

void validate(const CanadianHyperParams& h);

/// Draws (a, b, c, n, sigma0) and solves for tau_s. Returns empty when the
/// strength equation has no root (callers resample and count rejections).
std::optional<CanadianEffects> sample_random_effects(const CanadianHyperParams& h, Engine& engine);

/// Draws until a solvable specimen is found; `rejections` counts failures.
CanadianEffects sample_random_effects_retry(const CanadianHyperParams& h, Engine& engine,
                                            int* rejections = nullptr, int max_attempts = 1000);

/// log alpha(t) for a fresh specimen under tau(t) = rate * t (the implicit
/// solution's damage, rearranged so the c-term factors cancel analytically).
/// Returns -inf below the threshold.
double canadian_log_ramp_damage(const CanadianEffects& e, double rate, double t);

/// Solves the reference-rate ramp equation for T_s, fills e.tau_s and returns
/// T_s. Throws BracketError when no root exists.
double solve_short_term_strength(CanadianEffects& e);

/// Residual of the reference ramp equation in log-damage form at T (zero at
/// T_s); exposed for tests.
double short_term_strength_residual(const CanadianEffects& e, double t);

struct CanadianConstantOutcome {
  Phase phase = Phase::survived;
  double time = 0.0;             ///< failure time, or T1 for survivors
  double log_damage = 0.0;       ///< log alpha(T1) for survivors; -inf for no damage
};

/// Constant-load outcome with the initial ramp at the reference rate.
CanadianConstantOutcome canadian_failure_time_constant(const CanadianEffects& e,
                                                       const ConstantProfile& profile);

/// Absolute failure time on the reference-rate reload ramp given log alpha(T1).
double canadian_failure_time_rcr(const CanadianEffects& e, double log_damage_at_t1,
                                 const RcrProfile& profile);

/// Ramp failure time at an arbitrary rate (returns T_s when rate equals the
/// reference rate).
double canadian_failure_time_ramp_rate(const CanadianEffects& e, double rate);

/// Failure time under a step profile, or empty when the specimen survives the
/// horizon; segments are propagated with the exact linear-ODE update.
std::optional<double> canadian_failure_time_piecewise(const CanadianEffects& e,
                                                      const PiecewiseProfile& profile);

/// Failure time or empty (censored) for a test-group profile.
std::optional<double> canadian_failure_time(const CanadianEffects& e, const LoadProfile& profile);

/// d(alpha)/dt under the model for use with the ODE oracle.
double canadian_damage_rate(const CanadianEffects& e, double load, double alpha);

struct CanadianSimulation {
  std::vector<FailureRecord> records;
  int rejections = 0;
};

/// Simulates every group of the manifest (at its listed size) with
/// per-specimen counter-derived streams. `stream_offset` selects an
/// independent replicate for the same seed.
CanadianSimulation canadian_simulate_dataset(const CanadianHyperParams& h,
                                             const DatasetManifest& manifest, std::uint64_t seed,
                                             Execution execution = Execution::parallel,
                                             std::uint64_t stream_offset = 0);

/// Failure times only (hours; +inf for censored), ordered by manifest group.
std::vector<std::vector<double>> canadian_simulate_times(const CanadianHyperParams& h,
                                                         const DatasetManifest& manifest,
                                                         std::uint64_t seed, std::uint64_t stream,
                                                         Execution execution, int* rejections);

// ---------------------------------------------------------------------------
// Summary statistics and ABC

/// Per-group summary blocks. Ramp groups: 19 quantiles of log T_f. Hold
/// groups: proportion surviving to T1, 19 quantiles of log T_f among failures
/// by T1, and 19 quantiles of log(T_f - T1) among reload failures. A block is
/// empty when the group has no observations of that kind.
struct GroupSummary {
  int group = 0;
  std::optional<double> survival;
  std::optional<std::vector<double>> failure_quantiles;
  std::optional<std::vector<double>> reload_quantiles;
  int failure_count = 0;  ///< times behind failure_quantiles
  int reload_count = 0;
};

/// Quantile blocks resting on fewer observed times than this are left out of
/// the ABC distance; the survival proportion still reflects the count.
inline constexpr int kMinQuantileBlockCount = 10;

struct SummaryStats {
  std::vector<GroupSummary> groups;

  /// Flattened layout: for each group in manifest order, [survival]
  /// [19 failure quantiles] [19 reload quantiles], skipping absent blocks.
  std::vector<double> flatten() const;
};

SummaryStats compute_summary_stats(const std::vector<FailureRecord>& records,
                                   const DatasetManifest& manifest);
SummaryStats summary_from_times(const std::vector<std::vector<double>>& times,
                                const DatasetManifest& manifest);

/// Component scales for the ABC distance (bootstrap SD of each statistic of
/// the observed dataset, floored away from zero).
struct SummaryScales {
  std::vector<GroupSummary> groups;
};

SummaryScales bootstrap_scales(const std::vector<FailureRecord>& records,
                               const DatasetManifest& manifest, int replicates,
                               std::uint64_t seed);

/// Root-mean-square standardised difference over the observed components.
/// +inf when a block used from `observed` is missing from `simulated`.
double summary_distance(const SummaryStats& simulated, const SummaryStats& observed,
                        const SummaryScales& scales);

struct PriorBox {
  std::array<double, 10> lower{};
  std::array<double, 10> upper{};

  bool contains(const std::array<double, 10>& v) const;
};

/// Uniform boxes bracketing the published 95% intervals (mu_a shifted like the
/// reference set).
PriorBox canadian_default_prior();

struct AbcConfig {
  double tolerance = 2.0;  ///< delta
  int burn_in = 100'000;
  int thinning = 10'000;
  int samples = 500;
  /// Random-walk scales for (mu_x, log sigma_x) pairs; tuned during burn-in.
  std::array<double, 10> proposal_scales{0.05, 0.05, 0.02, 0.05, 0.5, 0.05,
                                          0.05, 0.05, 0.05, 0.05};
  int tune_interval = 100;
  double min_acceptance = 0.001;
  int bootstrap_replicates = 200;
};

struct AbcSample {
  CanadianHyperParams params;
  double distance = 0.0;
};

struct AbcResult {
  std::vector<AbcSample> samples;
  double acceptance_rate = 0.0;
  int iterations = 0;
  int rejected_specimens = 0;
};

/// ABC-MCMC: propose, simulate a dataset with the observed design, accept
/// when the summary distance is within the tolerance (Metropolis-Hastings
/// with uniform priors and a symmetric walk on (mu_x, log sigma_x)). While
/// the chain is still farther than the tolerance during burn-in it accepts
/// any proposal that does not increase the distance.
AbcResult abc_mcmc_fit(const SummaryStats& observed, const SummaryScales& scales,
                       const DatasetManifest& manifest, const AbcConfig& cfg,
                       const PriorBox& prior, const CanadianHyperParams& start,
                       std::uint64_t seed);

}  // namespace dol
