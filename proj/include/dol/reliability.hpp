#pragma once

#include <cstdint>
#include <vector>

#include "dol/gof.hpp"
#include "dol/load_profile.hpp"
#include "dol/parallel.hpp"
#include "dol/rng.hpp"

namespace dol {

/// Residential load model: tau(t) = phi R_o (gamma D_d + D_l(t)) / (gamma
/// alpha_d + alpha_l) with D_l = sustained + extraordinary live load.
struct LoadModelConfig {
  double r0 = 20.68;  ///< MPa
  double gamma = 0.25;
  double alpha_d = 1.25;
  double alpha_l = 1.5;
  double horizon_years = 50.0;
  double dead_mean = 1.05;
  double dead_sd = 0.1;
  double sustained_mean_years = 10.0;
  double sustained_shape = 3.122;
  double sustained_scale = 0.0481;
  double extra_mean_weeks = 2.0;
  double extra_shape = 0.826;
  double extra_scale = 0.1023;
  double extra_interarrival_years = 1.0;

  double horizon_hours() const;
  /// MPa per unit of standardized load at the given phi.
  double load_scale(double phi) const;
};

void validate(const LoadModelConfig& cfg);

/// phi-free load history: the dead load draw and the live load as a step
/// function on [0, horizon).
struct StandardLoadPath {
  double dead = 0.0;
  std::vector<double> starts;  ///< hours, starts[0] = 0
  std::vector<double> live;
  double horizon = 0.0;
  int extraordinary_events = 0;
};

/// Sustained periods tile the horizon starting fresh at t = 0;
/// extraordinary events arrive as a Poisson process and add to the live load
/// while active. The dead load is clamped at 0.
StandardLoadPath sample_standard_path(const LoadModelConfig& cfg, Engine& engine);

/// tau(t) for the given dead load value (the path's own draw by default).
PiecewiseProfile to_profile(const StandardLoadPath& path, const LoadModelConfig& cfg, double phi);
PiecewiseProfile to_profile(const StandardLoadPath& path, const LoadModelConfig& cfg, double phi,
                            double dead);

PiecewiseProfile sample_load_profile(const LoadModelConfig& cfg, double phi, std::uint64_t seed);

/// indicator: fraction of trials that fail within the horizon.
/// conditional: each trial contributes its failure probability given
/// everything except the one varied input (the dead load for the damage
/// models, the gamma increments for the gamma process). Both estimate the
/// same p_f; the conditional one is smooth in phi.
enum class PfEstimator { indicator, conditional };

struct ReliabilityConfig {
  LoadModelConfig load;
  int trials = 100'000;
  PfEstimator estimator = PfEstimator::conditional;
  Execution execution = Execution::parallel;
};

/// p_f at every phi with common random numbers: trial i uses the same load
/// path and specimen draws for all phi.
std::vector<double> prob_failure_curve(const ModelParams& params, const std::vector<double>& phis,
                                       const ReliabilityConfig& cfg, std::uint64_t seed);

double prob_failure(const ModelParams& params, double phi, const ReliabilityConfig& cfg,
                    std::uint64_t seed);

/// beta = -Phi^-1(p_f); +inf at p_f = 0 and -inf at p_f = 1.
double beta_index(double pf);

std::vector<double> phi_grid(double lo, double hi, double step);

struct ReliabilityCurve {
  std::vector<double> phi;
  std::vector<double> pf;
  std::vector<double> beta;
  std::vector<double> beta_lo;  ///< 2.5% quantile over parameter samples
  std::vector<double> beta_hi;  ///< 97.5% quantile
  int trials = 0;
  int band_trials = 0;
  int band_samples = 0;
};

/// Point curve from `point`; band endpoints from the curves of
/// `samples` (each with `band_trials` trials and the same seed). Without
/// samples the band collapses onto the point curve.
ReliabilityCurve phi_beta_curve(const ModelParams& point, const std::vector<ModelParams>& samples,
                                const std::vector<double>& phis, const ReliabilityConfig& cfg,
                                int band_trials, std::uint64_t seed);

/// Independent normal draws around an NLS estimate (SEs as SDs); draws with
/// nonpositive B or w are redrawn.
std::vector<ModelParams> us_parameter_draws(const UsParams& estimate, double se_a, double se_b,
                                            double se_w, int count, std::uint64_t seed);

}  // namespace dol
