#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dol/load_profile.hpp"
#include "dol/parallel.hpp"
#include "dol/records.hpp"

namespace dol {

/// Piecewise power law g(t) with g(t) = (t/t_1)^a_1 on (0, t_1] and
/// continuation g(t) = g(t_{i-1}) (t/t_{i-1})^a_i on (t_{i-1}, t_i]; the last
/// power applies beyond t_B. Without breakpoints g(t) = t^a_1 (t in hours).
/// g(0) = 0.
struct BrokenPowerLaw {
  std::vector<double> times;   ///< t_1 < ... < t_B, hours
  std::vector<double> powers;  ///< a_1 ... a_{B+1}

  int breakpoints() const { return static_cast<int>(times.size()); }
  double operator()(double t) const;
  double log_value(double t) const;
  double derivative(double t) const;
};

void validate(const BrokenPowerLaw& law);

inline constexpr double kDefaultLoadIncrement = 0.1379;  // MPa (20 psi)

struct GammaProcessParams {
  double u = 0.0;
  double tau_star = 0.0;  ///< MPa
  double xi = 1.0;        ///< gamma scale
  BrokenPowerLaw law;
  double delta_tau = kDefaultLoadIncrement;
};

void validate(const GammaProcessParams& p);

/// Published two-breakpoint estimates.
GammaProcessParams gamma_reference_params();

/// Number of free parameters: u, tau*, xi, B+1 powers and B times.
inline int gp_parameter_count(int breakpoints) { return 4 + 2 * breakpoints; }

/// Ladder levels 0 = l_0 < l_1 < ... covering (0, max_load): multiples of
/// delta_tau merged with the profile's plateau levels, so piecewise-constant
/// profiles are represented exactly. max_load itself is the last level.
std::vector<double> load_ladder(const LoadProfile& profile, double max_load, double delta_tau);

/// Shape function
///
///   eta(t) = u sum_j g(D_j(t)) [(h_j - tau*)_+ - (l_j - tau*)_+],
///
/// over ladder increments (l_j, h_j] capped at the running maximum load, with
/// D_j the time the load has exceeded l_j. For a load held at tau from time 0
/// this is u g(t) (tau - tau*)_+.
double eta_of_t(const GammaProcessParams& p, const LoadProfile& profile, double t);

/// d(eta)/dt (right derivative at kinks).
double eta_rate(const GammaProcessParams& p, const LoadProfile& profile, double t);

/// eta(t) for a step profile from its sorted distinct levels; equal to
/// eta_of_t but independent of the load increment.
double eta_step_profile(const GammaProcessParams& p, const PiecewiseProfile& profile, double t);

/// P(T_f > t) = P(Y(t) < 1) with Y(t) ~ Gamma(shape eta(t), scale xi).
double gp_survival(const GammaProcessParams& p, const LoadProfile& profile, double t);
double survival_from_eta(double eta, double xi);

/// log of the failure density -dS/dt = eta'(t) * (-dP/ds)(eta(t), 1/xi).
double gp_log_density(const GammaProcessParams& p, const LoadProfile& profile, double t);

/// Per-record ladder durations precomputed from the data, so a likelihood
/// evaluation only needs the power law and threshold weights.
class GpLikelihoodCache {
 public:
  GpLikelihoodCache(const std::vector<FailureRecord>& records, const DatasetManifest& manifest,
                    double delta_tau = kDefaultLoadIncrement);

  /// Sum of log densities of failures and log survivals of censored records;
  /// -inf when any contribution is impossible under `p`.
  double log_likelihood(const GammaProcessParams& p, Execution execution = Execution::parallel) const;

  /// Serial reference evaluation that recomputes every ladder duration from
  /// the profiles instead of using the cache.
  double log_likelihood_direct(const GammaProcessParams& p) const;

  std::size_t size() const { return entries_.size(); }
  double delta_tau() const { return delta_tau_; }
  /// Failure times usable to seed breakpoint candidates.
  std::vector<double> failure_times() const;

 private:
  struct Entry {
    bool failed = false;
    std::size_t begin = 0, end = 0;  ///< range in the increment arrays
    double max_rate = 0.0;           ///< d(running max)/dt at the record's time
    double max_load = 0.0;
    double time = 0.0;
    const LoadProfile* profile = nullptr;
  };
  struct Law;
  double record_ll(const GammaProcessParams& p, const Law& law, const Entry& e) const;

  std::vector<Entry> entries_;
  std::vector<LoadProfile> profiles_;
  std::vector<double> lo_, hi_, log_d_, inv_d_;
  std::vector<unsigned char> active_;
  double delta_tau_;
};

double gp_log_likelihood(const GammaProcessParams& p, const std::vector<FailureRecord>& records,
                         const DatasetManifest& manifest, Execution execution = Execution::parallel);

// ---------------------------------------------------------------------------
// MCMC over (log u, tau*, log xi, a_1..a_{B+1}, log t_1..log t_B)

struct GpPrior {
  double log_u_min = -12.0, log_u_max = 3.0;
  double tau_star_min = 0.0, tau_star_max = 30.0;
  double log_xi_min = -7.0, log_xi_max = 3.0;
  double power_min = 0.0, power_max = 1.0;
  double log_time_min = -16.0, log_time_max = 12.0;  ///< natural log of hours
};

struct GpMcmcConfig {
  int iterations = 100'000;
  int burn_in = 20'000;
  int thinning = 100;
  int adapt_interval = 200;
  int polish_evaluations = 3000;  ///< Nelder-Mead budget for the starting point
  Execution execution = Execution::parallel;
};

struct GpSample {
  GammaProcessParams params;
  double log_likelihood = 0.0;
};

struct GpChain {
  int breakpoints = 0;
  std::vector<GpSample> samples;  ///< thinned post-burn-in draws
  GpSample best;                  ///< highest log-likelihood state visited
  double acceptance_rate = 0.0;
};

std::vector<double> gp_to_vector(const GammaProcessParams& p);
GammaProcessParams gp_from_vector(const std::vector<double>& v, double delta_tau);
bool gp_in_prior(const std::vector<double>& v, const GpPrior& prior);

/// Maximises the log-likelihood from `start` with Nelder-Mead inside the
/// prior box.
GpSample gp_polish(const GpLikelihoodCache& cache, const GammaProcessParams& start,
                   const GpPrior& prior, int max_evaluations,
                   Execution execution = Execution::parallel);

/// Adds one breakpoint to `fit` at the candidate time (among failure-time
/// quantiles) giving the highest log-likelihood; u is rescaled so eta is
/// unchanged before polishing.
GpSample gp_add_breakpoint(const GpLikelihoodCache& cache, const GpSample& fit,
                           const GpPrior& prior, int max_evaluations,
                           Execution execution = Execution::parallel);

/// Random-walk Metropolis with uniform priors on the box, proposal
/// covariance adapted during burn-in. Throws FitError when the start has a
/// non-finite likelihood.
GpChain gp_mcmc_fit(const GpLikelihoodCache& cache, const GammaProcessParams& start,
                    const GpMcmcConfig& cfg, const GpPrior& prior, std::uint64_t seed);

struct GpBicEntry {
  int breakpoints = 0;
  double max_log_likelihood = 0.0;
  int parameters = 0;
  double bic = 0.0;
};

struct GpFitResult {
  std::vector<GpBicEntry> bic;
  int selected = 0;
  std::vector<GpChain> chains;  ///< one per breakpoint count tried

  const GpChain& selected_chain() const;
};

/// Fits B = 0, 1, ... breakpoints, stopping once the BIC (from the best
/// visited state) fails to improve or `max_breakpoints` is reached. N is the
/// number of records.
GpFitResult gp_bic_select(const GpLikelihoodCache& cache, int max_breakpoints,
                          const GpMcmcConfig& cfg, const GpPrior& prior, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Failure times by inverse transform (+inf when the specimen outlasts the
/// profile's horizon).
std::vector<double> gp_simulate_times(const GammaProcessParams& p, const LoadProfile& profile,
                                      int n, std::uint64_t seed,
                                      Execution execution = Execution::parallel);

std::vector<FailureRecord> gp_simulate(const GammaProcessParams& p, const GroupConfig& group,
                                       int n, std::uint64_t seed,
                                       Execution execution = Execution::parallel,
                                       const std::string& id_prefix = "G");

}  // namespace dol
