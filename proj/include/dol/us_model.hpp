#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dol/load_profile.hpp"
#include "dol/parallel.hpp"
#include "dol/records.hpp"

namespace dol {

/// US (Gerhards) damage model, d(alpha)/dt = exp(-A + B tau(t) / tau_s), with
/// lognormal short-term strength tau_s = tau_M exp(w Z).
struct UsParams {
  double A = 68.46;
  double B = 79.65;
  double w = 0.4259;
  double tau_m = 44.60;  ///< median short-term strength, fixed from data

  double b_prime() const { return B / tau_m; }
};

void validate(const UsParams& params);

struct ConstantLoadOutcome {
  Phase phase = Phase::survived;
  double time = 0.0;    ///< failure time, or T1 for survivors
  double damage = 0.0;  ///< alpha(T1) for survivors, 1 otherwise
};

/// Ramp failure time T_f = [s/(B'k)] log{[B'k/s] e^A + 1}, s = exp(wZ).
double us_failure_time_ramp(const UsParams& p, double z, double rate);

/// Damage accumulated by the end of the hold for a specimen that survives it.
double us_damage_at_hold_end(const UsParams& p, double z, const ConstantProfile& profile);

/// Constant-load outcome: initial-ramp failure, hold failure, or survival
/// with alpha(T1).
ConstantLoadOutcome us_failure_time_constant(const UsParams& p, double z,
                                             const ConstantProfile& profile);

/// Absolute failure time on the reload ramp given the damage carried over
/// from the hold. damage_at_t1 >= 1 throws DomainError.
double us_failure_time_rcr(const UsParams& p, double z, const RcrProfile& profile,
                           double damage_at_t1);

/// Failure time (or empty when the specimen survives the horizon) under any
/// profile, with damage integrated analytically segment by segment.
std::optional<double> us_failure_time(const UsParams& p, double z, const LoadProfile& profile);

/// n specimens with Z ~ N(0,1) drawn from a counter-derived stream per
/// specimen. Specimen ids are "<prefix><index>".
std::vector<FailureRecord> us_simulate(const UsParams& p, const GroupConfig& group, int n,
                                       std::uint64_t seed, Execution execution = Execution::parallel,
                                       const std::string& id_prefix = "S");

// ---------------------------------------------------------------------------
// Iteratively reweighted nonlinear least squares

enum class OrderStatMode { exact, blom };

struct UsFitConfig {
  double rel_tol = 1e-6;  ///< outer convergence on relative parameter change
  int max_outer_iterations = 200;
  int max_inner_iterations = 200;
  bool weight_rcr = false;  ///< apply the 1/(B' tau_c) weight to RCR residuals too
  OrderStatMode order_stats = OrderStatMode::exact;
  std::optional<UsParams> start;  ///< skips the coarse grid search when set
};

struct UsIterationTrace {
  int iteration = 0;
  double A = 0.0, B = 0.0, w = 0.0;
  double objective = 0.0;  ///< weighted residual sum of squares at the solution
  int excluded = 0;
};

struct UsFitResult {
  UsParams estimate;
  double se_A = 0.0, se_B = 0.0, se_w = 0.0;
  int iterations = 0;
  int records_used = 0;
  std::vector<std::string> excluded_ids;
  std::vector<std::string> unusable_ids;  ///< censored without a reload test
  std::vector<UsIterationTrace> trace;
};

/// Median failure load of the reference-rate ramp group; this fixes tau_M.
double reference_median_strength(const std::vector<FailureRecord>& records,
                                 const DatasetManifest& manifest);

/// Fits (A, B, w) with tau_M held fixed. Each specimen's Z is the expected
/// standard normal order statistic of its rank within its group (ties broken
/// by input order); residuals are log(observed) - log(model) from the R, C or
/// RCR solution matching the specimen's outcome. Hold failures are
/// reweighted by 1/(B' tau_c) using the previous iteration's B', and the
/// weighted problem is re-solved until the parameters settle. Specimens whose
/// RCR solution needs the log of a nonpositive argument are excluded.
UsFitResult us_nls_fit(const std::vector<FailureRecord>& records, const DatasetManifest& manifest,
                       double tau_m, const UsFitConfig& cfg = {});

}  // namespace dol
