#pragma once

#include <span>
#include <variant>
#include <vector>

namespace dol {

/// Reference ramp rate for short-term strength tests (about one minute to
/// failure), MPa per hour.
inline constexpr double kReferenceRate = 2678.0;

/// tau(t) = k t.
struct RampProfile {
  double rate = kReferenceRate;
};

/// Ramp at `rate` up to `level`, then hold until `end_time`. The specimen is
/// unloaded after `end_time`.
struct ConstantProfile {
  double rate = kReferenceRate;
  double level = 0.0;
  double end_time = 0.0;

  double ramp_end() const { return level / rate; }
};

/// Constant-load test whose survivors are reloaded at `reload_rate` from the
/// instant the hold ends: tau(t) = k (t - T1) for t > T1.
struct RcrProfile {
  ConstantProfile hold;
  double reload_rate = kReferenceRate;
};

/// Right-continuous step function: value `values[j]` on [starts[j], starts[j+1]).
/// The last value extends to `horizon` (and beyond, when queried).
class PiecewiseProfile {
 public:
  PiecewiseProfile(std::vector<double> starts, std::vector<double> values, double horizon);

  std::span<const double> starts() const { return starts_; }
  std::span<const double> values() const { return values_; }
  double horizon() const { return horizon_; }
  std::size_t size() const { return values_.size(); }

  double value_at(double t) const;
  double end_of(std::size_t segment) const {
    return segment + 1 < starts_.size() ? starts_[segment + 1] : horizon_;
  }

  /// Returns the profile with every value multiplied by `factor`.
  PiecewiseProfile scaled(double factor) const;

 private:
  std::vector<double> starts_;
  std::vector<double> values_;
  double horizon_;
};

using LoadProfile = std::variant<RampProfile, ConstantProfile, RcrProfile, PiecewiseProfile>;

RampProfile make_ramp(double rate);
ConstantProfile make_constant(double rate, double level, double end_time);
RcrProfile make_rcr(const ConstantProfile& hold, double reload_rate);

/// Throws DomainError when the profile violates its invariants.
void validate(const LoadProfile& profile);

/// tau(t); t < 0 is a DomainError.
double load_at(const LoadProfile& profile, double t);

/// Measure of {s <= t : tau(s) >= level}. With level == 0 this is t.
double duration_above(const LoadProfile& profile, double level, double t);

/// Measure of {s <= t : tau(s) > level}. Differs from duration_above only by
/// time spent exactly at `level`, i.e. on holds and steps at that level.
double duration_exceeding(const LoadProfile& profile, double level, double t);

/// max_{s <= t} tau(s).
double running_max(const LoadProfile& profile, double t);

/// Right derivative of the running maximum at t (0 while the load is below
/// its previous peak or held constant; jumps of step profiles are not rates).
double running_max_rate(const LoadProfile& profile, double t);

/// Largest load the profile ever reaches within `horizon` (infinite for an
/// unbounded ramp unless a horizon is given).
double peak_load(const LoadProfile& profile, double horizon);

/// Times at which tau or its slope changes (strictly inside (0, horizon)).
std::vector<double> kinks(const LoadProfile& profile, double horizon);

/// Load levels the profile holds for a positive duration; used to align the
/// load ladder so step and constant profiles are represented exactly.
std::vector<double> plateau_levels(const LoadProfile& profile);

/// Natural censoring horizon: T1 for a pure constant-load test, the
/// piecewise horizon, or +inf for ramp and RCR tests (run to failure).
double test_horizon(const LoadProfile& profile);

}  // namespace dol
