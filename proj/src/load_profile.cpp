#include "dol/load_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dol/error.hpp"

namespace dol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_time(double t) {
  if (!(t >= 0.0)) {
    throw DomainError("time must be nonnegative, got " + std::to_string(t));
  }
}

void validate_hold(const ConstantProfile& p) {
  if (!(p.rate > 0.0)) throw DomainError("constant profile: ramp rate must be positive");
  if (!(p.level > 0.0)) throw DomainError("constant profile: load level must be positive");
  if (!(p.end_time > p.ramp_end())) {
    throw DomainError("constant profile: hold end must follow the initial ramp");
  }
}

}  // namespace

PiecewiseProfile::PiecewiseProfile(std::vector<double> starts, std::vector<double> values,
                                   double horizon)
    : starts_(std::move(starts)), values_(std::move(values)), horizon_(horizon) {
  if (starts_.empty() || starts_.size() != values_.size()) {
    throw DomainError("piecewise profile: need one value per breakpoint");
  }
  if (starts_.front() != 0.0) throw DomainError("piecewise profile: first breakpoint must be 0");
  for (std::size_t j = 1; j < starts_.size(); ++j) {
    if (!(starts_[j] > starts_[j - 1])) {
      throw DomainError("piecewise profile: breakpoints must be strictly increasing");
    }
  }
  for (double v : values_) {
    if (!(v >= 0.0)) throw DomainError("piecewise profile: values must be nonnegative");
  }
  if (!(horizon_ >= starts_.back())) {
    throw DomainError("piecewise profile: horizon precedes the last breakpoint");
  }
}

double PiecewiseProfile::value_at(double t) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  const auto j = static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
  return values_[j];
}

PiecewiseProfile PiecewiseProfile::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return PiecewiseProfile(starts_, std::move(v), horizon_);
}

RampProfile make_ramp(double rate) {
  RampProfile p{rate};
  validate(p);
  return p;
}

ConstantProfile make_constant(double rate, double level, double end_time) {
  ConstantProfile p{rate, level, end_time};
  validate(p);
  return p;
}

RcrProfile make_rcr(const ConstantProfile& hold, double reload_rate) {
  RcrProfile p{hold, reload_rate};
  validate(p);
  return p;
}

void validate(const LoadProfile& profile) {
  std::visit(Overloaded{
                 [](const RampProfile& p) {
                   if (!(p.rate > 0.0)) throw DomainError("ramp profile: rate must be positive");
                 },
                 [](const ConstantProfile& p) { validate_hold(p); },
                 [](const RcrProfile& p) {
                   validate_hold(p.hold);
                   if (!(p.reload_rate > 0.0)) {
                     throw DomainError("RCR profile: reload rate must be positive");
                   }
                 },
                 [](const PiecewiseProfile&) {},
             },
             profile);
}

double load_at(const LoadProfile& profile, double t) {
  check_time(t);
  return std::visit(Overloaded{
                        [t](const RampProfile& p) { return p.rate * t; },
                        [t](const ConstantProfile& p) {
                          if (t <= p.ramp_end()) return p.rate * t;
                          return t <= p.end_time ? p.level : 0.0;
                        },
                        [t](const RcrProfile& p) {
                          if (t <= p.hold.end_time) {
                            return t <= p.hold.ramp_end() ? p.hold.rate * t : p.hold.level;
                          }
                          return p.reload_rate * (t - p.hold.end_time);
                        },
                        [t](const PiecewiseProfile& p) { return p.value_at(t); },
                    },
                    profile);
}

namespace {

// Measure of {s <= t : tau(s) >= level} (strict = false) or > level.
double time_above(const LoadProfile& profile, double level, double t, bool strict) {
  check_time(t);
  if (!(level >= 0.0)) throw DomainError("load level must be nonnegative");
  if (level == 0.0 && !strict) return t;
  auto reaches = [strict, level](double v) { return strict ? v > level : v >= level; };
  auto hold_part = [&](const ConstantProfile& p) {
    if (!reaches(p.level)) return 0.0;
    const double t0 = p.ramp_end();
    const double ramp = std::max(0.0, std::min(t, t0) - level / p.rate);
    return ramp + std::max(0.0, std::min(t, p.end_time) - t0);
  };
  return std::visit(
      Overloaded{
          [&](const RampProfile& p) { return std::max(0.0, t - level / p.rate); },
          [&](const ConstantProfile& p) { return hold_part(p); },
          [&](const RcrProfile& p) {
            double d = hold_part(p.hold);
            const double reload_start = p.hold.end_time + level / p.reload_rate;
            if (t > reload_start) d += t - reload_start;
            return d;
          },
          [&](const PiecewiseProfile& p) {
            double d = 0.0;
            const auto starts = p.starts();
            const auto values = p.values();
            for (std::size_t j = 0; j < p.size() && starts[j] < t; ++j) {
              if (reaches(values[j])) d += std::min(t, p.end_of(j)) - starts[j];
            }
            // the last segment extends past the horizon
            if (t > p.horizon() && reaches(values.back())) d += t - p.horizon();
            return d;
          },
      },
      profile);
}

}  // namespace

double duration_above(const LoadProfile& profile, double level, double t) {
  return time_above(profile, level, t, false);
}

double duration_exceeding(const LoadProfile& profile, double level, double t) {
  return time_above(profile, level, t, true);
}

double running_max(const LoadProfile& profile, double t) {
  check_time(t);
  return std::visit(Overloaded{
                        [t](const RampProfile& p) { return p.rate * t; },
                        [t](const ConstantProfile& p) { return std::min(p.rate * t, p.level); },
                        [t](const RcrProfile& p) {
                          const double hold = std::min(p.hold.rate * t, p.hold.level);
                          if (t <= p.hold.end_time) return hold;
                          return std::max(hold, p.reload_rate * (t - p.hold.end_time));
                        },
                        [t](const PiecewiseProfile& p) {
                          double m = 0.0;
                          const auto starts = p.starts();
                          for (std::size_t j = 0; j < p.size() && starts[j] <= t; ++j) {
                            m = std::max(m, p.values()[j]);
                          }
                          return m;
                        },
                    },
                    profile);
}

double running_max_rate(const LoadProfile& profile, double t) {
  check_time(t);
  return std::visit(Overloaded{
                        [](const RampProfile& p) { return p.rate; },
                        [t](const ConstantProfile& p) { return t < p.ramp_end() ? p.rate : 0.0; },
                        [t](const RcrProfile& p) {
                          if (t < p.hold.ramp_end()) return p.hold.rate;
                          if (t < p.hold.end_time) return 0.0;
                          return p.reload_rate * (t - p.hold.end_time) >= p.hold.level
                                     ? p.reload_rate
                                     : 0.0;
                        },
                        [](const PiecewiseProfile&) { return 0.0; },
                    },
                    profile);
}

double peak_load(const LoadProfile& profile, double horizon) {
  return std::visit(Overloaded{
                        [horizon](const RampProfile& p) { return p.rate * horizon; },
                        [](const ConstantProfile& p) { return p.level; },
                        [horizon](const RcrProfile& p) {
                          if (horizon <= p.hold.end_time) {
                            return std::min(p.hold.rate * horizon, p.hold.level);
                          }
                          return std::max(p.hold.level,
                                          p.reload_rate * (horizon - p.hold.end_time));
                        },
                        [horizon](const PiecewiseProfile& p) {
                          return running_max(LoadProfile(p), std::max(0.0, horizon));
                        },
                    },
                    profile);
}

std::vector<double> kinks(const LoadProfile& profile, double horizon) {
  std::vector<double> out;
  auto add = [&](double t) {
    if (t > 0.0 && t < horizon) out.push_back(t);
  };
  std::visit(Overloaded{
                 [](const RampProfile&) {},
                 [&](const ConstantProfile& p) {
                   add(p.ramp_end());
                   add(p.end_time);
                 },
                 [&](const RcrProfile& p) {
                   add(p.hold.ramp_end());
                   add(p.hold.end_time);
                 },
                 [&](const PiecewiseProfile& p) {
                   for (double s : p.starts()) add(s);
                 },
             },
             profile);
  return out;
}

std::vector<double> plateau_levels(const LoadProfile& profile) {
  return std::visit(Overloaded{
                        [](const RampProfile&) { return std::vector<double>{}; },
                        [](const ConstantProfile& p) { return std::vector<double>{p.level}; },
                        [](const RcrProfile& p) { return std::vector<double>{p.hold.level}; },
                        [](const PiecewiseProfile& p) {
                          std::vector<double> v(p.values().begin(), p.values().end());
                          std::sort(v.begin(), v.end());
                          v.erase(std::unique(v.begin(), v.end()), v.end());
                          if (!v.empty() && v.front() == 0.0) v.erase(v.begin());
                          return v;
                        },
                    },
                    profile);
}

double test_horizon(const LoadProfile& profile) {
  return std::visit(Overloaded{
                        [](const RampProfile&) { return kInf; },
                        [](const ConstantProfile& p) { return p.end_time; },
                        [](const RcrProfile&) { return kInf; },
                        [](const PiecewiseProfile& p) { return p.horizon(); },
                    },
                    profile);
}

}  // namespace dol
