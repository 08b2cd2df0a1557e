#include "dol/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "dol/error.hpp"

namespace dol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tolerance {
  double abs_tol;
  double rel_tol;
  bool operator()(double a, double b) const {
    return std::fabs(b - a) <= abs_tol + rel_tol * std::min(std::fabs(a), std::fabs(b));
  }
};

}  // namespace

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const RootConfig& cfg) {
  if (!(lo <= hi)) std::swap(lo, hi);
  const double flo = f(lo);
  if (flo == 0.0) return lo;
  const double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if (!std::isfinite(flo) && !std::isfinite(fhi)) {
    throw BracketError("root bracket has non-finite values at both ends");
  }
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw BracketError("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "]");
  }
  std::uintmax_t iters = static_cast<std::uintmax_t>(cfg.max_iterations);
  std::pair<double, double> r;
  try {
    r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, Tolerance{cfg.abs_tol, cfg.rel_tol},
                                          iters);
  } catch (const std::exception& e) {
    throw ConvergenceError(std::string("root finder failed: ") + e.what());
  }
  if (iters >= static_cast<std::uintmax_t>(cfg.max_iterations) &&
      !Tolerance{cfg.abs_tol * 10, cfg.rel_tol * 10}(r.first, r.second)) {
    throw ConvergenceError("root finder exhausted its iteration budget");
  }
  return 0.5 * (r.first + r.second);
}

double find_increasing_root(const std::function<double(double)>& f, double guess, double step,
                            double lower, double upper, const RootConfig& cfg) {
  guess = std::clamp(guess, lower, upper);
  double fg = f(guess);
  if (fg == 0.0) return guess;
  double a = guess;
  double b = guess;
  double s = step;
  if (fg < 0.0) {
    for (;;) {
      a = b;
      b = std::min(upper, b + s);
      const double fb = f(b);
      if (fb >= 0.0) break;
      if (b >= upper) throw BracketError("increasing root lies above the upper limit");
      s *= 2.0;
    }
  } else {
    for (;;) {
      b = a;
      a = std::max(lower, a - s);
      const double fa = f(a);
      if (fa <= 0.0) break;
      if (a <= lower) throw BracketError("increasing root lies below the lower limit");
      s *= 2.0;
    }
  }
  return find_root(f, a, b, cfg);
}

double lower_incomplete_gamma(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0)) throw DomainError("lower incomplete gamma needs s > 0, x >= 0");
  if (x == 0.0) return 0.0;
  return boost::math::tgamma_lower(s, x);
}

double log_scaled_lower_gamma(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0)) throw DomainError("scaled incomplete gamma needs s > 0, x >= 0");
  if (x == 0.0) return -std::log(s);
  if (x < s + 1.0) {
    // sum_k x^k / (s (s+1) ... (s+k))
    double term = 1.0 / s;
    double sum = term;
    for (int k = 1; k < 10000; ++k) {
      term *= x / (s + k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return std::log(sum);
  }
  const double lg = std::log(boost::math::gamma_p(s, x)) + std::lgamma(s);
  return lg + x - s * std::log(x);
}

double gamma_cdf(double x, double shape, double scale) {
  if (!(scale > 0.0) || !(shape >= 0.0)) throw DomainError("gamma cdf needs shape >= 0, scale > 0");
  if (x <= 0.0) return shape == 0.0 ? 1.0 : 0.0;
  if (shape == 0.0) return 1.0;
  if (x == kInf) return 1.0;
  return boost::math::gamma_p(shape, x / scale);
}

double gamma_cdf_shape_derivative(double x, double shape, double scale) {
  const double h = 1e-6 * std::max(1.0, shape);
  if (shape > h) {
    return (gamma_cdf(x, shape + h, scale) - gamma_cdf(x, shape - h, scale)) / (2.0 * h);
  }
  return (gamma_cdf(x, shape + h, scale) - gamma_cdf(x, shape, scale)) / h;
}

double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw DomainError("normal quantile needs p in [0, 1]");
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

std::vector<double> expected_normal_order_stats(int n) {
  if (n < 1) throw DomainError("order statistics need n >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = 0.0;
    return out;
  }
  // Simpson's rule on [-L, L] of z n C(n-1, i-1) phi Phi^(i-1) (1-Phi)^(n-i)
  const double L = 12.0;
  const int m = 6000;
  const double h = 2.0 * L / m;
  std::vector<double> z(m + 1), log_phi(m + 1), log_cdf(m + 1), log_sf(m + 1), wt(m + 1);
  for (int j = 0; j <= m; ++j) {
    z[j] = -L + h * j;
    log_phi[j] = -0.5 * z[j] * z[j] - 0.5 * std::log(2.0 * M_PI);
    log_cdf[j] = std::log(0.5 * boost::math::erfc(-z[j] / std::sqrt(2.0)));
    log_sf[j] = std::log(0.5 * boost::math::erfc(z[j] / std::sqrt(2.0)));
    wt[j] = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
  }
  const double log_n = std::log(static_cast<double>(n));
  const int half = n / 2;
  for (int i = 1; i <= n - half; ++i) {
    const double log_c = log_n + std::lgamma(n) - std::lgamma(i) - std::lgamma(n - i + 1);
    double sum = 0.0;
    for (int j = 0; j <= m; ++j) {
      const double lt = log_c + log_phi[j] + (i - 1) * log_cdf[j] + (n - i) * log_sf[j];
      sum += wt[j] * z[j] * std::exp(lt);
    }
    out[i - 1] = sum * h / 3.0;
  }
  for (int i = n - half + 1; i <= n; ++i) out[i - 1] = -out[n - i];
  if (n % 2 == 1) out[n / 2] = 0.0;
  return out;
}

std::vector<double> blom_scores(int n) {
  if (n < 1) throw DomainError("order statistics need n >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) out[i - 1] = normal_quantile((i - 0.375) / (n + 0.25));
  return out;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> quantiles(std::span<const double> samples, std::span<const double> probs) {
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back(quantile_sorted(s, p));
  return out;
}

std::vector<double> equally_spaced_probs(int count) {
  std::vector<double> p(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) p[i] = static_cast<double>(i + 1) / (count + 1);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

struct Dp45 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct StepResult {
  double y;
  double err;
};

// One step, with k1 evaluated at (t, y); returns the 5th-order solution.
StepResult dp_step(const DamageRate& f, double t, double y, double h, double k1) {
  using D = Dp45;
  const double k2 = f(t + D::c2 * h, y + h * D::a21 * k1);
  const double k3 = f(t + D::c3 * h, y + h * (D::a31 * k1 + D::a32 * k2));
  const double k4 = f(t + D::c4 * h, y + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
  const double k5 =
      f(t + D::c5 * h, y + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
  const double k6 = f(t + h, y + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 +
                                      D::a65 * k5));
  const double y5 = y + h * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
  const double k7 = f(t + h, y5);
  const double err = h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 +
                          D::e7 * k7);
  return {y5, err};
}

}  // namespace

OdeOutcome integrate_damage_ode(const DamageRate& rate, double t0, double alpha0, double horizon,
                                std::span<const double> kinks, const OdeConfig& cfg) {
  if (alpha0 >= 1.0) return {true, t0, alpha0};
  std::vector<double> stops;
  for (double k : kinks) {
    if (k > t0 && k < horizon) stops.push_back(k);
  }
  std::sort(stops.begin(), stops.end());
  stops.push_back(horizon);

  double t = t0;
  double y = alpha0;
  double h = cfg.initial_step;
  long steps = 0;
  for (double stop : stops) {
    while (t < stop) {
      if (++steps > cfg.max_steps) throw IntegrationError("damage ODE exhausted its step budget");
      double hh = std::min(h, stop - t);
      const bool hits_stop = hh >= stop - t;
      const double k1 = rate(t, y);
      if (!std::isfinite(k1)) throw IntegrationError("damage rate is not finite");
      const StepResult r = dp_step(rate, t, y, hh, k1);
      const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(y), std::fabs(r.y));
      const double err = std::isfinite(r.err) && std::isfinite(r.y) ? std::fabs(r.err) / scale
                                                                    : kInf;
      if (err > 1.0) {
        const double factor = std::isfinite(err) ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.1;
        h = hh * factor;
        if (h < cfg.min_step || t + h == t) {
          throw IntegrationError("damage ODE step size underflow at t = " + std::to_string(t));
        }
        continue;
      }
      const double t_next = hits_stop ? stop : t + hh;
      if (r.y >= 1.0) {
        // alpha is monotone, so the crossing lies in this step
        const double tau = find_root(
            [&](double s) {
              if (s <= 0.0) return y - 1.0;
              return dp_step(rate, t, y, s * hh, k1).y - 1.0;
            },
            0.0, 1.0, RootConfig{1e-16, 1e-15, 300});
        return {true, t + tau * hh, 1.0};
      }
      t = t_next;
      y = r.y;
      const double grow = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
      if (!hits_stop) h = hh * grow;
    }
  }
  return {false, horizon, y};
}

}  // namespace dol
