#include "dol/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fftw3.h>

#include "dol/error.hpp"
#include "dol/numerics.hpp"

namespace dol {

namespace {

int round_up_pow2(int n) {
  int p = 256;
  while (p < n) p <<= 1;
  return p;
}

// Y_k = 2 sum_j x_j cos(pi k (2j+1) / (2n))
std::vector<double> dct2(const std::vector<double>& x) {
  std::vector<double> in(x), out(x.size());
  fftw_plan plan;
#pragma omp critical(dol_fftw_plan)
  plan = fftw_plan_r2r_1d(static_cast<int>(x.size()), in.data(), out.data(), FFTW_REDFT10,
                          FFTW_ESTIMATE);
  fftw_execute(plan);
#pragma omp critical(dol_fftw_plan)
  fftw_destroy_plan(plan);
  return out;
}

// Inverse of dct2.
std::vector<double> idct2(const std::vector<double>& y) {
  std::vector<double> in(y), out(y.size());
  fftw_plan plan;
#pragma omp critical(dol_fftw_plan)
  plan = fftw_plan_r2r_1d(static_cast<int>(y.size()), in.data(), out.data(), FFTW_REDFT01,
                          FFTW_ESTIMATE);
  fftw_execute(plan);
#pragma omp critical(dol_fftw_plan)
  fftw_destroy_plan(plan);
  const double scale = 1.0 / (2.0 * static_cast<double>(y.size()));
  for (double& v : out) v *= scale;
  return out;
}

// t - xi gamma^[l](t); its root is the squared bandwidth on the unit interval.
double fixed_point(double t, double n_samples, const std::vector<double>& i2,
                   const std::vector<double>& a2) {
  constexpr int l = 7;
  const double pi2 = M_PI * M_PI;
  double f = 0.0;
  for (std::size_t k = 0; k < i2.size(); ++k) {
    f += std::pow(i2[k], l) * a2[k] * std::exp(-i2[k] * pi2 * t);
  }
  f *= 2.0 * std::pow(M_PI, 2 * l);
  for (int s = l - 1; s >= 2; --s) {
    double k0 = 1.0;
    for (int j = 1; j <= 2 * s - 1; j += 2) k0 *= j;
    k0 /= std::sqrt(2.0 * M_PI);
    const double c = (1.0 + std::pow(0.5, s + 0.5)) / 3.0;
    const double time = std::pow(2.0 * c * k0 / n_samples / f, 2.0 / (3.0 + 2.0 * s));
    f = 0.0;
    for (std::size_t k = 0; k < i2.size(); ++k) {
      f += std::pow(i2[k], s) * a2[k] * std::exp(-i2[k] * pi2 * time);
    }
    f *= 2.0 * std::pow(M_PI, 2 * s);
  }
  return t - std::pow(2.0 * n_samples * std::sqrt(M_PI) * f, -0.4);
}

double silverman(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double probs[] = {0.25, 0.75};
  const auto q = quantiles(x, probs);
  double spread = sd;
  if (q[1] > q[0]) spread = std::min(sd, (q[1] - q[0]) / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  return 0.9 * spread * std::pow(n, -0.2);
}

}  // namespace

KernelDensity::KernelDensity(std::span<const double> samples, const KdeConfig& cfg) {
  if (samples.size() < 2) throw DataError("kernel density needs at least 2 samples");
  for (double v : samples) {
    if (!std::isfinite(v)) throw DataError("kernel density samples must be finite");
  }
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  double range = *mx - *mn;
  if (!(range > 0.0)) range = std::max(1.0, std::fabs(*mn));
  lo_ = *mn - cfg.padding * range;
  hi_ = *mx + cfg.padding * range;
  const double r = hi_ - lo_;
  const int n = round_up_pow2(cfg.grid_size);
  const double dx = r / (n - 1);

  std::vector<double> hist(static_cast<std::size_t>(n), 0.0);
  for (double v : samples) {
    const auto j = std::clamp(static_cast<long>(std::floor((v - lo_) / dx + 0.5)), 0L,
                              static_cast<long>(n - 1));
    hist[static_cast<std::size_t>(j)] += 1.0;
  }
  const double ns = static_cast<double>(samples.size());
  for (double& h : hist) h /= ns;

  const std::vector<double> a = dct2(hist);
  double t_star = -1.0;
  if (cfg.rule == BandwidthRule::diffusion) {
    std::vector<double> i2(static_cast<std::size_t>(n - 1)), a2(static_cast<std::size_t>(n - 1));
    for (int k = 1; k < n; ++k) {
      i2[k - 1] = static_cast<double>(k) * k;
      a2[k - 1] = 0.25 * a[k] * a[k];
    }
    const double nn = std::clamp(ns, 50.0, 1050.0);
    double tol = 1e-12 + 0.01 * (nn - 50.0) / 1000.0;
    auto g = [&](double t) { return fixed_point(t, ns, i2, a2); };
    for (;;) {
      try {
        t_star = find_root(g, 0.0, tol, RootConfig{1e-14, 1e-10, 300});
        break;
      } catch (const Error&) {
        if (tol >= 0.1) break;
        tol = std::min(tol * 2.0, 0.1);
      }
    }
    if (!(t_star > 0.0)) t_star = -1.0;
  }
  if (t_star < 0.0) {
    used_fallback_ = cfg.rule == BandwidthRule::diffusion;
    const double h = silverman(samples);
    t_star = (h / r) * (h / r);
  }
  bandwidth_ = std::sqrt(t_star) * r;

  std::vector<double> at(a);
  for (int k = 0; k < n; ++k) {
    at[k] *= std::exp(-static_cast<double>(k) * k * M_PI * M_PI * t_star / 2.0);
  }
  density_ = idct2(at);
  for (double& d : density_) d /= dx;

  double min_at_sample = std::numeric_limits<double>::infinity();
  for (double v : samples) {
    const double pos = (v - lo_) / dx;
    const auto j = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(n - 2));
    const double w = pos - static_cast<double>(j);
    min_at_sample = std::min(min_at_sample, (1.0 - w) * density_[j] + w * density_[j + 1]);
  }
  if (!(min_at_sample > 0.0)) {
    min_at_sample = *std::max_element(density_.begin(), density_.end()) * 1e-6;
  }
  log_floor_ = std::log(1e-6 * min_at_sample);
}

double KernelDensity::log_density(double x) const {
  if (!(x >= lo_ && x <= hi_)) return log_floor_;
  const double dx = grid_step();
  const double pos = (x - lo_) / dx;
  const auto j = std::min(static_cast<std::size_t>(pos), density_.size() - 2);
  const double w = pos - static_cast<double>(j);
  const double d = (1.0 - w) * density_[j] + w * density_[j + 1];
  return d > 0.0 ? std::max(std::log(d), log_floor_) : log_floor_;
}

std::vector<double> KernelDensity::log_density(std::span<const double> xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(log_density(x));
  return out;
}

std::vector<double> kde_log_density(std::span<const double> samples,
                                    std::span<const double> queries, const KdeConfig& cfg) {
  if (samples.size() < 100) throw DataError("kernel density needs at least 100 samples");
  return KernelDensity(samples, cfg).log_density(queries);
}

}  // namespace dol
