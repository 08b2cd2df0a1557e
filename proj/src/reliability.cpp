#include "dol/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dol/error.hpp"
#include "dol/numerics.hpp"
#include "dol/units.hpp"

namespace dol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ExtraEvent {
  double begin;
  double end;
  double size;
};

// Quantile of a sorted vector that tolerates infinite entries.
double band_quantile(const std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size() || frac == 0.0 || sorted[i] == sorted[i + 1]) return sorted[i];
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

// P(dead load >= d) under the untruncated normal.
double dead_exceeds(const LoadModelConfig& cfg, double d) {
  return normal_cdf((cfg.dead_mean - d) / cfg.dead_sd);
}

// US damage is additive over segments, so the dead load at which damage
// reaches 1 exactly at the horizon has a closed form.
double us_conditional(const UsParams& p, double z, const StandardLoadPath& path,
                      const LoadModelConfig& cfg, double phi) {
  const double s = std::exp(p.w * z);
  const double k = p.b_prime() * cfg.load_scale(phi) / s;
  double m = -kInf;
  std::vector<double> terms(path.live.size());
  for (std::size_t j = 0; j < path.live.size(); ++j) {
    const double end = j + 1 < path.starts.size() ? path.starts[j + 1] : path.horizon;
    terms[j] = std::log(end - path.starts[j]) + k * path.live[j];
    m = std::max(m, terms[j]);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - m);
  const double d_star = (p.A - (m + std::log(sum))) / (k * cfg.gamma);
  return dead_exceeds(cfg, d_star);
}

double canadian_conditional(const CanadianEffects& e, const StandardLoadPath& path,
                            const LoadModelConfig& cfg, double phi) {
  auto fails = [&](double d) {
    return canadian_failure_time_piecewise(e, to_profile(path, cfg, phi, d)).has_value();
  };
  // +-37 SD spans every normal tail probability representable in a double
  double lo = std::max(0.0, cfg.dead_mean - 37.0 * cfg.dead_sd);
  double hi = cfg.dead_mean + 37.0 * cfg.dead_sd;
  if (fails(lo)) return dead_exceeds(cfg, lo);
  if (!fails(hi)) return 0.0;
  for (int it = 0; it < 30; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fails(mid) ? hi : lo) = mid;
  }
  return dead_exceeds(cfg, 0.5 * (lo + hi));
}

}  // namespace

double LoadModelConfig::horizon_hours() const { return horizon_years * kHoursPerYear; }

double LoadModelConfig::load_scale(double phi) const {
  return phi * r0 / (gamma * alpha_d + alpha_l);
}

void validate(const LoadModelConfig& c) {
  const double positive[] = {c.r0,
                             c.gamma * c.alpha_d + c.alpha_l,
                             c.horizon_years,
                             c.dead_sd,
                             c.sustained_mean_years,
                             c.sustained_shape,
                             c.sustained_scale,
                             c.extra_mean_weeks,
                             c.extra_shape,
                             c.extra_scale,
                             c.extra_interarrival_years};
  for (double v : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("load model scales and means must be positive");
  }
  if (!(c.gamma >= 0.0) || !(c.dead_mean >= 0.0)) {
    throw ConfigError("dead load ratio and mean must be nonnegative");
  }
}

StandardLoadPath sample_standard_path(const LoadModelConfig& cfg, Engine& engine) {
  StandardLoadPath path;
  path.horizon = cfg.horizon_hours();
  std::normal_distribution<double> dead(cfg.dead_mean, cfg.dead_sd);
  path.dead = std::max(0.0, dead(engine));

  std::exponential_distribution<double> sustained_len(1.0 / (cfg.sustained_mean_years * kHoursPerYear));
  std::gamma_distribution<double> sustained_size(cfg.sustained_shape, cfg.sustained_scale);
  std::vector<double> s_starts;
  std::vector<double> s_sizes;
  for (double t = 0.0; t < path.horizon; t += sustained_len(engine)) {
    s_starts.push_back(t);
    s_sizes.push_back(sustained_size(engine));
  }

  std::exponential_distribution<double> gap(1.0 / (cfg.extra_interarrival_years * kHoursPerYear));
  std::exponential_distribution<double> extra_len(1.0 / (cfg.extra_mean_weeks * kHoursPerWeek));
  std::gamma_distribution<double> extra_size(cfg.extra_shape, cfg.extra_scale);
  std::vector<ExtraEvent> events;
  for (double t = gap(engine); t < path.horizon; t += gap(engine)) {
    const double len = extra_len(engine);
    events.push_back({t, std::min(t + len, path.horizon), extra_size(engine)});
  }
  path.extraordinary_events = static_cast<int>(events.size());

  std::vector<double> cuts = s_starts;
  for (const auto& ev : events) {
    cuts.push_back(ev.begin);
    if (ev.end < path.horizon) cuts.push_back(ev.end);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (double c : cuts) {
    const auto k = static_cast<std::size_t>(
        std::upper_bound(s_starts.begin(), s_starts.end(), c) - s_starts.begin() - 1);
    double v = s_sizes[k];
    for (const auto& ev : events) {
      if (ev.begin <= c && c < ev.end) v += ev.size;
    }
    path.starts.push_back(c);
    path.live.push_back(v);
  }
  return path;
}

PiecewiseProfile to_profile(const StandardLoadPath& path, const LoadModelConfig& cfg, double phi,
                            double dead) {
  const double scale = cfg.load_scale(phi);
  std::vector<double> values(path.live.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    values[j] = std::max(0.0, scale * (cfg.gamma * dead + path.live[j]));
  }
  return PiecewiseProfile(path.starts, std::move(values), path.horizon);
}

PiecewiseProfile to_profile(const StandardLoadPath& path, const LoadModelConfig& cfg, double phi) {
  return to_profile(path, cfg, phi, path.dead);
}

PiecewiseProfile sample_load_profile(const LoadModelConfig& cfg, double phi, std::uint64_t seed) {
  validate(cfg);
  if (!(phi > 0.0)) throw DomainError("phi must be positive");
  Engine eng = make_engine(seed, streams::load_path);
  return to_profile(sample_standard_path(cfg, eng), cfg, phi);
}

std::vector<double> prob_failure_curve(const ModelParams& params, const std::vector<double>& phis,
                                       const ReliabilityConfig& cfg, std::uint64_t seed) {
  validate(cfg.load);
  if (cfg.trials < 1) throw ConfigError("need at least one reliability trial");
  for (double phi : phis) {
    if (!(phi > 0.0)) throw DomainError("phi must be positive");
  }
  std::visit([](const auto& p) { validate(p); }, params);
  const std::size_t nphi = phis.size();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  const bool conditional = cfg.estimator == PfEstimator::conditional;
  const LoadModelConfig& load = cfg.load;
  std::vector<double> contrib(trials * nphi, 0.0);

  for_each_index(trials, cfg.execution, [&](std::size_t i) {
    Engine path_eng = make_engine(seed, streams::load_path, i);
    const StandardLoadPath path = sample_standard_path(load, path_eng);
    Engine eng = make_engine(seed, streams::trial_strength, i);
    double* out = contrib.data() + i * nphi;

    if (const auto* us = std::get_if<UsParams>(&params)) {
      std::normal_distribution<double> normal;
      const double z = normal(eng);
      for (std::size_t k = 0; k < nphi; ++k) {
        out[k] = conditional ? us_conditional(*us, z, path, load, phis[k])
                             : us_failure_time(*us, z, to_profile(path, load, phis[k])).has_value();
      }
    } else if (const auto* h = std::get_if<CanadianHyperParams>(&params)) {
      const CanadianEffects e = sample_random_effects_retry(*h, eng);
      for (std::size_t k = 0; k < nphi; ++k) {
        out[k] = conditional
                     ? canadian_conditional(e, path, load, phis[k])
                     : canadian_failure_time_piecewise(e, to_profile(path, load, phis[k])).has_value();
      }
    } else {
      const auto& gp = std::get<GammaProcessParams>(params);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const double u = unif(eng);
      for (std::size_t k = 0; k < nphi; ++k) {
        const double eta = eta_step_profile(gp, to_profile(path, load, phis[k]), path.horizon);
        const double pf = 1.0 - survival_from_eta(eta, gp.xi);
        out[k] = conditional ? pf : (u < pf ? 1.0 : 0.0);
      }
    }
  });

  std::vector<double> pf(nphi, 0.0);
  for (std::size_t i = 0; i < trials; ++i) {
    for (std::size_t k = 0; k < nphi; ++k) pf[k] += contrib[i * nphi + k];
  }
  for (double& v : pf) v /= static_cast<double>(trials);
  return pf;
}

double prob_failure(const ModelParams& params, double phi, const ReliabilityConfig& cfg,
                    std::uint64_t seed) {
  return prob_failure_curve(params, {phi}, cfg, seed).front();
}

double beta_index(double pf) {
  if (!(pf >= 0.0 && pf <= 1.0)) throw DomainError("failure probability must lie in [0, 1]");
  if (pf == 0.0) return kInf;
  if (pf == 1.0) return -kInf;
  return -normal_quantile(pf);
}

std::vector<double> phi_grid(double lo, double hi, double step) {
  if (!(lo > 0.0) || !(hi >= lo) || !(step > 0.0)) {
    throw ConfigError("phi grid needs 0 < min <= max and step > 0");
  }
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

ReliabilityCurve phi_beta_curve(const ModelParams& point, const std::vector<ModelParams>& samples,
                                const std::vector<double>& phis, const ReliabilityConfig& cfg,
                                int band_trials, std::uint64_t seed) {
  ReliabilityCurve curve;
  curve.phi = phis;
  curve.trials = cfg.trials;
  curve.pf = prob_failure_curve(point, phis, cfg, seed);
  for (double p : curve.pf) curve.beta.push_back(beta_index(p));
  curve.beta_lo = curve.beta;
  curve.beta_hi = curve.beta;
  if (samples.empty()) return curve;
  if (band_trials < 1) throw ConfigError("band needs at least one trial per sample");
  curve.band_trials = band_trials;
  curve.band_samples = static_cast<int>(samples.size());
  ReliabilityConfig band_cfg = cfg;
  band_cfg.trials = band_trials;
  std::vector<std::vector<double>> betas(phis.size());
  for (const auto& s : samples) {
    const auto pf = prob_failure_curve(s, phis, band_cfg, seed);
    for (std::size_t k = 0; k < phis.size(); ++k) betas[k].push_back(beta_index(pf[k]));
  }
  for (std::size_t k = 0; k < phis.size(); ++k) {
    std::sort(betas[k].begin(), betas[k].end());
    // the band always contains the point estimate
    curve.beta_lo[k] = std::min(band_quantile(betas[k], 0.025), curve.beta[k]);
    curve.beta_hi[k] = std::max(band_quantile(betas[k], 0.975), curve.beta[k]);
  }
  return curve;
}

std::vector<ModelParams> us_parameter_draws(const UsParams& estimate, double se_a, double se_b,
                                            double se_w, int count, std::uint64_t seed) {
  if (count < 0 || !(se_a >= 0.0) || !(se_b >= 0.0) || !(se_w >= 0.0)) {
    throw ConfigError("parameter draws need nonnegative count and standard errors");
  }
  Engine eng = make_engine(seed, streams::parameter_draws);
  std::normal_distribution<double> normal;
  std::vector<ModelParams> out;
  while (static_cast<int>(out.size()) < count) {
    UsParams p = estimate;
    p.A = estimate.A + se_a * normal(eng);
    p.B = estimate.B + se_b * normal(eng);
    p.w = estimate.w + se_w * normal(eng);
    if (p.B > 0.0 && p.w > 0.0) out.emplace_back(p);
  }
  return out;
}

}  // namespace dol
