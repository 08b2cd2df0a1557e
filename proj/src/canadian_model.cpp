#include "dol/canadian_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dol/error.hpp"
#include "dol/numerics.hpp"

namespace dol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kScaleFloor = 0.01;

double logaddexp(double x, double y) {
  if (x == -kInf) return y;
  if (y == -kInf) return x;
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::fabs(x - y)));
}

// Ramp damage at normalised excess load r = tau/tau_s - sigma0 > 0 for a
// fresh specimen loaded at `rate`, given tau_s. Also returns X = -log H.
struct RampTerms {
  double log_damage;
  double x;
};

RampTerms ramp_terms(const CanadianEffects& e, double rate, double tau_s, double r) {
  const double mu = kCanadianTimeConstant;
  const double log_r = std::log(r);
  const double log_scale = std::log(tau_s / (mu * rate * (e.n + 1.0)));
  const double x = std::exp(e.n * std::log(e.c * tau_s) + log_scale + (e.n + 1.0) * log_r);
  const double s = (e.b + 1.0) / (e.n + 1.0);
  const double l0 = e.b * std::log(e.a * tau_s) + (e.b + 1.0) * log_r + log_scale;
  return {l0 + log_scaled_lower_gamma(s, x), x};
}

// Smallest r with log damage (plus carried damage) reaching zero.
double solve_failure_excess(const CanadianEffects& e, double rate, double log_carried) {
  auto f = [&](double log_r) {
    const RampTerms t = ramp_terms(e, rate, e.tau_s, std::exp(log_r));
    return logaddexp(log_carried + t.x, t.log_damage);
  };
  const double guess = std::log(std::max(1e-6, 1.0 - e.sigma0));
  return std::exp(find_increasing_root(f, guess, 0.5, -700.0, 700.0));
}

void check_effects(const CanadianEffects& e) {
  if (!(e.tau_s > 0.0)) throw DomainError("Canadian effects: tau_s has not been solved");
}

}  // namespace

std::array<double, 10> CanadianHyperParams::to_array() const {
  return {mu_a, sigma_a, mu_b, sigma_b, mu_c, sigma_c, mu_n, sigma_n, mu_s0, sigma_s0};
}

CanadianHyperParams CanadianHyperParams::from_array(const std::array<double, 10>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
}

const std::array<const char*, 10>& CanadianHyperParams::names() {
  static const std::array<const char*, 10> n{"mu_a", "sigma_a", "mu_b",  "sigma_b", "mu_c",
                                             "sigma_c", "mu_n", "sigma_n", "mu_s0", "sigma_s0"};
  return n;
}

CanadianHyperParams canadian_reference_hyperparams() {
  return {-2.66786, 0.41, 3.66, 0.09, -46.4, 0.21, -1.89, 0.33, 0.39, 0.15};
}

void validate(const CanadianHyperParams& h) {
  const auto v = h.to_array();
  for (int i = 0; i < 10; ++i) {
    if (!std::isfinite(v[i])) throw DomainError("Canadian hyperparameters must be finite");
    if (i % 2 == 1 && v[i] < 0.0) {
      throw DomainError(std::string(CanadianHyperParams::names()[i]) + " must be nonnegative");
    }
  }
}

double short_term_strength_residual(const CanadianEffects& e, double t) {
  const double k = e.ref_rate;
  return ramp_terms(e, k, k * t, 1.0 - e.sigma0).log_damage;
}

double solve_short_term_strength(CanadianEffects& e) {
  if (!(e.a > 0.0 && e.b > 0.0 && e.c > 0.0 && e.n > 0.0 && e.sigma0 >= 0.0 && e.sigma0 < 1.0)) {
    throw DomainError("Canadian effects out of range");
  }
  auto f = [&](double log_t) { return short_term_strength_residual(e, std::exp(log_t)); };
  double log_t = 0.0;
  try {
    log_t = find_increasing_root(f, std::log(0.0167), 1.0, std::log(1e-12), std::log(1e8));
  } catch (const BracketError&) {
    throw BracketError("short-term strength equation has no root in [1e-12, 1e8] h");
  }
  const double ts = std::exp(log_t);
  if (!std::isfinite(ts)) throw BracketError("short-term strength is not finite");
  e.tau_s = e.ref_rate * ts;
  return ts;
}

std::optional<CanadianEffects> sample_random_effects(const CanadianHyperParams& h, Engine& engine) {
  std::normal_distribution<double> normal;
  CanadianEffects e;
  e.a = std::exp(h.mu_a + h.sigma_a * normal(engine));
  e.b = std::exp(h.mu_b + h.sigma_b * normal(engine));
  e.c = std::exp(h.mu_c + h.sigma_c * normal(engine));
  e.n = std::exp(h.mu_n + h.sigma_n * normal(engine));
  const double eta = std::exp(h.mu_s0 + h.sigma_s0 * normal(engine));
  e.sigma0 = std::isfinite(eta) ? eta / (1.0 + eta) : 1.0;
  if (!(e.a > 0.0 && std::isfinite(e.a) && e.b > 0.0 && std::isfinite(e.b) && e.c > 0.0 &&
        std::isfinite(e.c) && e.n > 0.0 && std::isfinite(e.n) && e.sigma0 < 1.0)) {
    return std::nullopt;
  }
  try {
    solve_short_term_strength(e);
  } catch (const Error&) {
    return std::nullopt;
  }
  return e;
}

CanadianEffects sample_random_effects_retry(const CanadianHyperParams& h, Engine& engine,
                                            int* rejections, int max_attempts) {
  for (int i = 0; i < max_attempts; ++i) {
    if (auto e = sample_random_effects(h, engine)) return *e;
    if (rejections) ++*rejections;
  }
  throw BracketError("no solvable Canadian specimen in " + std::to_string(max_attempts) +
                     " draws");
}

double canadian_log_ramp_damage(const CanadianEffects& e, double rate, double t) {
  check_effects(e);
  const double r = rate * t / e.tau_s - e.sigma0;
  if (!(r > 0.0)) return -kInf;
  return ramp_terms(e, rate, e.tau_s, r).log_damage;
}

double canadian_failure_time_ramp_rate(const CanadianEffects& e, double rate) {
  check_effects(e);
  if (!(rate > 0.0)) throw DomainError("ramp rate must be positive");
  if (rate == e.ref_rate) return e.t_s();
  const double r = solve_failure_excess(e, rate, -kInf);
  return e.tau_s / rate * (e.sigma0 + r);
}

CanadianConstantOutcome canadian_failure_time_constant(const CanadianEffects& e,
                                                       const ConstantProfile& p) {
  check_effects(e);
  const double t0 = p.ramp_end();
  const double tr = canadian_failure_time_ramp_rate(e, p.rate);
  if (tr <= t0) return {Phase::ramp, tr, 0.0};
  const double r0 = p.level / e.tau_s - e.sigma0;
  if (!(r0 > 0.0)) return {Phase::survived, p.end_time, -kInf};
  const double mu = kCanadianTimeConstant;
  const double log_alpha0 = canadian_log_ramp_damage(e, p.rate, t0);
  const double alpha0 = std::exp(log_alpha0);
  const double c1 = std::pow(e.a * e.tau_s * r0, e.b) / mu;
  const double c2 = std::pow(e.c * e.tau_s * r0, e.n) / mu;
  double hold;
  if (c2 * (1.0 - alpha0) < 1e-12 * (c2 * alpha0 + c1)) {
    hold = (1.0 - alpha0) / (c1 + c2 * alpha0);
  } else {
    hold = std::log1p(c2 * (1.0 - alpha0) / (c2 * alpha0 + c1)) / c2;
  }
  const double dur = p.end_time - t0;
  if (hold <= dur) return {Phase::hold, t0 + hold, 0.0};
  // log(alpha0 e^{c2 d} + (c1/c2)(e^{c2 d} - 1))
  const double growth = c2 > 0.0 ? std::log(c1 / c2) + std::log(-std::expm1(-c2 * dur))
                                  : std::log(c1 * dur);
  return {Phase::survived, p.end_time, c2 * dur + logaddexp(log_alpha0, growth)};
}

double canadian_failure_time_rcr(const CanadianEffects& e, double log_damage_at_t1,
                                 const RcrProfile& p) {
  check_effects(e);
  if (!(log_damage_at_t1 < 0.0)) throw DomainError("specimen already failed before the reload");
  const double r = solve_failure_excess(e, p.reload_rate, log_damage_at_t1);
  return p.hold.end_time + e.tau_s / p.reload_rate * (e.sigma0 + r);
}

std::optional<double> canadian_failure_time_piecewise(const CanadianEffects& e,
                                                      const PiecewiseProfile& p) {
  check_effects(e);
  const double mu = kCanadianTimeConstant;
  double alpha = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double len = p.end_of(j) - p.starts()[j];
    const double r = p.values()[j] / e.tau_s - e.sigma0;
    if (!(r > 0.0) || len <= 0.0) continue;
    const double c1 = std::pow(e.a * e.tau_s * r, e.b) / mu;
    const double c2 = std::pow(e.c * e.tau_s * r, e.n) / mu;
    const double need = c2 > 0.0 ? std::log1p(c2 * (1.0 - alpha) / (c2 * alpha + c1)) / c2
                                 : (1.0 - alpha) / c1;
    if (need <= len) return p.starts()[j] + need;
    const double g = std::expm1(c2 * len);
    alpha = alpha * (1.0 + g) + (c2 > 0.0 ? c1 / c2 * g : c1 * len);
    if (!(alpha < 1.0)) return p.end_of(j);
  }
  return std::nullopt;
}

std::optional<double> canadian_failure_time(const CanadianEffects& e, const LoadProfile& profile) {
  if (const auto* r = std::get_if<RampProfile>(&profile)) {
    return canadian_failure_time_ramp_rate(e, r->rate);
  }
  if (const auto* c = std::get_if<ConstantProfile>(&profile)) {
    const auto o = canadian_failure_time_constant(e, *c);
    if (o.phase == Phase::survived) return std::nullopt;
    return o.time;
  }
  if (const auto* r = std::get_if<RcrProfile>(&profile)) {
    const auto o = canadian_failure_time_constant(e, r->hold);
    if (o.phase != Phase::survived) return o.time;
    return canadian_failure_time_rcr(e, o.log_damage, *r);
  }
  return canadian_failure_time_piecewise(e, std::get<PiecewiseProfile>(profile));
}

double canadian_damage_rate(const CanadianEffects& e, double load, double alpha) {
  const double r = load / e.tau_s - e.sigma0;
  if (!(r > 0.0)) return 0.0;
  return (std::pow(e.a * e.tau_s * r, e.b) + std::pow(e.c * e.tau_s * r, e.n) * alpha) /
         kCanadianTimeConstant;
}

std::vector<std::vector<double>> canadian_simulate_times(const CanadianHyperParams& h,
                                                         const DatasetManifest& manifest,
                                                         std::uint64_t seed, std::uint64_t stream,
                                                         Execution execution, int* rejections) {
  validate(h);
  std::vector<std::vector<double>> out(manifest.groups.size());
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t g = 0; g < manifest.groups.size(); ++g) {
    out[g].assign(static_cast<std::size_t>(manifest.groups[g].size), kInf);
    for (std::size_t i = 0; i < out[g].size(); ++i) jobs.emplace_back(g, i);
  }
  std::vector<int> rejected(jobs.size(), 0);
  std::vector<int> solver_failed(jobs.size(), 0);
  for_each_index(jobs.size(), execution, [&](std::size_t j) {
    const auto [g, i] = jobs[j];
    const auto& group = manifest.groups[g];
    Engine eng = make_engine(derive_seed(seed, stream, static_cast<std::uint64_t>(group.id)),
                             streams::canadian_specimen, i);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      auto e = sample_random_effects(h, eng);
      if (!e) {
        ++rejected[j];
        continue;
      }
      try {
        out[g][i] = canadian_failure_time(*e, group.profile).value_or(kInf);
        return;
      } catch (const Error&) {
        ++rejected[j];
      }
    }
    solver_failed[j] = 1;
  });
  for (int f : solver_failed) {
    if (f) throw BracketError("Canadian simulation: no solvable specimen in 1000 draws");
  }
  if (rejections) {
    for (int r : rejected) *rejections += r;
  }
  return out;
}

CanadianSimulation canadian_simulate_dataset(const CanadianHyperParams& h,
                                             const DatasetManifest& manifest, std::uint64_t seed,
                                             Execution execution, std::uint64_t stream_offset) {
  CanadianSimulation sim;
  const auto times = canadian_simulate_times(h, manifest, seed,
                                             streams::canadian_specimen + 100 * stream_offset,
                                             execution, &sim.rejections);
  for (std::size_t g = 0; g < manifest.groups.size(); ++g) {
    const auto& group = manifest.groups[g];
    for (std::size_t i = 0; i < times[g].size(); ++i) {
      FailureRecord rec;
      rec.specimen_id = "C" + std::to_string(group.id) + "-" + std::to_string(i);
      rec.group = group.id;
      if (std::isfinite(times[g][i])) rec.time = times[g][i];
      rec.outcome = classify(group.profile, rec.time);
      sim.records.push_back(std::move(rec));
    }
  }
  return sim;
}

// ---------------------------------------------------------------------------

std::vector<double> SummaryStats::flatten() const {
  std::vector<double> v;
  for (const auto& g : groups) {
    if (g.survival) v.push_back(*g.survival);
    if (g.failure_quantiles) v.insert(v.end(), g.failure_quantiles->begin(), g.failure_quantiles->end());
    if (g.reload_quantiles) v.insert(v.end(), g.reload_quantiles->begin(), g.reload_quantiles->end());
  }
  return v;
}

namespace {

GroupSummary summarise_group(const GroupConfig& group, std::vector<double> times) {
  static const std::vector<double> probs = equally_spaced_probs(19);
  GroupSummary s;
  s.group = group.id;
  if (std::holds_alternative<RampProfile>(group.profile)) {
    std::vector<double> logs;
    for (double t : times) {
      if (std::isfinite(t)) logs.push_back(std::log(t));
    }
    if (!logs.empty()) s.failure_quantiles = quantiles(logs, probs);
    s.failure_count = static_cast<int>(logs.size());
    return s;
  }
  const double t1 = test_horizon(group.profile) < kInf
                        ? test_horizon(group.profile)
                        : std::get<RcrProfile>(group.profile).hold.end_time;
  std::vector<double> early, reload;
  int survivors = 0;
  for (double t : times) {
    if (t <= t1) {
      early.push_back(std::log(t));
    } else {
      ++survivors;
      if (std::isfinite(t)) reload.push_back(std::log(t - t1));
    }
  }
  if (!times.empty()) s.survival = static_cast<double>(survivors) / times.size();
  if (!early.empty()) s.failure_quantiles = quantiles(early, probs);
  if (!reload.empty()) s.reload_quantiles = quantiles(reload, probs);
  s.failure_count = static_cast<int>(early.size());
  s.reload_count = static_cast<int>(reload.size());
  return s;
}

std::vector<std::vector<double>> times_by_group(const std::vector<FailureRecord>& records,
                                                const DatasetManifest& manifest) {
  std::vector<std::vector<double>> out(manifest.groups.size());
  for (std::size_t g = 0; g < manifest.groups.size(); ++g) {
    for (const auto& r : records) {
      if (r.group == manifest.groups[g].id) out[g].push_back(r.time.value_or(kInf));
    }
  }
  return out;
}

void accumulate(const std::optional<std::vector<double>>& block,
                std::optional<std::vector<double>>& sum, std::optional<std::vector<double>>& sq,
                std::vector<int>& count) {
  if (!block) return;
  if (!sum) {
    sum = std::vector<double>(block->size(), 0.0);
    sq = std::vector<double>(block->size(), 0.0);
  }
  for (std::size_t i = 0; i < block->size(); ++i) {
    (*sum)[i] += (*block)[i];
    (*sq)[i] += (*block)[i] * (*block)[i];
  }
  count.push_back(1);
}

std::optional<std::vector<double>> block_sd(const std::optional<std::vector<double>>& observed,
                                            const std::optional<std::vector<double>>& sum,
                                            const std::optional<std::vector<double>>& sq,
                                            std::size_t count) {
  if (!observed) return std::nullopt;
  std::vector<double> sd(observed->size(), kScaleFloor);
  if (sum && count >= 2) {
    const double n = static_cast<double>(count);
    for (std::size_t i = 0; i < sd.size(); ++i) {
      const double mean = (*sum)[i] / n;
      const double var = std::max(0.0, ((*sq)[i] - n * mean * mean) / (n - 1.0));
      sd[i] = std::max(kScaleFloor, std::sqrt(var));
    }
  }
  return sd;
}

double block_distance(const std::optional<std::vector<double>>& obs,
                      const std::optional<std::vector<double>>& sim,
                      const std::optional<std::vector<double>>& scale, double& sum, int& count) {
  if (!obs) return 0.0;
  if (!sim || sim->size() != obs->size()) return kInf;
  for (std::size_t i = 0; i < obs->size(); ++i) {
    const double sc = scale ? (*scale)[i] : 1.0;
    const double d = ((*sim)[i] - (*obs)[i]) / sc;
    sum += d * d;
    ++count;
  }
  return 0.0;
}

}  // namespace

SummaryStats summary_from_times(const std::vector<std::vector<double>>& times,
                                const DatasetManifest& manifest) {
  if (times.size() != manifest.groups.size()) throw DataError("times do not match the manifest");
  SummaryStats s;
  for (std::size_t g = 0; g < manifest.groups.size(); ++g) {
    s.groups.push_back(summarise_group(manifest.groups[g], times[g]));
  }
  return s;
}

SummaryStats compute_summary_stats(const std::vector<FailureRecord>& records,
                                   const DatasetManifest& manifest) {
  return summary_from_times(times_by_group(records, manifest), manifest);
}

SummaryScales bootstrap_scales(const std::vector<FailureRecord>& records,
                               const DatasetManifest& manifest, int replicates,
                               std::uint64_t seed) {
  const auto times = times_by_group(records, manifest);
  const SummaryStats observed = summary_from_times(times, manifest);
  SummaryScales scales;
  for (std::size_t g = 0; g < manifest.groups.size(); ++g) {
    const auto& obs = observed.groups[g];
    std::optional<std::vector<double>> s_sum, s_sq, f_sum, f_sq, r_sum, r_sq;
    std::vector<int> s_n, f_n, r_n;
    const auto& tg = times[g];
    for (int rep = 0; rep < replicates && !tg.empty(); ++rep) {
      Engine eng = make_engine(derive_seed(seed, streams::bootstrap, g), streams::bootstrap, rep);
      std::uniform_int_distribution<std::size_t> pick(0, tg.size() - 1);
      std::vector<double> resample(tg.size());
      for (double& t : resample) t = tg[pick(eng)];
      const GroupSummary b = summarise_group(manifest.groups[g], resample);
      std::optional<std::vector<double>> surv;
      if (b.survival) surv = std::vector<double>{*b.survival};
      accumulate(surv, s_sum, s_sq, s_n);
      accumulate(b.failure_quantiles, f_sum, f_sq, f_n);
      accumulate(b.reload_quantiles, r_sum, r_sq, r_n);
    }
    GroupSummary sc;
    sc.group = obs.group;
    std::optional<std::vector<double>> obs_surv;
    if (obs.survival) obs_surv = std::vector<double>{*obs.survival};
    if (auto v = block_sd(obs_surv, s_sum, s_sq, s_n.size())) sc.survival = (*v)[0];
    sc.failure_quantiles = block_sd(obs.failure_quantiles, f_sum, f_sq, f_n.size());
    sc.reload_quantiles = block_sd(obs.reload_quantiles, r_sum, r_sq, r_n.size());
    scales.groups.push_back(std::move(sc));
  }
  return scales;
}

double summary_distance(const SummaryStats& simulated, const SummaryStats& observed,
                        const SummaryScales& scales) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t g = 0; g < observed.groups.size(); ++g) {
    const auto& obs = observed.groups[g];
    const GroupSummary* sim = nullptr;
    for (const auto& s : simulated.groups) {
      if (s.group == obs.group) sim = &s;
    }
    if (!sim) return kInf;
    const GroupSummary* sc = nullptr;
    for (const auto& s : scales.groups) {
      if (s.group == obs.group) sc = &s;
    }
    auto wrap = [](const std::optional<double>& v) {
      return v ? std::optional<std::vector<double>>(std::vector<double>{*v}) : std::nullopt;
    };
    const auto no_scale = std::optional<std::vector<double>>{};
    const auto no_block = std::optional<std::vector<double>>{};
    const auto& obs_fail =
        obs.failure_count >= kMinQuantileBlockCount ? obs.failure_quantiles : no_block;
    const auto& obs_reload =
        obs.reload_count >= kMinQuantileBlockCount ? obs.reload_quantiles : no_block;
    if (block_distance(wrap(obs.survival), wrap(sim->survival),
                       sc ? wrap(sc->survival) : no_scale, sum, count) == kInf ||
        block_distance(obs_fail, sim->failure_quantiles,
                       sc ? sc->failure_quantiles : no_scale, sum, count) == kInf ||
        block_distance(obs_reload, sim->reload_quantiles,
                       sc ? sc->reload_quantiles : no_scale, sum, count) == kInf) {
      return kInf;
    }
  }
  return count > 0 ? std::sqrt(sum / count) : 0.0;
}

// ---------------------------------------------------------------------------

bool PriorBox::contains(const std::array<double, 10>& v) const {
  for (int i = 0; i < 10; ++i) {
    if (!(v[i] >= lower[i] && v[i] <= upper[i])) return false;
  }
  return true;
}

PriorBox canadian_default_prior() {
  // published intervals widened on both sides; mu_a moved with the reference set
  const double shift = canadian_reference_hyperparams().mu_a - (-12.6);
  PriorBox p;
  p.lower = {-13.2 + shift - 2.0, 0.01, 2.0, 0.01, -70.0, 0.01, -3.5, 0.01, -2.0, 0.01};
  p.upper = {-12.2 + shift + 2.0, 1.0, 5.0, 0.6, -5.0, 1.5, 1.0, 1.0, 2.0, 1.0};
  return p;
}

AbcResult abc_mcmc_fit(const SummaryStats& observed, const SummaryScales& scales,
                       const DatasetManifest& manifest, const AbcConfig& cfg,
                       const PriorBox& prior, const CanadianHyperParams& start,
                       std::uint64_t seed) {
  if (!(cfg.tolerance > 0.0)) throw ConfigError("ABC tolerance must be positive");
  if (cfg.burn_in < 0 || cfg.thinning < 1 || cfg.samples < 1) {
    throw ConfigError("ABC needs burn-in >= 0, thinning >= 1 and samples >= 1");
  }
  auto theta = start.to_array();
  if (!prior.contains(theta)) throw ConfigError("ABC starting point lies outside the prior box");

  AbcResult result;
  auto distance_at = [&](const std::array<double, 10>& v, long iteration) {
    int rej = 0;
    try {
      const auto times = canadian_simulate_times(CanadianHyperParams::from_array(v), manifest,
                                                 derive_seed(seed, streams::abc_simulation,
                                                             static_cast<std::uint64_t>(iteration)),
                                                 streams::abc_simulation, Execution::parallel,
                                                 &rej);
      result.rejected_specimens += rej;
      return summary_distance(summary_from_times(times, manifest), observed, scales);
    } catch (const BracketError&) {
      return kInf;
    }
  };

  Engine eng = make_engine(seed, streams::abc_chain);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto scale = cfg.proposal_scales;
  double dist = distance_at(theta, 0);

  const long total = static_cast<long>(cfg.burn_in) + static_cast<long>(cfg.thinning) * cfg.samples;
  int window_accepts = 0;
  int window_size = 0;
  long post_accepts = 0;
  for (long it = 1; it <= total; ++it) {
    const bool burning = it <= cfg.burn_in;
    auto prop = theta;
    double log_jac = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double step = scale[i] * normal(eng);
      if (i % 2 == 0) {
        prop[i] += step;
      } else {
        prop[i] = theta[i] * std::exp(step);
        log_jac += step;
      }
    }
    const double u = unif(eng);
    bool accepted = false;
    if (prior.contains(prop) && std::log(u) < log_jac) {
      const double d = distance_at(prop, it);
      const double bound = burning ? std::max(cfg.tolerance, dist) : cfg.tolerance;
      if (d <= bound) {
        theta = prop;
        dist = d;
        accepted = true;
      }
    }
    if (burning) {
      window_accepts += accepted;
      if (++window_size == cfg.tune_interval) {
        const double rate = static_cast<double>(window_accepts) / window_size;
        const double f = rate < 0.10 ? 0.8 : (rate > 0.40 ? 1.25 : 1.0);
        for (double& s : scale) s *= f;
        window_accepts = 0;
        window_size = 0;
      }
    } else {
      post_accepts += accepted;
      if ((it - cfg.burn_in) % cfg.thinning == 0) {
        result.samples.push_back({CanadianHyperParams::from_array(theta), dist});
      }
    }
  }
  result.iterations = static_cast<int>(total);
  const long post = total - cfg.burn_in;
  result.acceptance_rate = post > 0 ? static_cast<double>(post_accepts) / post : 0.0;
  if (post >= 1000 && result.acceptance_rate < cfg.min_acceptance) {
    throw ConfigError("ABC acceptance rate " + std::to_string(result.acceptance_rate) +
                      " is below the minimum; increase the tolerance or lengthen the burn-in");
  }
  return result;
}

}  // namespace dol
