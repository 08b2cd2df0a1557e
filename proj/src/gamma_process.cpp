#include "dol/gamma_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/special_functions/gamma.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "dol/error.hpp"
#include "dol/numerics.hpp"
#include "dol/rng.hpp"

namespace dol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pos(double x) { return x > 0.0 ? x : 0.0; }

// Breakpoint logs and log g at each breakpoint, for fast repeated evaluation.
struct LawTable {
  std::vector<double> log_t;
  std::vector<double> log_g;
  std::vector<double> a;

  explicit LawTable(const BrokenPowerLaw& law) : a(law.powers) {
    double lg = 0.0;
    for (std::size_t i = 0; i < law.times.size(); ++i) {
      log_t.push_back(std::log(law.times[i]));
      if (i > 0) lg += law.powers[i] * (log_t[i] - log_t[i - 1]);
      log_g.push_back(lg);
    }
  }

  // log g(t) given log t
  double log_value(double lt) const {
    if (log_t.empty()) return a[0] * lt;
    std::size_t i = 0;
    while (i < log_t.size() && lt > log_t[i]) ++i;
    if (i < log_t.size()) return log_g[i] + a[i] * (lt - log_t[i]);
    return log_g.back() + a.back() * (lt - log_t.back());
  }

  // Power of the segment containing exp(lt).
  double power_at(double lt) const {
    std::size_t i = 0;
    while (i < log_t.size() && lt > log_t[i]) ++i;
    return a[i];
  }
};

double neg_shape_derivative(double s, double x) {
  const double h = 1e-6 * std::max(1.0, s);
  if (s > h) {
    return (boost::math::gamma_p(s - h, x) - boost::math::gamma_p(s + h, x)) / (2.0 * h);
  }
  const double p0 = s > 0.0 ? boost::math::gamma_p(s, x) : 1.0;
  return (p0 - boost::math::gamma_p(s + h, x)) / h;
}

double censor_time(const LoadProfile& profile) {
  if (const auto* c = std::get_if<ConstantProfile>(&profile)) return c->end_time;
  if (const auto* r = std::get_if<RcrProfile>(&profile)) return r->hold.end_time;
  if (const auto* p = std::get_if<PiecewiseProfile>(&profile)) return p->horizon();
  throw DataError("censored record in a ramp group");
}

}  // namespace

double BrokenPowerLaw::log_value(double t) const {
  if (!(t > 0.0)) return -kInf;
  const double lt = std::log(t);
  if (times.empty()) return powers[0] * lt;
  // walk the anchors, g(t_1) = 1
  double lg = 0.0;
  double prev = std::log(times[0]);
  if (lt <= prev) return powers[0] * (lt - prev);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double cur = std::log(times[i]);
    if (lt <= cur) return lg + powers[i] * (lt - prev);
    lg += powers[i] * (cur - prev);
    prev = cur;
  }
  return lg + powers.back() * (lt - prev);
}

double BrokenPowerLaw::operator()(double t) const {
  if (!(t > 0.0)) return 0.0;
  return std::exp(log_value(t));
}

double BrokenPowerLaw::derivative(double t) const {
  if (!(t > 0.0)) return 0.0;
  std::size_t i = 0;
  while (i < times.size() && t > times[i]) ++i;
  return powers[i] * std::exp(log_value(t)) / t;
}

void validate(const BrokenPowerLaw& law) {
  if (law.powers.size() != law.times.size() + 1) {
    throw DomainError("power law needs one more power than breakpoints");
  }
  for (double a : law.powers) {
    if (!std::isfinite(a)) throw DomainError("power law powers must be finite");
  }
  for (std::size_t i = 0; i < law.times.size(); ++i) {
    if (!(law.times[i] > 0.0) || !std::isfinite(law.times[i]) ||
        (i > 0 && !(law.times[i] > law.times[i - 1]))) {
      throw DomainError("breakpoint times must be positive and increasing");
    }
  }
}

void validate(const GammaProcessParams& p) {
  if (!(p.u > 0.0) || !(p.tau_star >= 0.0) || !(p.xi > 0.0) || !(p.delta_tau > 0.0) ||
      !std::isfinite(p.u) || !std::isfinite(p.xi) || !std::isfinite(p.tau_star)) {
    throw DomainError("gamma process needs u > 0, tau* >= 0, xi > 0, delta_tau > 0");
  }
  validate(p.law);
}

GammaProcessParams gamma_reference_params() {
  GammaProcessParams p;
  p.u = 0.084;
  p.tau_star = 4.35;
  p.xi = 0.27;
  p.law.times = {0.00144, 2327.0};
  p.law.powers = {3.7e-9, 0.027, 0.094};
  return p;
}

std::vector<double> load_ladder(const LoadProfile& profile, double max_load, double delta_tau) {
  if (!(delta_tau > 0.0)) throw DomainError("load increment must be positive");
  std::vector<double> lev{0.0};
  if (!(max_load > 0.0)) return lev;
  for (long i = 1;; ++i) {
    const double v = static_cast<double>(i) * delta_tau;
    if (v >= max_load) break;
    lev.push_back(v);
  }
  for (double v : plateau_levels(profile)) {
    if (v > 0.0 && v < max_load) lev.push_back(v);
  }
  lev.push_back(max_load);
  std::sort(lev.begin(), lev.end());
  std::vector<double> out;
  for (double v : lev) {
    if (out.empty() || v - out.back() > 1e-12 * std::max(1.0, v)) {
      out.push_back(v);
    } else if (v == max_load) {
      out.back() = v;
    }
  }
  return out;
}

double eta_of_t(const GammaProcessParams& p, const LoadProfile& profile, double t) {
  const double m = running_max(profile, t);
  if (!(m > p.tau_star)) return 0.0;
  const auto lev = load_ladder(profile, m, p.delta_tau);
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < lev.size(); ++j) {
    const double w = pos(lev[j + 1] - p.tau_star) - pos(lev[j] - p.tau_star);
    if (w <= 0.0) continue;
    sum += p.law(duration_exceeding(profile, lev[j], t)) * w;
  }
  return p.u * sum;
}

double eta_rate(const GammaProcessParams& p, const LoadProfile& profile, double t) {
  const double m = running_max(profile, t);
  if (!(m > p.tau_star)) return 0.0;
  const auto lev = load_ladder(profile, m, p.delta_tau);
  const double load = load_at(profile, t);
  double sum = 0.0;
  double d_top = 0.0;
  for (std::size_t j = 0; j + 1 < lev.size(); ++j) {
    const double w = pos(lev[j + 1] - p.tau_star) - pos(lev[j] - p.tau_star);
    const double d = duration_exceeding(profile, lev[j], t);
    if (j + 2 == lev.size()) d_top = d;
    if (w <= 0.0 || !(load > lev[j])) continue;
    sum += p.law.derivative(d) * w;
  }
  sum += p.law(d_top) * running_max_rate(profile, t);
  return p.u * sum;
}

double eta_step_profile(const GammaProcessParams& p, const PiecewiseProfile& profile, double t) {
  // time spent at each distinct positive level up to t
  std::vector<std::pair<double, double>> spans;
  const auto starts = profile.starts();
  const auto values = profile.values();
  for (std::size_t j = 0; j < profile.size() && starts[j] < t; ++j) {
    const double end = j + 1 < profile.size() ? std::min(t, starts[j + 1]) : t;
    if (values[j] > 0.0 && end > starts[j]) spans.emplace_back(values[j], end - starts[j]);
  }
  if (spans.empty()) return 0.0;
  std::sort(spans.begin(), spans.end());
  // merge equal levels
  std::vector<std::pair<double, double>> lv;
  for (const auto& s : spans) {
    if (!lv.empty() && lv.back().first == s.first) {
      lv.back().second += s.second;
    } else {
      lv.push_back(s);
    }
  }
  double above = 0.0;
  for (const auto& s : lv) above += s.second;
  double sum = 0.0;
  double prev = 0.0;
  for (const auto& [level, dur] : lv) {
    const double w = pos(level - p.tau_star) - pos(prev - p.tau_star);
    if (w > 0.0) sum += p.law(above) * w;
    above -= dur;
    prev = level;
  }
  return p.u * sum;
}

double survival_from_eta(double eta, double xi) {
  if (!(eta > 0.0)) return 1.0;
  return boost::math::gamma_p(eta, 1.0 / xi);
}

double gp_survival(const GammaProcessParams& p, const LoadProfile& profile, double t) {
  return survival_from_eta(eta_of_t(p, profile, t), p.xi);
}

double gp_log_density(const GammaProcessParams& p, const LoadProfile& profile, double t) {
  const double rate = eta_rate(p, profile, t);
  if (!(rate > 0.0)) return -kInf;
  const double d = neg_shape_derivative(eta_of_t(p, profile, t), 1.0 / p.xi);
  if (!(d > 0.0)) return -kInf;
  return std::log(rate) + std::log(d);
}

// ---------------------------------------------------------------------------

GpLikelihoodCache::GpLikelihoodCache(const std::vector<FailureRecord>& records,
                                     const DatasetManifest& manifest, double delta_tau)
    : delta_tau_(delta_tau) {
  if (!(delta_tau > 0.0)) throw DomainError("load increment must be positive");
  profiles_.reserve(manifest.groups.size());
  for (const auto& g : manifest.groups) profiles_.push_back(g.profile);
  for (const auto& rec : records) {
    std::size_t gi = manifest.groups.size();
    for (std::size_t g = 0; g < manifest.groups.size(); ++g) {
      if (manifest.groups[g].id == rec.group) gi = g;
    }
    if (gi == manifest.groups.size()) throw DataError(rec.specimen_id + ": group not in manifest");
    const LoadProfile& profile = profiles_[gi];
    Entry e;
    e.profile = &profile;
    e.failed = rec.time.has_value();
    e.time = e.failed ? *rec.time : censor_time(profile);
    e.max_load = running_max(profile, e.time);
    e.max_rate = running_max_rate(profile, e.time);
    e.begin = lo_.size();
    const auto lev = load_ladder(profile, e.max_load, delta_tau);
    const double load = load_at(profile, e.time);
    for (std::size_t j = 0; j + 1 < lev.size(); ++j) {
      lo_.push_back(lev[j]);
      hi_.push_back(lev[j + 1]);
      const double d = duration_exceeding(profile, lev[j], e.time);
      log_d_.push_back(d > 0.0 ? std::log(d) : -kInf);
      inv_d_.push_back(d > 0.0 ? 1.0 / d : 0.0);
      active_.push_back(load > lev[j] ? 1 : 0);
    }
    e.end = lo_.size();
    entries_.push_back(e);
  }
}

std::vector<double> GpLikelihoodCache::failure_times() const {
  std::vector<double> t;
  for (const auto& e : entries_) {
    if (e.failed) t.push_back(e.time);
  }
  return t;
}

struct GpLikelihoodCache::Law : LawTable {
  using LawTable::LawTable;
};

double GpLikelihoodCache::record_ll(const GammaProcessParams& p, const Law& tab,
                                   const Entry& e) const {
  if (!(e.max_load > p.tau_star)) return e.failed ? -kInf : 0.0;
  double eta = 0.0;
  double rate = 0.0;
  for (std::size_t j = e.begin; j < e.end; ++j) {
    const double w = pos(hi_[j] - p.tau_star) - pos(lo_[j] - p.tau_star);
    const bool top = j + 1 == e.end;
    if ((w <= 0.0 && !top) || log_d_[j] == -kInf) continue;
    const double g = std::exp(tab.log_value(log_d_[j]));
    eta += g * w;
    if (e.failed) {
      if (active_[j] && w > 0.0) rate += tab.power_at(log_d_[j]) * g * inv_d_[j] * w;
      if (top) rate += g * e.max_rate;
    }
  }
  eta *= p.u;
  if (!e.failed) {
    const double s = survival_from_eta(eta, p.xi);
    return s > 0.0 ? std::log(s) : -kInf;
  }
  rate *= p.u;
  if (!(rate > 0.0)) return -kInf;
  const double d = neg_shape_derivative(eta, 1.0 / p.xi);
  if (!(d > 0.0)) return -kInf;
  return std::log(rate) + std::log(d);
}

double GpLikelihoodCache::log_likelihood(const GammaProcessParams& p, Execution execution) const {
  if (std::fabs(p.delta_tau - delta_tau_) > 1e-15 * delta_tau_) {
    throw ConfigError("likelihood cache was built for a different load increment");
  }
  const Law law(p.law);
  std::vector<double> ll(entries_.size());
  for_each_index(entries_.size(), execution,
                 [&](std::size_t i) { ll[i] = record_ll(p, law, entries_[i]); });
  double sum = 0.0;
  for (double v : ll) {
    if (!(v > -kInf)) return -kInf;
    sum += v;
  }
  return sum;
}

double GpLikelihoodCache::log_likelihood_direct(const GammaProcessParams& p) const {
  double sum = 0.0;
  for (const auto& e : entries_) {
    const double v = e.failed ? gp_log_density(p, *e.profile, e.time)
                              : std::log(gp_survival(p, *e.profile, e.time));
    if (!(v > -kInf)) return -kInf;
    sum += v;
  }
  return sum;
}

double gp_log_likelihood(const GammaProcessParams& p, const std::vector<FailureRecord>& records,
                         const DatasetManifest& manifest, Execution execution) {
  validate(p);
  return GpLikelihoodCache(records, manifest, p.delta_tau).log_likelihood(p, execution);
}

// ---------------------------------------------------------------------------

std::vector<double> gp_to_vector(const GammaProcessParams& p) {
  std::vector<double> v{std::log(p.u), p.tau_star, std::log(p.xi)};
  v.insert(v.end(), p.law.powers.begin(), p.law.powers.end());
  for (double t : p.law.times) v.push_back(std::log(t));
  return v;
}

GammaProcessParams gp_from_vector(const std::vector<double>& v, double delta_tau) {
  if (v.size() < 4 || (v.size() - 4) % 2 != 0) throw DomainError("bad gamma parameter vector");
  const std::size_t b = (v.size() - 4) / 2;
  GammaProcessParams p;
  p.u = std::exp(v[0]);
  p.tau_star = v[1];
  p.xi = std::exp(v[2]);
  p.law.powers.assign(v.begin() + 3, v.begin() + 4 + static_cast<long>(b));
  for (std::size_t i = 0; i < b; ++i) p.law.times.push_back(std::exp(v[4 + b + i]));
  p.delta_tau = delta_tau;
  return p;
}

bool gp_in_prior(const std::vector<double>& v, const GpPrior& pr) {
  const std::size_t b = (v.size() - 4) / 2;
  if (!(v[0] >= pr.log_u_min && v[0] <= pr.log_u_max)) return false;
  if (!(v[1] >= pr.tau_star_min && v[1] <= pr.tau_star_max)) return false;
  if (!(v[2] >= pr.log_xi_min && v[2] <= pr.log_xi_max)) return false;
  for (std::size_t i = 0; i <= b; ++i) {
    if (!(v[3 + i] >= pr.power_min && v[3 + i] <= pr.power_max)) return false;
  }
  for (std::size_t i = 0; i < b; ++i) {
    const double lt = v[4 + b + i];
    if (!(lt >= pr.log_time_min && lt <= pr.log_time_max)) return false;
    if (i > 0 && !(lt > v[4 + b + i - 1])) return false;
  }
  return true;
}

namespace {

std::vector<double> initial_steps(std::size_t dim) {
  const std::size_t b = (dim - 4) / 2;
  std::vector<double> s{0.3, 1.0, 0.2};
  for (std::size_t i = 0; i <= b; ++i) s.push_back(0.02);
  for (std::size_t i = 0; i < b; ++i) s.push_back(0.5);
  return s;
}

struct PolishContext {
  const GpLikelihoodCache* cache;
  const GpPrior* prior;
  Execution execution;
  std::size_t dim;
};

double negative_ll(const gsl_vector* x, void* params) {
  const auto* ctx = static_cast<const PolishContext*>(params);
  std::vector<double> v(ctx->dim);
  for (std::size_t i = 0; i < ctx->dim; ++i) v[i] = gsl_vector_get(x, i);
  if (!gp_in_prior(v, *ctx->prior)) return 1e300;
  const double ll =
      ctx->cache->log_likelihood(gp_from_vector(v, ctx->cache->delta_tau()), ctx->execution);
  return std::isfinite(ll) ? -ll : 1e300;
}

}  // namespace

GpSample gp_polish(const GpLikelihoodCache& cache, const GammaProcessParams& start,
                   const GpPrior& prior, int max_evaluations, Execution execution) {
  std::vector<double> v = gp_to_vector(start);
  const std::size_t dim = v.size();
  PolishContext ctx{&cache, &prior, execution, dim};
  gsl_multimin_function fn{&negative_ll, dim, &ctx};
  gsl_vector* x = gsl_vector_alloc(dim);
  gsl_vector* step = gsl_vector_alloc(dim);
  const auto steps = initial_steps(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    gsl_vector_set(x, i, v[i]);
    gsl_vector_set(step, i, steps[i]);
  }
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
  gsl_multimin_fminimizer_set(m, &fn, x, step);
  // each iteration costs one to dim+1 evaluations; budget iterations loosely
  const int max_iter = std::max(1, max_evaluations / 2);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-8) == GSL_SUCCESS) break;
  }
  for (std::size_t i = 0; i < dim; ++i) v[i] = gsl_vector_get(m->x, i);
  const double f = m->fval;
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(x);
  gsl_vector_free(step);
  GpSample out{gp_from_vector(v, cache.delta_tau()), -f};
  if (!(f < 1e300)) out.log_likelihood = -kInf;
  const double ll0 = gp_in_prior(gp_to_vector(start), prior)
                         ? cache.log_likelihood(start, execution)
                         : -kInf;
  if (ll0 > out.log_likelihood) return {start, ll0};
  return out;
}

GpSample gp_add_breakpoint(const GpLikelihoodCache& cache, const GpSample& fit,
                           const GpPrior& prior, int max_evaluations, Execution execution) {
  auto times = cache.failure_times();
  if (times.empty()) throw FitError("no failures to place a breakpoint");
  const double probs[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const auto cand = quantiles(times, probs);
  GpSample best{fit.params, -kInf};
  const auto& law = fit.params.law;
  for (double tc : cand) {
    bool clash = false;
    for (double t : law.times) clash = clash || std::fabs(std::log(t / tc)) < 1e-6;
    if (clash || !(tc > 0.0)) continue;
    GammaProcessParams p = fit.params;
    std::size_t seg = 0;
    while (seg < law.times.size() && tc > law.times[seg]) ++seg;
    p.law.times.insert(p.law.times.begin() + static_cast<long>(seg), tc);
    p.law.powers.insert(p.law.powers.begin() + static_cast<long>(seg), law.powers[seg]);
    // re-anchor at the new first breakpoint so eta is unchanged
    p.u = fit.params.u * law(p.law.times.front());
    if (!gp_in_prior(gp_to_vector(p), prior)) continue;
    const GpSample s = gp_polish(cache, p, prior, std::max(50, max_evaluations / 10), execution);
    if (s.log_likelihood > best.log_likelihood) best = s;
  }
  if (!(best.log_likelihood > -kInf)) throw FitError("no admissible breakpoint candidate");
  return gp_polish(cache, best.params, prior, max_evaluations, execution);
}

GpChain gp_mcmc_fit(const GpLikelihoodCache& cache, const GammaProcessParams& start,
                    const GpMcmcConfig& cfg, const GpPrior& prior, std::uint64_t seed) {
  if (cfg.iterations <= cfg.burn_in || cfg.thinning < 1 || cfg.burn_in < 0) {
    throw ConfigError("gamma MCMC needs iterations > burn-in >= 0 and thinning >= 1");
  }
  std::vector<double> x = gp_to_vector(start);
  const std::size_t dim = x.size();
  if (!gp_in_prior(x, prior)) throw FitError("gamma MCMC start lies outside the prior box");
  double ll = cache.log_likelihood(start, cfg.execution);
  if (!std::isfinite(ll)) {
    throw FitError("gamma MCMC start has a non-finite log-likelihood (" + std::to_string(ll) +
                   "); check tau* against the smallest failure loads");
  }
  GpChain chain;
  chain.breakpoints = start.law.breakpoints();
  chain.best = {start, ll};

  Engine eng = make_engine(seed, streams::gp_chain);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const auto steps = initial_steps(dim);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<long>(dim), static_cast<long>(dim));
  for (std::size_t i = 0; i < dim; ++i) cov(i, i) = 0.01 * steps[i] * steps[i];
  double lambda = 1.0;
  Eigen::MatrixXd chol = cov.llt().matrixL();

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<long>(dim));
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(static_cast<long>(dim), static_cast<long>(dim));
  long n_hist = 0;
  int window_acc = 0;
  long post_acc = 0;

  for (int it = 1; it <= cfg.iterations; ++it) {
    Eigen::VectorXd z(static_cast<long>(dim));
    for (std::size_t i = 0; i < dim; ++i) z(i) = normal(eng);
    const Eigen::VectorXd step = std::sqrt(lambda) * (chol * z);
    std::vector<double> y(x);
    for (std::size_t i = 0; i < dim; ++i) y[i] += step(i);
    const double u = unif(eng);
    bool accepted = false;
    if (gp_in_prior(y, prior)) {
      const GammaProcessParams py = gp_from_vector(y, cache.delta_tau());
      const double lly = cache.log_likelihood(py, cfg.execution);
      if (std::isfinite(lly) && std::log(u) < lly - ll) {
        x = std::move(y);
        ll = lly;
        accepted = true;
        if (ll > chain.best.log_likelihood) chain.best = {py, ll};
      }
    }
    if (it <= cfg.burn_in) {
      window_acc += accepted;
      // running covariance of the burn-in states after the first window
      if (it > cfg.adapt_interval) {
        ++n_hist;
        Eigen::VectorXd xv(static_cast<long>(dim));
        for (std::size_t i = 0; i < dim; ++i) xv(i) = x[i];
        const Eigen::VectorXd delta = xv - mean;
        mean += delta / static_cast<double>(n_hist);
        m2 += delta * (xv - mean).transpose();
      }
      if (it % cfg.adapt_interval == 0) {
        const double rate = static_cast<double>(window_acc) / cfg.adapt_interval;
        if (rate < 0.15) lambda *= 0.6;
        if (rate > 0.35) lambda *= 1.5;
        window_acc = 0;
        if (n_hist > static_cast<long>(10 * dim)) {
          Eigen::MatrixXd c = m2 / static_cast<double>(n_hist - 1);
          for (std::size_t i = 0; i < dim; ++i) c(i, i) += 1e-10 * (1.0 + steps[i] * steps[i]);
          Eigen::LLT<Eigen::MatrixXd> llt(c * (2.38 * 2.38 / static_cast<double>(dim)));
          if (llt.info() == Eigen::Success) chol = llt.matrixL();
          lambda = std::clamp(lambda, 0.01, 100.0);
        }
      }
    } else {
      post_acc += accepted;
      if ((it - cfg.burn_in) % cfg.thinning == 0) {
        chain.samples.push_back({gp_from_vector(x, cache.delta_tau()), ll});
      }
    }
  }
  chain.acceptance_rate = static_cast<double>(post_acc) / (cfg.iterations - cfg.burn_in);
  return chain;
}

const GpChain& GpFitResult::selected_chain() const {
  for (const auto& c : chains) {
    if (c.breakpoints == selected) return c;
  }
  throw FitError("selected breakpoint count has no chain");
}

GpFitResult gp_bic_select(const GpLikelihoodCache& cache, int max_breakpoints,
                          const GpMcmcConfig& cfg, const GpPrior& prior, std::uint64_t seed) {
  if (max_breakpoints < 0) throw ConfigError("max breakpoints must be nonnegative");
  const double log_n = std::log(static_cast<double>(cache.size()));
  GpFitResult result;

  // coarse multistart for the breakpoint-free law
  GpSample start{GammaProcessParams{}, -kInf};
  for (double u : {0.01, 0.03, 0.1, 0.3}) {
    for (double xi : {0.1, 0.3, 1.0}) {
      for (double ts : {0.0, 5.0}) {
        for (double a : {0.02, 0.1}) {
          GammaProcessParams p;
          p.u = u;
          p.xi = xi;
          p.tau_star = ts;
          p.law.powers = {a};
          p.delta_tau = cache.delta_tau();
          if (!gp_in_prior(gp_to_vector(p), prior)) continue;
          const double ll = cache.log_likelihood(p, cfg.execution);
          if (ll > start.log_likelihood) start = {p, ll};
        }
      }
    }
  }
  if (!(start.log_likelihood > -kInf)) throw FitError("no finite starting point for the gamma fit");
  GpSample current = gp_polish(cache, start.params, prior, cfg.polish_evaluations, cfg.execution);

  for (int b = 0; b <= max_breakpoints; ++b) {
    if (b > 0) {
      current = gp_add_breakpoint(cache, result.chains.back().best, prior, cfg.polish_evaluations,
                                  cfg.execution);
    }
    GpChain chain = gp_mcmc_fit(cache, current.params, cfg, prior,
                                derive_seed(seed, streams::gp_chain, static_cast<std::uint64_t>(b)));
    if (current.log_likelihood > chain.best.log_likelihood) chain.best = current;
    const int k = gp_parameter_count(b);
    const double bic = -2.0 * chain.best.log_likelihood + k * log_n;
    result.bic.push_back({b, chain.best.log_likelihood, k, bic});
    result.chains.push_back(std::move(chain));
    if (b > 0 && bic > result.bic[result.bic.size() - 2].bic) break;
  }
  result.selected = std::min_element(result.bic.begin(), result.bic.end(),
                                     [](const GpBicEntry& a, const GpBicEntry& c) {
                                       return a.bic < c.bic;
                                     })
                        ->breakpoints;
  return result;
}

// ---------------------------------------------------------------------------

std::vector<double> gp_simulate_times(const GammaProcessParams& p, const LoadProfile& profile,
                                      int n, std::uint64_t seed, Execution execution) {
  validate(p);
  std::vector<double> target(static_cast<std::size_t>(std::max(0, n)));
  const double x = 1.0 / p.xi;
  for_each_index(target.size(), execution, [&](std::size_t i) {
    Engine eng = make_engine(seed, streams::gamma_specimen, i);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(eng);
    while (u <= 0.0) u = unif(eng);
    // failure once eta(t) reaches the shape at which P(shape, 1/xi) = u
    target[i] = boost::math::gamma_p_inva(x, u);
  });
  const double horizon = test_horizon(profile);
  const double needed = target.empty() ? 0.0 : *std::max_element(target.begin(), target.end());

  // eta on a grid that is log-spaced in the offset from each kink, so a
  // fast reload after a long hold is resolved
  std::vector<double> gt{0.0};
  std::vector<double> ge{0.0};
  std::vector<double> starts{0.0};
  for (double k : kinks(profile, horizon)) starts.push_back(k);
  std::sort(starts.begin(), starts.end());
  const double ratio = std::pow(10.0, 1.0 / 25.0);
  bool done = false;
  for (std::size_t s = 0; s < starts.size() && !done; ++s) {
    const double begin = starts[s];
    const double end = s + 1 < starts.size() ? starts[s + 1] : horizon;
    for (double d = 1e-9;; d *= ratio) {
      const double tt = std::min(begin + d, end);
      if (tt > gt.back()) {
        gt.push_back(tt);
        ge.push_back(eta_of_t(p, profile, tt));
      }
      if (ge.back() >= needed) {
        done = true;
        break;
      }
      if (tt >= end || d > 1e9) break;  // d cap: the load never grows enough
    }
  }
  // eta is nondecreasing; guard against rounding
  for (std::size_t i = 1; i < ge.size(); ++i) ge[i] = std::max(ge[i], ge[i - 1]);

  std::vector<double> out(target.size(), kInf);
  for_each_index(target.size(), execution, [&](std::size_t i) {
    const double need = target[i];
    const auto it = std::lower_bound(ge.begin(), ge.end(), need);
    if (it == ge.end()) return;  // survives the horizon
    const auto k = static_cast<std::size_t>(it - ge.begin());
    const double lo = k == 0 ? 0.0 : gt[k - 1];
    const double hi = gt[k];
    auto f = [&](double s) { return eta_of_t(p, profile, s) - need; };
    try {
      out[i] = find_root(f, lo, hi, RootConfig{1e-15, 1e-12, 200});
    } catch (const BracketError&) {
      out[i] = hi;
    }
  });
  return out;
}

std::vector<FailureRecord> gp_simulate(const GammaProcessParams& p, const GroupConfig& group,
                                       int n, std::uint64_t seed, Execution execution,
                                       const std::string& id_prefix) {
  const auto times = gp_simulate_times(
      p, group.profile, n, derive_seed(seed, streams::gamma_specimen, static_cast<std::uint64_t>(group.id)),
      execution);
  std::vector<FailureRecord> out;
  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    FailureRecord rec;
    rec.specimen_id = id_prefix + std::to_string(i);
    rec.group = group.id;
    if (std::isfinite(times[i])) rec.time = times[i];
    rec.outcome = classify(group.profile, rec.time);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace dol
