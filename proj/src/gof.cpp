#include "dol/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dol/error.hpp"
#include "dol/numerics.hpp"
#include "dol/rng.hpp"

namespace dol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// T1 of a hold group, empty for ramp groups.
std::optional<double> hold_end(const LoadProfile& profile) {
  if (const auto* c = std::get_if<ConstantProfile>(&profile)) return c->end_time;
  if (const auto* r = std::get_if<RcrProfile>(&profile)) return r->hold.end_time;
  return std::nullopt;
}

double log_density_of_log(const KernelDensity& kde, double y) {
  // density of T at t = e^y from the density of log T
  return kde.log_density(y) - y;
}

}  // namespace

ModelKind kind_of(const ModelParams& params) {
  return static_cast<ModelKind>(params.index());
}

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::us:
      return "us";
    case ModelKind::canadian:
      return "canadian";
    case ModelKind::gamma:
      return "gamma";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model(std::string_view name) {
  for (ModelKind k : {ModelKind::us, ModelKind::canadian, ModelKind::gamma}) {
    if (name == model_name(k)) return k;
  }
  return std::nullopt;
}

int parameter_count(const ModelParams& params) {
  return std::visit(Overloaded{
                        [](const UsParams&) { return 3; },
                        [](const CanadianHyperParams&) { return 10; },
                        [](const GammaProcessParams& p) {
                          return gp_parameter_count(p.law.breakpoints());
                        },
                    },
                    params);
}

std::vector<GroupSample> simulate_for_gof(const ModelParams& params, const DatasetManifest& manifest,
                                          int n_per_group, std::uint64_t seed,
                                          Execution execution) {
  if (n_per_group < 1) throw ConfigError("simulation size must be positive");
  const std::uint64_t base = derive_seed(seed, streams::gof);
  std::vector<GroupSample> out;
  if (const auto* h = std::get_if<CanadianHyperParams>(&params)) {
    const auto design = resized(manifest, 1.0, n_per_group);
    int rejections = 0;
    const auto times = canadian_simulate_times(*h, design, base, streams::gof, execution, &rejections);
    for (std::size_t g = 0; g < design.groups.size(); ++g) {
      out.push_back({design.groups[g].id, times[g], {}});
    }
  } else {
    for (const auto& group : manifest.groups) {
      GroupSample s{group.id, {}, {}};
      if (const auto* us = std::get_if<UsParams>(&params)) {
        for (const auto& r : us_simulate(*us, group, n_per_group, base, execution)) {
          s.times.push_back(r.time.value_or(kInf));
        }
      } else {
        const auto& gp = std::get<GammaProcessParams>(params);
        s.times = gp_simulate_times(
            gp, group.profile, n_per_group,
            derive_seed(base, streams::gamma_specimen, static_cast<std::uint64_t>(group.id)),
            execution);
      }
      out.push_back(std::move(s));
    }
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    const auto& profile = manifest.groups[g].profile;
    out[g].loads.reserve(out[g].times.size());
    for (double t : out[g].times) {
      out[g].loads.push_back(std::isfinite(t) ? load_at(profile, t) : kNaN);
    }
  }
  return out;
}

QQData qq_data(const std::vector<FailureRecord>& observed, const GroupSample& simulated,
               const GroupConfig& group) {
  QQData qq;
  qq.group = group.id;
  for (const auto& r : observed) {
    if (r.group == group.id && r.time) qq.observed.push_back(load_at(group.profile, *r.time));
  }
  std::sort(qq.observed.begin(), qq.observed.end());
  std::vector<double> sim;
  for (double v : simulated.loads) {
    if (std::isfinite(v)) sim.push_back(v);
  }
  if (qq.observed.empty()) return qq;
  if (sim.empty()) throw DataError("group " + std::to_string(group.id) + ": no simulated failures");
  std::sort(sim.begin(), sim.end());
  const double n = static_cast<double>(qq.observed.size());
  for (std::size_t i = 0; i < qq.observed.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    qq.probs.push_back(p);
    qq.simulated.push_back(quantile_sorted(sim, p));
  }
  return qq;
}

GofLikelihood approx_log_likelihood(const std::vector<FailureRecord>& observed,
                                    const std::vector<GroupSample>& simulated,
                                    const DatasetManifest& manifest, const KdeConfig& kde) {
  if (simulated.size() != manifest.groups.size()) {
    throw DataError("simulated samples do not match the manifest groups");
  }
  GofLikelihood out;
  out.per_group.assign(manifest.groups.size(), 0.0);
  for (std::size_t g = 0; g < manifest.groups.size(); ++g) {
    const auto& group = manifest.groups[g];
    const auto& sim = simulated[g];
    if (sim.group != group.id) throw DataError("simulated samples are not in manifest order");
    const double n = static_cast<double>(sim.times.size());
    if (sim.times.size() < 10'000) out.small_sample = true;
    const auto t1 = hold_end(group.profile);

    std::vector<double> early;   // log T, failures by T1 (all failures for ramps)
    std::vector<double> reload;  // log(T - T1)
    int survivors = 0;
    for (double t : sim.times) {
      if (!t1 || t <= *t1) {
        if (std::isfinite(t)) early.push_back(std::log(t));
      } else {
        ++survivors;
        if (std::isfinite(t)) reload.push_back(std::log(t - *t1));
      }
    }
    const double p_early = early.empty() ? 0.5 / n : static_cast<double>(early.size()) / n;
    const double p_surv = survivors == 0 ? 0.5 / n : static_cast<double>(survivors) / n;

    std::vector<double> obs_early;
    std::vector<double> obs_reload;
    int obs_censored = 0;
    for (const auto& r : observed) {
      if (r.group != group.id) continue;
      if (!r.time) {
        ++obs_censored;
      } else if (!t1 || *r.time <= *t1) {
        obs_early.push_back(std::log(*r.time));
      } else {
        obs_reload.push_back(std::log(*r.time - *t1));
      }
    }

    auto block = [&](const std::vector<double>& sample, const std::vector<double>& obs,
                     const char* what) {
      if (obs.empty()) return 0.0;
      if (sample.size() < 2) {
        throw DataError("group " + std::to_string(group.id) + ": too few simulated " + what +
                        " failures for a density; increase the simulation size");
      }
      const KernelDensity density(sample, kde);
      double s = 0.0;
      for (double y : obs) s += log_density_of_log(density, y);
      return s;
    };

    double ll = block(early, obs_early, "early") + block(reload, obs_reload, "reload");
    if (t1) {
      ll += static_cast<double>(obs_early.size()) * std::log(p_early);
      ll += static_cast<double>(obs_reload.size() + obs_censored) * std::log(p_surv);
    }
    out.per_group[g] = ll;
    out.total += ll;
  }
  return out;
}

ModelComparison compare_models(const std::vector<ModelFitSummary>& models, int n) {
  if (n < 1) throw ConfigError("record count must be positive");
  ModelComparison cmp;
  cmp.n = n;
  for (const auto& m : models) {
    cmp.rows.push_back({m.name, m.log_likelihood, m.parameters,
                        -2.0 * m.log_likelihood + m.parameters * std::log(static_cast<double>(n))});
  }
  for (const auto& a : cmp.rows) {
    std::vector<double> row;
    for (const auto& b : cmp.rows) row.push_back(std::exp(b.bic - a.bic));
    cmp.ratio.push_back(std::move(row));
  }
  return cmp;
}

AbcPointEstimate abc_point_estimate(const AbcResult& chain,
                                    const std::vector<FailureRecord>& observed,
                                    const DatasetManifest& manifest, int n_per_group,
                                    std::uint64_t seed, const KdeConfig& kde) {
  if (chain.samples.empty()) throw ConfigError("ABC chain has no samples");
  AbcPointEstimate best;
  best.log_likelihood = -kInf;
  for (std::size_t i = 0; i < chain.samples.size(); ++i) {
    const auto sim = simulate_for_gof(chain.samples[i].params, manifest, n_per_group,
                                      derive_seed(seed, streams::gof, i));
    const double ll = approx_log_likelihood(observed, sim, manifest, kde).total;
    best.log_likelihoods.push_back(ll);
    if (ll > best.log_likelihood) {
      best.log_likelihood = ll;
      best.index = i;
    }
  }
  return best;
}

}  // namespace dol
