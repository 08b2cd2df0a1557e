// Command-line front end: fit, simulate, gof, compare, reliability, synth, reference.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dol/canadian_model.hpp"
#include "dol/error.hpp"
#include "dol/gamma_process.hpp"
#include "dol/gof.hpp"
#include "dol/params_io.hpp"
#include "dol/records.hpp"
#include "dol/reliability.hpp"
#include "dol/us_model.hpp"

namespace fs = std::filesystem;
using namespace dol;
using Json = nlohmann::ordered_json;

namespace {

int exit_code(ErrorCategory c) { return 10 + static_cast<int>(c); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

ModelKind require_model(const std::string& name) {
  const auto k = parse_model(name);
  if (!k) throw ConfigError("unknown model \"" + name + "\" (expected us, canadian or gamma)");
  return *k;
}

ParamsFile load_params(const std::string& path, ModelKind expected) {
  ParamsFile f = read_params_file(path);
  if (kind_of(f.params) != expected) {
    throw ConfigError(path + " holds " + std::string(model_name(kind_of(f.params))) +
                      " parameters, not " + std::string(model_name(expected)));
  }
  return f;
}

std::vector<FailureRecord> simulate_records(const ModelParams& params, const DatasetManifest& manifest,
                                            std::uint64_t seed) {
  std::vector<FailureRecord> out;
  if (const auto* h = std::get_if<CanadianHyperParams>(&params)) {
    return canadian_simulate_dataset(*h, manifest, seed).records;
  }
  for (const auto& g : manifest.groups) {
    const std::string prefix = "G" + std::to_string(g.id) + "-";
    auto recs = std::holds_alternative<UsParams>(params)
                    ? us_simulate(std::get<UsParams>(params), g, g.size, seed, Execution::parallel, prefix)
                    : gp_simulate(std::get<GammaProcessParams>(params), g, g.size, seed,
                                  Execution::parallel, prefix);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

struct FitOptions {
  std::string model, data, manifest, out;
  std::uint64_t seed = 1;
  double delta = -1.0;
  int burnin = -1, thin = -1, iters = -1, max_breakpoints = 3;
  int point_n = 10'000;
};

void fit_us(const FitOptions& o, const std::vector<FailureRecord>& recs, const DatasetManifest& m) {
  const double tau_m = reference_median_strength(recs, m);
  const UsFitResult fit = us_nls_fit(recs, m, tau_m);
  write_params_file(join(o.out, "params.json"),
                    {fit.estimate, UsStandardErrors{fit.se_A, fit.se_B, fit.se_w}});
  Json rep;
  rep["model"] = "us";
  rep["tau_m"] = tau_m;
  rep["iterations"] = fit.iterations;
  rep["records_used"] = fit.records_used;
  rep["excluded"] = fit.excluded_ids;
  rep["unusable"] = fit.unusable_ids;
  if (!fit.excluded_ids.empty()) {
    std::cerr << "note: " << fit.excluded_ids.size()
              << " records excluded (reload solution needs the log of a nonpositive argument)\n";
  }
  Json trace = Json::array();
  for (const auto& t : fit.trace) {
    trace.push_back({{"iteration", t.iteration}, {"A", t.A}, {"B", t.B}, {"w", t.w},
                     {"objective", t.objective}, {"excluded", t.excluded}});
  }
  rep["trace"] = trace;
  write_text_file(join(o.out, "report.json"), rep.dump(2) + "\n");
}

void fit_canadian(const FitOptions& o, const std::vector<FailureRecord>& recs,
                  const DatasetManifest& m) {
  AbcConfig cfg;
  if (o.delta > 0) cfg.tolerance = o.delta;
  if (o.burnin >= 0) cfg.burn_in = o.burnin;
  if (o.thin > 0) cfg.thinning = o.thin;
  if (o.iters > 0) cfg.samples = std::max(1, (o.iters - cfg.burn_in) / cfg.thinning);
  const SummaryStats observed = compute_summary_stats(recs, m);
  const SummaryScales scales = bootstrap_scales(recs, m, cfg.bootstrap_replicates, o.seed);
  const AbcResult chain = abc_mcmc_fit(observed, scales, m, cfg, canadian_default_prior(),
                                       canadian_reference_hyperparams(), o.seed);
  write_text_file(join(o.out, "chain.txt"), abc_chain_to_text(chain));
  const AbcPointEstimate best = abc_point_estimate(chain, recs, m, o.point_n, o.seed);
  write_params_file(join(o.out, "params.json"), {chain.samples[best.index].params, std::nullopt});
  Json rep;
  rep["model"] = "canadian";
  rep["acceptance_rate"] = chain.acceptance_rate;
  rep["iterations"] = chain.iterations;
  rep["samples"] = chain.samples.size();
  rep["point_estimate_index"] = best.index;
  rep["point_estimate_approx_log_likelihood"] = best.log_likelihood;
  rep["rejected_specimens"] = chain.rejected_specimens;
  write_text_file(join(o.out, "report.json"), rep.dump(2) + "\n");
}

void fit_gamma(const FitOptions& o, const std::vector<FailureRecord>& recs, const DatasetManifest& m) {
  GpMcmcConfig cfg;
  if (o.iters > 0) cfg.iterations = o.iters;
  if (o.burnin >= 0) cfg.burn_in = o.burnin;
  if (o.thin > 0) cfg.thinning = o.thin;
  const GpLikelihoodCache cache(recs, m, o.delta > 0 ? o.delta : kDefaultLoadIncrement);
  const GpFitResult fit = gp_bic_select(cache, o.max_breakpoints, cfg, GpPrior{}, o.seed);
  const GpChain& chain = fit.selected_chain();
  write_text_file(join(o.out, "chain.txt"), gamma_chain_to_text(chain));
  write_params_file(join(o.out, "params.json"), {chain.best.params, std::nullopt});
  std::string bic = "breakpoints,max_log_likelihood,parameters,bic\n";
  for (const auto& b : fit.bic) {
    bic += std::to_string(b.breakpoints) + "," + format_double(b.max_log_likelihood) + "," +
           std::to_string(b.parameters) + "," + format_double(b.bic) + "\n";
  }
  write_text_file(join(o.out, "bic.csv"), bic);
  Json rep;
  rep["model"] = "gamma";
  rep["selected_breakpoints"] = fit.selected;
  rep["max_log_likelihood"] = chain.best.log_likelihood;
  rep["acceptance_rate"] = chain.acceptance_rate;
  rep["records"] = cache.size();
  write_text_file(join(o.out, "report.json"), rep.dump(2) + "\n");
  std::cout << "selected breakpoints: " << fit.selected << "\n";
}

void run_fit(const FitOptions& o) {
  const ModelKind kind = require_model(o.model);
  const DatasetManifest m = read_manifest_file(o.manifest);
  const auto recs = ingest_csv_file(o.data, m).records;
  ensure_dir(o.out);
  switch (kind) {
    case ModelKind::us:
      fit_us(o, recs, m);
      break;
    case ModelKind::canadian:
      fit_canadian(o, recs, m);
      break;
    case ModelKind::gamma:
      fit_gamma(o, recs, m);
      break;
  }
}

// ---------------------------------------------------------------------------

struct GofOptions {
  std::string model, params, data, manifest, out;
  int n = 100'000;
  std::uint64_t seed = 1;
};

void run_gof(const GofOptions& o) {
  const ModelKind kind = require_model(o.model);
  const ParamsFile pf = load_params(o.params, kind);
  const DatasetManifest m = read_manifest_file(o.manifest);
  const auto recs = ingest_csv_file(o.data, m).records;
  ensure_dir(o.out);
  const auto sim = simulate_for_gof(pf.params, m, o.n, o.seed);
  for (std::size_t g = 0; g < m.groups.size(); ++g) {
    const QQData qq = qq_data(recs, sim[g], m.groups[g]);
    std::string text = "p,observed_MPa,simulated_MPa\n";
    for (std::size_t i = 0; i < qq.probs.size(); ++i) {
      text += format_double(qq.probs[i]) + "," + format_double(qq.observed[i]) + "," +
              format_double(qq.simulated[i]) + "\n";
    }
    write_text_file(join(o.out, "qq_group" + std::to_string(m.groups[g].id) + ".csv"), text);
  }
  const GofLikelihood ll = approx_log_likelihood(recs, sim, m);
  if (ll.small_sample) std::cerr << "warning: fewer than 10000 simulated times per group\n";
  Json j;
  j["model"] = std::string(model_name(kind));
  j["log_likelihood"] = ll.total;
  j["parameters"] = parameter_count(pf.params);
  j["n"] = static_cast<int>(recs.size());
  j["simulated_per_group"] = o.n;
  j["small_sample"] = ll.small_sample;
  j["per_group"] = ll.per_group;
  write_text_file(join(o.out, "gof.json"), j.dump(2) + "\n");
  std::cout << "approximate log-likelihood: " << format_double(ll.total) << "\n";
}

void run_compare(const std::vector<std::string>& dirs, const std::string& out) {
  std::vector<ModelFitSummary> models;
  int n = -1;
  for (const auto& d : dirs) {
    const Json j = Json::parse(read_text_file(join(d, "gof.json")), nullptr, false);
    if (j.is_discarded() || !j.contains("log_likelihood") || !j.contains("parameters") ||
        !j.contains("n") || !j.contains("model")) {
      throw DataError(join(d, "gof.json") + ": not a gof result");
    }
    const int nd = j.at("n").get<int>();
    if (n >= 0 && nd != n) throw DataError("results were computed on different record counts");
    n = nd;
    models.push_back({j.at("model").get<std::string>(), j.at("log_likelihood").get<double>(),
                      j.at("parameters").get<int>()});
  }
  const ModelComparison cmp = compare_models(models, n);
  std::string text = "model,log_likelihood,parameters,bic";
  for (const auto& r : cmp.rows) text += ",ratio_vs_" + r.name;
  text += "\n";
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    const auto& r = cmp.rows[i];
    text += r.name + "," + format_double(r.log_likelihood) + "," + std::to_string(r.parameters) +
            "," + format_double(r.bic);
    for (double v : cmp.ratio[i]) text += "," + format_double(v);
    text += "\n";
  }
  write_text_file(out, text);
}

// ---------------------------------------------------------------------------

struct ReliabilityOptions {
  std::string model, params, samples, out, load_config, estimator = "conditional";
  double phi_min = 0.5, phi_max = 1.5, phi_step = 0.05;
  int nr = 100'000, band_nr = 10'000, band_samples = 200;
  std::uint64_t seed = 1;
};

void run_reliability(const ReliabilityOptions& o) {
  const ModelKind kind = require_model(o.model);
  const ParamsFile pf = load_params(o.params, kind);
  ReliabilityConfig cfg;
  cfg.trials = o.nr;
  if (!o.load_config.empty()) cfg.load = load_model_from_json(read_text_file(o.load_config));
  if (o.estimator == "indicator") {
    cfg.estimator = PfEstimator::indicator;
  } else if (o.estimator != "conditional") {
    throw ConfigError("estimator must be conditional or indicator");
  }
  std::vector<ModelParams> samples;
  if (!o.samples.empty()) {
    samples = read_param_samples(o.samples);
    if (samples.empty()) throw ConfigError(o.samples + ": parameter-sample file is empty");
    for (const auto& s : samples) {
      if (kind_of(s) != kind) throw ConfigError(o.samples + ": samples belong to another model");
    }
    if (static_cast<int>(samples.size()) > o.band_samples) {
      // evenly spaced subset keeps the band cost bounded
      std::vector<ModelParams> sub;
      for (int i = 0; i < o.band_samples; ++i) {
        sub.push_back(samples[static_cast<std::size_t>(i) * samples.size() /
                              static_cast<std::size_t>(o.band_samples)]);
      }
      samples = std::move(sub);
    }
  } else if (kind == ModelKind::us && pf.us_se) {
    samples = us_parameter_draws(std::get<UsParams>(pf.params), pf.us_se->A, pf.us_se->B,
                                 pf.us_se->w, o.band_samples, o.seed);
  }
  const auto phis = phi_grid(o.phi_min, o.phi_max, o.phi_step);
  const ReliabilityCurve c = phi_beta_curve(pf.params, samples, phis, cfg, o.band_nr, o.seed);
  std::string text = "phi,beta,beta_lo,beta_hi\n";
  for (std::size_t k = 0; k < c.phi.size(); ++k) {
    text += format_double(c.phi[k]) + "," + format_double(c.beta[k]) + "," +
            format_double(c.beta_lo[k]) + "," + format_double(c.beta_hi[k]) + "\n";
  }
  write_text_file(o.out, text);
}

void run_reference(const std::string& what, const std::string& out) {
  if (what == "manifest") {
    write_text_file(out, manifest_to_json(reference_design()));
    return;
  }
  switch (require_model(what)) {
    case ModelKind::us: write_params_file(out, {UsParams{}, std::nullopt}); break;
    case ModelKind::canadian:
      write_params_file(out, {canadian_reference_hyperparams(), std::nullopt});
      break;
    case ModelKind::gamma: write_params_file(out, {gamma_reference_params(), std::nullopt}); break;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Duration-of-load damage models for lumber: fitting, simulation, model comparison "
               "and reliability"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model to a dataset");
  fit_cmd->add_option("model", fit.model, "us, canadian or gamma")->required();
  fit_cmd->add_option("--data", fit.data, "dataset CSV")->required();
  fit_cmd->add_option("--manifest", fit.manifest, "manifest JSON")->required();
  fit_cmd->add_option("--out", fit.out, "output directory")->required();
  fit_cmd->add_option("--seed", fit.seed);
  fit_cmd->add_option("--delta", fit.delta, "ABC tolerance (canadian) or load increment in MPa (gamma)");
  fit_cmd->add_option("--burnin", fit.burnin);
  fit_cmd->add_option("--thin", fit.thin);
  fit_cmd->add_option("--iters", fit.iters, "total chain iterations");
  fit_cmd->add_option("--max-breakpoints", fit.max_breakpoints);
  fit_cmd->add_option("--point-n", fit.point_n,
                      "simulations per group when ranking ABC samples (canadian)");

  std::string model, params, manifest, out;
  std::uint64_t seed = 1;
  int n = 100;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate n specimens per group");
  sim_cmd->add_option("--model", model)->required();
  sim_cmd->add_option("--params", params)->required();
  sim_cmd->add_option("--manifest", manifest)->required();
  sim_cmd->add_option("--n", n)->required();
  sim_cmd->add_option("--out", out)->required();
  sim_cmd->add_option("--seed", seed);

  auto* synth_cmd = app.add_subcommand("synth", "Simulate a dataset at the manifest's group sizes");
  synth_cmd->add_option("--model", model)->required();
  synth_cmd->add_option("--params", params)->required();
  synth_cmd->add_option("--manifest", manifest)->required();
  synth_cmd->add_option("--out", out)->required();
  synth_cmd->add_option("--seed", seed);

  GofOptions gof;
  auto* gof_cmd = app.add_subcommand("gof", "QQ data and approximate log-likelihood");
  gof_cmd->add_option("--model", gof.model)->required();
  gof_cmd->add_option("--params", gof.params)->required();
  gof_cmd->add_option("--data", gof.data)->required();
  gof_cmd->add_option("--manifest", gof.manifest)->required();
  gof_cmd->add_option("--out", gof.out)->required();
  gof_cmd->add_option("--n", gof.n, "simulated times per group");
  gof_cmd->add_option("--seed", gof.seed);

  std::vector<std::string> results;
  auto* cmp_cmd = app.add_subcommand("compare", "BIC and likelihood-ratio table from gof results");
  cmp_cmd->add_option("--results", results, "gof output directories")->required();
  cmp_cmd->add_option("--out", out)->required();

  ReliabilityOptions rel;
  auto* rel_cmd = app.add_subcommand("reliability", "phi-beta curve under residential loads");
  rel_cmd->add_option("--model", rel.model)->required();
  rel_cmd->add_option("--params", rel.params)->required();
  rel_cmd->add_option("--param-samples", rel.samples, "chain file for the uncertainty band");
  rel_cmd->add_option("--phi-min", rel.phi_min);
  rel_cmd->add_option("--phi-max", rel.phi_max);
  rel_cmd->add_option("--phi-step", rel.phi_step);
  rel_cmd->add_option("--nr", rel.nr, "simulated load profiles per phi");
  rel_cmd->add_option("--band-nr", rel.band_nr, "profiles per parameter sample for the band");
  rel_cmd->add_option("--band-samples", rel.band_samples, "parameter samples used for the band");
  rel_cmd->add_option("--load-config", rel.load_config, "load model JSON");
  rel_cmd->add_option("--estimator", rel.estimator, "conditional or indicator");
  rel_cmd->add_option("--out", rel.out)->required();
  rel_cmd->add_option("--seed", rel.seed);

  std::string what;
  auto* ref_cmd = app.add_subcommand("reference", "Write the built-in design or parameter set");
  ref_cmd->add_option("what", what, "manifest, us, canadian or gamma")->required();
  ref_cmd->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) {
      run_fit(fit);
    } else if (*sim_cmd || *synth_cmd) {
      const ModelKind kind = require_model(model);
      const ParamsFile pf = load_params(params, kind);
      DatasetManifest m = read_manifest_file(manifest);
      if (*sim_cmd) m = resized(m, 1.0, n);
      write_text_file(out, to_csv(simulate_records(pf.params, m, seed)));
    } else if (*gof_cmd) {
      run_gof(gof);
    } else if (*cmp_cmd) {
      run_compare(results, out);
    } else if (*rel_cmd) {
      run_reliability(rel);
    } else if (*ref_cmd) {
      run_reference(what, out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.category()) << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
