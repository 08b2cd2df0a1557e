#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dol/canadian_model.hpp"
#include "dol/gamma_process.hpp"
#include "dol/kde.hpp"
#include "dol/parallel.hpp"
#include "dol/records.hpp"
#include "dol/us_model.hpp"

namespace dol {

enum class ModelKind { us, canadian, gamma };

using ModelParams = std::variant<UsParams, CanadianHyperParams, GammaProcessParams>;

ModelKind kind_of(const ModelParams& params);
std::string_view model_name(ModelKind kind);
/// Accepts "us", "canadian" and "gamma".
std::optional<ModelKind> parse_model(std::string_view name);

/// 3, 10 and 4 + 2B.
int parameter_count(const ModelParams& params);

/// Simulated failure times of one group (+inf when censored) and the load
/// sustained at each failure (NaN when censored).
struct GroupSample {
  int group = 0;
  std::vector<double> times;
  std::vector<double> loads;
};

/// n failure times per manifest group from the model's own simulator.
std::vector<GroupSample> simulate_for_gof(const ModelParams& params, const DatasetManifest& manifest,
                                          int n_per_group, std::uint64_t seed,
                                          Execution execution = Execution::parallel);

struct QQData {
  int group = 0;
  std::vector<double> probs;      ///< (i - 0.5)/n
  std::vector<double> observed;   ///< sorted observed load at failure, MPa
  std::vector<double> simulated;  ///< simulated quantiles at probs, MPa
};

/// Pairs observed and simulated load-at-failure quantiles for the failed
/// records of `group`.
QQData qq_data(const std::vector<FailureRecord>& observed, const GroupSample& simulated,
               const GroupConfig& group);

struct GofLikelihood {
  double total = 0.0;
  std::vector<double> per_group;
  bool small_sample = false;  ///< fewer than 10 000 simulated times in some group
};

/// KDE-approximated log-likelihood of the observed records.
///
/// Ramp groups: density of log T from the simulated sample, with the 1/T
/// Jacobian. Hold groups: each observed record first contributes the log of
/// the simulated probability of its phase (failure by T1, or survival), then
/// failures by T1 add the conditional density of log T and reload failures
/// the conditional density of log(T - T1). A phase probability with no
/// simulated support is replaced by 0.5/n; a density block that an observed
/// record needs but that has fewer than 2 simulated times throws DataError.
GofLikelihood approx_log_likelihood(const std::vector<FailureRecord>& observed,
                                    const std::vector<GroupSample>& simulated,
                                    const DatasetManifest& manifest, const KdeConfig& kde = {});

struct ModelFitSummary {
  std::string name;
  double log_likelihood = 0.0;
  int parameters = 0;
};

struct ModelComparison {
  struct Row {
    std::string name;
    double log_likelihood = 0.0;
    int parameters = 0;
    double bic = 0.0;
  };
  std::vector<Row> rows;
  int n = 0;
  /// ratio[i][j] = exp(BIC_j - BIC_i): support for model i over model j after
  /// the parameter-count penalty.
  std::vector<std::vector<double>> ratio;
};

/// BIC = -2 LL + p log N for each model.
ModelComparison compare_models(const std::vector<ModelFitSummary>& models, int n);

/// Index of the ABC sample with the highest approximate log-likelihood
/// (each sample simulated with n per group under its own derived seed).
struct AbcPointEstimate {
  std::size_t index = 0;
  double log_likelihood = 0.0;
  std::vector<double> log_likelihoods;
};

AbcPointEstimate abc_point_estimate(const AbcResult& chain,
                                    const std::vector<FailureRecord>& observed,
                                    const DatasetManifest& manifest, int n_per_group,
                                    std::uint64_t seed, const KdeConfig& kde = {});

}  // namespace dol
