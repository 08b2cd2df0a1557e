#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dol/canadian_model.hpp"
#include "dol/gamma_process.hpp"
#include "dol/gof.hpp"
#include "dol/records.hpp"
#include "dol/reliability.hpp"
#include "dol/us_model.hpp"

namespace dol {

// Structured text is JSON throughout. Durations may be given either as
// numbers of hours or as unit-tagged strings such as "3 months".

struct UsStandardErrors {
  double A = 0.0, B = 0.0, w = 0.0;
};

/// A parameter file: {"model": "us" | "canadian" | "gamma", ...fields}.
/// US files may carry "se": {"A", "B", "w"} from a fit.
struct ParamsFile {
  ModelParams params;
  std::optional<UsStandardErrors> us_se;
};

std::string params_to_json(const ParamsFile& file);
ParamsFile params_from_json(const std::string& text);
ParamsFile read_params_file(const std::string& path);
void write_params_file(const std::string& path, const ParamsFile& file);

/// {"provenance": ..., "groups": [{"id", "label", "size", "profile": {...}}]}.
/// Profile objects: {"type": "ramp", "k"}, {"type": "constant", "k", "tau_c",
/// "T1"}, {"type": "rcr", "k", "tau_c", "T1", "reload_k"} or
/// {"type": "piecewise", "breakpoints", "values", "horizon"}. T1 accepts the
/// key "T1_hours" as well.
std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);
DatasetManifest read_manifest_file(const std::string& path);

LoadModelConfig load_model_from_json(const std::string& text);

/// Chain files: a "#" header naming the columns, then one whitespace-separated
/// line per retained sample.
std::string gamma_chain_to_text(const GpChain& chain);
std::vector<GpSample> gamma_chain_from_text(const std::string& text,
                                            double delta_tau = kDefaultLoadIncrement);
std::string abc_chain_to_text(const AbcResult& chain);
std::vector<AbcSample> abc_chain_from_text(const std::string& text);

/// Parameter samples of either chain format, detected from the header.
std::vector<ModelParams> read_param_samples(const std::string& path);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace dol
