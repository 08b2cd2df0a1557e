#include "dol/params_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "dol/error.hpp"
#include "dol/units.hpp"

namespace dol {

using Json = nlohmann::ordered_json;

namespace {

Json parse_json(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

double number(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key \"") + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("key \"") + key + "\" must be a number");
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

double hours(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key \"") + key + "\"");
  const Json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_duration_hours(v.get<std::string>());
  throw ConfigError(std::string("key \"") + key + "\" must be hours or a duration string");
}

std::vector<double> numbers(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ConfigError(std::string("key \"") + key + "\" must be an array");
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string("key \"") + key + "\" must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Json profile_to_json(const LoadProfile& profile) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RampProfile>) {
          return {{"type", "ramp"}, {"k", p.rate}};
        } else if constexpr (std::is_same_v<T, ConstantProfile>) {
          return {{"type", "constant"}, {"k", p.rate}, {"tau_c", p.level}, {"T1_hours", p.end_time}};
        } else if constexpr (std::is_same_v<T, RcrProfile>) {
          return {{"type", "rcr"},
                  {"k", p.hold.rate},
                  {"tau_c", p.hold.level},
                  {"T1_hours", p.hold.end_time},
                  {"reload_k", p.reload_rate}};
        } else {
          return {{"type", "piecewise"},
                  {"breakpoints", std::vector<double>(p.starts().begin(), p.starts().end())},
                  {"values", std::vector<double>(p.values().begin(), p.values().end())},
                  {"horizon", p.horizon()}};
        }
      },
      profile);
}

LoadProfile profile_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("profile needs a string \"type\"");
  }
  const std::string type = j.at("type").get<std::string>();
  LoadProfile out;
  try {
    if (type == "ramp") {
      out = make_ramp(number(j, "k"));
    } else if (type == "constant" || type == "rcr") {
      const double t1 = j.contains("T1_hours") ? hours(j, "T1_hours") : hours(j, "T1");
      const ConstantProfile hold = make_constant(number(j, "k"), number(j, "tau_c"), t1);
      if (type == "constant") {
        out = hold;
      } else {
        out = make_rcr(hold, number_or(j, "reload_k", hold.rate));
      }
    } else if (type == "piecewise") {
      out = PiecewiseProfile(numbers(j, "breakpoints"), numbers(j, "values"), hours(j, "horizon"));
    } else {
      throw ConfigError("unknown profile type \"" + type + "\"");
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid profile: ") + e.what());
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    if (tok == "inf") return INFINITY;
    if (tok == "-inf") return -INFINITY;
    throw DataError("chain line " + std::to_string(line) + ": bad number \"" + tok + "\"");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string params_to_json(const ParamsFile& file) {
  Json j;
  j["model"] = std::string(model_name(kind_of(file.params)));
  if (const auto* us = std::get_if<UsParams>(&file.params)) {
    j["A"] = us->A;
    j["B"] = us->B;
    j["w"] = us->w;
    j["tau_m"] = us->tau_m;
    if (file.us_se) j["se"] = {{"A", file.us_se->A}, {"B", file.us_se->B}, {"w", file.us_se->w}};
  } else if (const auto* h = std::get_if<CanadianHyperParams>(&file.params)) {
    const auto v = h->to_array();
    for (std::size_t i = 0; i < v.size(); ++i) j[CanadianHyperParams::names()[i]] = v[i];
  } else {
    const auto& p = std::get<GammaProcessParams>(file.params);
    j["u"] = p.u;
    j["tau_star"] = p.tau_star;
    j["xi"] = p.xi;
    j["delta_tau"] = p.delta_tau;
    j["breakpoints"] = p.law.times;
    j["powers"] = p.law.powers;
  }
  return j.dump(2) + "\n";
}

ParamsFile params_from_json(const std::string& text) {
  const Json j = parse_json(text, "parameter file");
  if (!j.is_object() || !j.contains("model") || !j.at("model").is_string()) {
    throw ConfigError("parameter file needs a string \"model\"");
  }
  const auto kind = parse_model(j.at("model").get<std::string>());
  if (!kind) throw ConfigError("unknown model \"" + j.at("model").get<std::string>() + "\"");
  ParamsFile out;
  switch (*kind) {
    case ModelKind::us: {
      UsParams p;
      p.A = number(j, "A");
      p.B = number(j, "B");
      p.w = number(j, "w");
      p.tau_m = number_or(j, "tau_m", p.tau_m);
      out.params = p;
      if (j.contains("se")) {
        const Json& se = j.at("se");
        out.us_se = UsStandardErrors{number(se, "A"), number(se, "B"), number(se, "w")};
      }
      break;
    }
    case ModelKind::canadian: {
      std::array<double, 10> v{};
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = number(j, CanadianHyperParams::names()[i]);
      out.params = CanadianHyperParams::from_array(v);
      break;
    }
    case ModelKind::gamma: {
      GammaProcessParams p;
      p.u = number(j, "u");
      p.tau_star = number(j, "tau_star");
      p.xi = number(j, "xi");
      p.delta_tau = number_or(j, "delta_tau", kDefaultLoadIncrement);
      p.law.times = j.contains("breakpoints") ? numbers(j, "breakpoints") : std::vector<double>{};
      p.law.powers = numbers(j, "powers");
      out.params = p;
      break;
    }
  }
  try {
    std::visit([](const auto& p) { validate(p); }, out.params);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid parameters: ") + e.what());
  }
  return out;
}

ParamsFile read_params_file(const std::string& path) { return params_from_json(read_text_file(path)); }

void write_params_file(const std::string& path, const ParamsFile& file) {
  write_text_file(path, params_to_json(file));
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  Json j;
  j["provenance"] = manifest.provenance;
  j["groups"] = Json::array();
  for (const auto& g : manifest.groups) {
    j["groups"].push_back(
        {{"id", g.id}, {"label", g.label}, {"size", g.size}, {"profile", profile_to_json(g.profile)}});
  }
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  const Json j = parse_json(text, "manifest");
  if (!j.is_object() || !j.contains("groups") || !j.at("groups").is_array()) {
    throw ConfigError("manifest needs a \"groups\" array");
  }
  DatasetManifest m;
  if (j.contains("provenance") && j.at("provenance").is_string()) {
    m.provenance = j.at("provenance").get<std::string>();
  }
  for (const auto& g : j.at("groups")) {
    GroupConfig gc;
    if (!g.contains("id") || !g.at("id").is_number_integer()) throw ConfigError("group needs an integer \"id\"");
    if (!g.contains("size") || !g.at("size").is_number_integer()) {
      throw ConfigError("group needs an integer \"size\"");
    }
    gc.id = g.at("id").get<int>();
    gc.size = g.at("size").get<int>();
    if (g.contains("label") && g.at("label").is_string()) gc.label = g.at("label").get<std::string>();
    if (!g.contains("profile")) throw ConfigError("group " + std::to_string(gc.id) + " has no profile");
    gc.profile = profile_from_json(g.at("profile"));
    m.groups.push_back(std::move(gc));
  }
  validate(m);
  return m;
}

DatasetManifest read_manifest_file(const std::string& path) {
  return manifest_from_json(read_text_file(path));
}

LoadModelConfig load_model_from_json(const std::string& text) {
  const Json j = parse_json(text, "load model");
  LoadModelConfig c;
  c.r0 = number_or(j, "R_o", c.r0);
  c.gamma = number_or(j, "gamma", c.gamma);
  c.alpha_d = number_or(j, "alpha_d", c.alpha_d);
  c.alpha_l = number_or(j, "alpha_l", c.alpha_l);
  c.horizon_years = number_or(j, "horizon_years", c.horizon_years);
  c.dead_mean = number_or(j, "dead_mean", c.dead_mean);
  c.dead_sd = number_or(j, "dead_sd", c.dead_sd);
  c.sustained_mean_years = number_or(j, "sustained_mean_years", c.sustained_mean_years);
  c.sustained_shape = number_or(j, "sustained_shape", c.sustained_shape);
  c.sustained_scale = number_or(j, "sustained_scale", c.sustained_scale);
  c.extra_mean_weeks = number_or(j, "extra_mean_weeks", c.extra_mean_weeks);
  c.extra_shape = number_or(j, "extra_shape", c.extra_shape);
  c.extra_scale = number_or(j, "extra_scale", c.extra_scale);
  c.extra_interarrival_years = number_or(j, "extra_interarrival_years", c.extra_interarrival_years);
  validate(c);
  return c;
}

std::string gamma_chain_to_text(const GpChain& chain) {
  const int b = chain.breakpoints;
  std::string out = "# gamma breakpoints=" + std::to_string(b) + "\n# log_likelihood u tau_star xi delta_tau";
  for (int i = 1; i <= b; ++i) out += " t_" + std::to_string(i);
  for (int i = 1; i <= b + 1; ++i) out += " a_" + std::to_string(i);
  out += "\n";
  for (const auto& s : chain.samples) {
    const auto& p = s.params;
    out += format_double(s.log_likelihood) + " " + format_double(p.u) + " " +
           format_double(p.tau_star) + " " + format_double(p.xi) + " " + format_double(p.delta_tau);
    for (double t : p.law.times) out += " " + format_double(t);
    for (double a : p.law.powers) out += " " + format_double(a);
    out += "\n";
  }
  return out;
}

std::vector<GpSample> gamma_chain_from_text(const std::string& text, double delta_tau) {
  std::istringstream in(text);
  int b = -1;
  int line_no = 0;
  std::vector<GpSample> out;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("breakpoints=");
      if (pos != std::string::npos) b = std::stoi(line.substr(pos + 12));
      continue;
    }
    if (b < 0) throw DataError("gamma chain file has no breakpoint header");
    const auto tok = split_ws(line);
    if (tok.size() != static_cast<std::size_t>(6 + 2 * b)) {
      throw DataError("chain line " + std::to_string(line_no) + ": expected " +
                      std::to_string(6 + 2 * b) + " columns");
    }
    GpSample s;
    s.log_likelihood = parse_double(tok[0], line_no);
    s.params.u = parse_double(tok[1], line_no);
    s.params.tau_star = parse_double(tok[2], line_no);
    s.params.xi = parse_double(tok[3], line_no);
    s.params.delta_tau = parse_double(tok[4], line_no);
    if (!(s.params.delta_tau > 0.0)) s.params.delta_tau = delta_tau;
    for (int i = 0; i < b; ++i) s.params.law.times.push_back(parse_double(tok[5 + i], line_no));
    for (int i = 0; i <= b; ++i) s.params.law.powers.push_back(parse_double(tok[5 + b + i], line_no));
    validate(s.params);
    out.push_back(std::move(s));
  }
  return out;
}

std::string abc_chain_to_text(const AbcResult& chain) {
  std::string out = "# canadian\n#";
  for (const char* n : CanadianHyperParams::names()) out += std::string(" ") + n;
  out += " distance\n";
  for (const auto& s : chain.samples) {
    std::string line;
    for (double v : s.params.to_array()) line += format_double(v) + " ";
    out += line + format_double(s.distance) + "\n";
  }
  return out;
}

std::vector<AbcSample> abc_chain_from_text(const std::string& text) {
  std::istringstream in(text);
  int line_no = 0;
  std::vector<AbcSample> out;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tok = split_ws(line);
    if (tok.size() != 11) throw DataError("chain line " + std::to_string(line_no) + ": expected 11 columns");
    std::array<double, 10> v{};
    for (std::size_t i = 0; i < 10; ++i) v[i] = parse_double(tok[i], line_no);
    AbcSample s{CanadianHyperParams::from_array(v), parse_double(tok[10], line_no)};
    validate(s.params);
    out.push_back(s);
  }
  return out;
}

std::vector<ModelParams> read_param_samples(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<ModelParams> out;
  if (text.rfind("# gamma", 0) == 0) {
    for (auto& s : gamma_chain_from_text(text)) out.emplace_back(std::move(s.params));
  } else if (text.rfind("# canadian", 0) == 0) {
    for (auto& s : abc_chain_from_text(text)) out.emplace_back(s.params);
  } else {
    throw DataError(path + ": unrecognised chain file header");
  }
  return out;
}

}  // namespace dol
