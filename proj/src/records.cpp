#include "dol/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dol/error.hpp"
#include "dol/units.hpp"

namespace dol {

namespace {

// Phase boundaries of a hold test, tolerant to round-off in stored times.
bool at_or_before(double t, double boundary) { return t <= boundary * (1.0 + 1e-12); }

const ConstantProfile* hold_of(const LoadProfile& profile) {
  if (const auto* c = std::get_if<ConstantProfile>(&profile)) return c;
  if (const auto* r = std::get_if<RcrProfile>(&profile)) return &r->hold;
  return nullptr;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::failed_ramp: return "failed_ramp";
    case Outcome::failed_constant: return "failed_constant";
    case Outcome::failed_rcr: return "failed_rcr";
    case Outcome::censored: return "censored";
  }
  return "?";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (Outcome o : {Outcome::failed_ramp, Outcome::failed_constant, Outcome::failed_rcr,
                    Outcome::censored}) {
    if (text == to_string(o)) return o;
  }
  return std::nullopt;
}

const GroupConfig& DatasetManifest::group(int id) const {
  for (const auto& g : groups) {
    if (g.id == id) return g;
  }
  throw DataError("unknown group " + std::to_string(id));
}

int DatasetManifest::total_size() const {
  int n = 0;
  for (const auto& g : groups) n += g.size;
  return n;
}

void validate(const DatasetManifest& manifest) {
  if (manifest.groups.empty()) throw ConfigError("manifest has no groups");
  std::set<int> ids;
  for (const auto& g : manifest.groups) {
    if (!ids.insert(g.id).second) throw ConfigError("duplicate group id " + std::to_string(g.id));
    if (g.size <= 0) throw ConfigError("group " + std::to_string(g.id) + " has nonpositive size");
    if (std::holds_alternative<PiecewiseProfile>(g.profile)) {
      throw ConfigError("group " + std::to_string(g.id) + ": step profiles are not test designs");
    }
    try {
      validate(g.profile);
    } catch (const Error& e) {
      throw ConfigError("group " + std::to_string(g.id) + ": " + e.what());
    }
  }
}

DatasetManifest reference_design() {
  DatasetManifest m;
  const double k = kReferenceRate;
  const struct {
    int id;
    double rel;
    int size;
  } ramps[] = {{1, 1.667e-3, 140}, {2, 0.0333, 139}, {3, 1.0, 139}, {4, 30.0, 139}, {5, 1500.0, 140}};
  for (const auto& r : ramps) {
    m.groups.push_back({r.id, make_ramp(r.rel * k), r.size, "ramp"});
  }
  const struct {
    int id;
    double level;
    double t1;
    int size;
  } holds[] = {{6, 20.68, 3 * kHoursPerMonth, 300},
               {7, 20.68, 4 * kHoursPerYear, 198},
               {8, 31.02, 3 * kHoursPerMonth, 98},
               {9, 31.02, kHoursPerYear, 300},
               {10, 31.02, 4 * kHoursPerYear, 101}};
  for (const auto& h : holds) {
    m.groups.push_back({h.id, make_rcr(make_constant(k, h.level, h.t1), k), h.size, "rcr"});
  }
  m.provenance = "reference design";
  return m;
}

DatasetManifest resized(const DatasetManifest& manifest, double fraction, int per_group) {
  DatasetManifest m = manifest;
  for (auto& g : m.groups) {
    if (per_group > 0) {
      g.size = per_group;
    } else {
      g.size = std::max(1, static_cast<int>(std::lround(g.size * fraction)));
    }
  }
  return m;
}

Outcome classify(const LoadProfile& profile, std::optional<double> time) {
  if (!time) {
    if (std::holds_alternative<RampProfile>(profile)) {
      throw DataError("ramp tests run to failure; censored record not allowed");
    }
    return Outcome::censored;
  }
  const double t = *time;
  if (!(t > 0.0) || !std::isfinite(t)) throw DataError("failure time must be positive and finite");
  if (std::holds_alternative<RampProfile>(profile)) return Outcome::failed_ramp;
  if (const auto* h = hold_of(profile)) {
    if (at_or_before(t, h->ramp_end())) return Outcome::failed_ramp;
    if (at_or_before(t, h->end_time)) return Outcome::failed_constant;
    if (std::holds_alternative<RcrProfile>(profile)) return Outcome::failed_rcr;
    throw DataError("failure after the end of a constant-load test without reload");
  }
  const auto& p = std::get<PiecewiseProfile>(profile);
  if (t > p.horizon()) throw DataError("failure after the profile horizon");
  return Outcome::failed_constant;
}

void check_consistent(const FailureRecord& record, const GroupConfig& group,
                      const std::string& context) {
  const std::string where = context.empty() ? record.specimen_id : context;
  if (record.group != group.id) throw DataError(where + ": group mismatch");
  Outcome expected;
  try {
    expected = classify(group.profile, record.time);
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  }
  if (expected != record.outcome) {
    throw DataError(where + ": outcome " + std::string(to_string(record.outcome)) +
                    " disagrees with time (expected " + std::string(to_string(expected)) + ")");
  }
}

std::vector<FailureRecord> records_in_group(const std::vector<FailureRecord>& records, int group) {
  std::vector<FailureRecord> out;
  for (const auto& r : records) {
    if (r.group == group) out.push_back(r);
  }
  return out;
}

std::optional<double> load_at_failure(const LoadProfile& profile, const FailureRecord& record) {
  if (!record.time) return std::nullopt;
  const double t = *record.time;
  if (const auto* h = hold_of(profile)) {
    if (at_or_before(t, h->ramp_end())) return h->rate * t;
    if (at_or_before(t, h->end_time)) return h->level;
  }
  return load_at(profile, t);
}

// ---------------------------------------------------------------------------

IngestReport ingest_csv(std::string_view text, const DatasetManifest& manifest) {
  IngestReport report;
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::size_t pos = 0;
  int row = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == text.npos ? text.npos : nl - pos);
    pos = nl == text.npos ? text.size() + 1 : nl + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_fields(line);
    if (!header_seen) {
      header_seen = true;
      if (f.size() < 5 || f[0] != "specimen_id" || f[1] != "group" || f[2] != "outcome" ||
          f[3] != "time" || f[4] != "time_unit") {
        throw DataError("row " + std::to_string(row) +
                        ": header must be specimen_id,group,outcome,time,time_unit");
      }
      continue;
    }
    const std::string where = "row " + std::to_string(row);
    if (f.size() != 5) {
      problems.push_back(where + ": expected 5 fields, found " + std::to_string(f.size()));
      continue;
    }
    FailureRecord rec;
    rec.specimen_id = std::string(f[0]);
    if (rec.specimen_id.empty()) {
      problems.push_back(where + ": empty specimen_id");
      continue;
    }
    if (!seen.insert(rec.specimen_id).second) {
      problems.push_back(where + ": duplicate specimen_id " + rec.specimen_id);
      continue;
    }
    auto [gp, gec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), rec.group);
    if (gec != std::errc() || gp != f[1].data() + f[1].size()) {
      problems.push_back(where + ": bad group '" + std::string(f[1]) + "'");
      continue;
    }
    const auto outcome = parse_outcome(f[2]);
    if (!outcome) {
      problems.push_back(where + ": unknown outcome '" + std::string(f[2]) + "'");
      continue;
    }
    rec.outcome = *outcome;
    if (!f[3].empty()) {
      double v = 0.0;
      auto [tp, tec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), v);
      if (tec != std::errc() || tp != f[3].data() + f[3].size() || !std::isfinite(v)) {
        problems.push_back(where + ": bad time '" + std::string(f[3]) + "'");
        continue;
      }
      const auto unit = parse_time_unit(f[4]);
      if (!unit) {
        problems.push_back(where + ": unknown time unit '" + std::string(f[4]) + "'");
        continue;
      }
      rec.time = to_hours(v, *unit);
    }
    const GroupConfig* group = nullptr;
    for (const auto& g : manifest.groups) {
      if (g.id == rec.group) group = &g;
    }
    if (!group) {
      problems.push_back(where + ": group " + std::to_string(rec.group) + " not in manifest");
      continue;
    }
    try {
      check_consistent(rec, *group, where);
    } catch (const DataError& e) {
      problems.push_back(e.what());
      continue;
    }
    ++report.counts_per_group[rec.group];
    report.records.push_back(std::move(rec));
  }
  if (!header_seen) problems.insert(problems.begin(), "missing header");
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " problem(s) in dataset:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  return report;
}

IngestReport ingest_csv_file(const std::string& path, const DatasetManifest& manifest) {
  return ingest_csv(read_text_file(path), manifest);
}

std::string to_csv(const std::vector<FailureRecord>& records) {
  std::string out = "specimen_id,group,outcome,time,time_unit\n";
  char buf[64];
  for (const auto& r : records) {
    out += r.specimen_id;
    out += ',' + std::to_string(r.group) + ',' + std::string(to_string(r.outcome)) + ',';
    if (r.time) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *r.time);
      out.append(buf, p);
    }
    out += ",hours\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << content;
  if (!f) throw IoError("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace dol
