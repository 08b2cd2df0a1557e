#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dol/load_profile.hpp"

namespace dol {

/// Where a specimen's damage reached 1 (or did not).
enum class Phase { ramp, hold, reload, survived };

enum class Outcome { failed_ramp, failed_constant, failed_rcr, censored };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);

/// One specimen. `time` is the failure time in hours (absolute, so RCR
/// failures exceed T1) or empty when censored.
struct FailureRecord {
  std::string specimen_id;
  int group = 0;
  Outcome outcome = Outcome::censored;
  std::optional<double> time;
};

/// One test group: a profile and the number of specimens assigned to it.
/// Ramp groups carry a RampProfile; constant-load groups carry an RcrProfile
/// when survivors are reloaded, or a ConstantProfile when they are censored.
struct GroupConfig {
  int id = 0;
  LoadProfile profile;
  int size = 0;
  std::string label;
};

struct DatasetManifest {
  std::vector<GroupConfig> groups;
  std::string provenance;

  const GroupConfig& group(int id) const;
  int total_size() const;
};

/// Throws ConfigError on duplicate ids, nonpositive sizes or invalid profiles.
void validate(const DatasetManifest& manifest);

/// The ramp / constant / RCR design used for the hemlock duration-of-load
/// experiment: five ramp groups (rates relative to the reference rate) and
/// five constant-load groups at 20.68 and 31.02 MPa reloaded at the reference
/// rate; 1694 specimens in total.
DatasetManifest reference_design();

/// Scales every group size by `fraction` (rounded, at least 1) or sets every
/// size to `per_group` when that is positive.
DatasetManifest resized(const DatasetManifest& manifest, double fraction, int per_group = 0);

/// Outcome implied by a failure time under a profile (censored when the time
/// is empty). Throws DataError for times incompatible with the profile.
Outcome classify(const LoadProfile& profile, std::optional<double> time);

/// Throws DataError (with `context` in the message) when the record's outcome
/// and time disagree with its group's profile.
void check_consistent(const FailureRecord& record, const GroupConfig& group,
                      const std::string& context = {});

/// Records of one group, in input order.
std::vector<FailureRecord> records_in_group(const std::vector<FailureRecord>& records, int group);

/// tau(T_f) for a failure, the load sustained at failure: k T_f for initial
/// ramp failures, tau_c for hold failures, k (T_f - T1) on the reload ramp.
/// Empty for censored records.
std::optional<double> load_at_failure(const LoadProfile& profile, const FailureRecord& record);

// ---------------------------------------------------------------------------
// CSV  (specimen_id,group,outcome,time,time_unit)

struct IngestReport {
  std::vector<FailureRecord> records;
  std::map<int, int> counts_per_group;
};

/// Parses and validates a dataset against the manifest. All problems are
/// collected and reported together in one DataError, each with its row
/// number.
IngestReport ingest_csv(std::string_view text, const DatasetManifest& manifest);
IngestReport ingest_csv_file(const std::string& path, const DatasetManifest& manifest);

/// Serialises records with times in hours at round-trip precision.
std::string to_csv(const std::vector<FailureRecord>& records);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace dol
