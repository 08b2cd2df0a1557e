#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace dol {

/// All internal times are hours. Calendar units use fixed lengths:
/// week = 168 h, month = 730 h, year = 8760 h.
enum class TimeUnit { seconds, minutes, hours, days, weeks, months, years };

inline constexpr double kHoursPerWeek = 168.0;
inline constexpr double kHoursPerMonth = 730.0;
inline constexpr double kHoursPerYear = 8760.0;

std::optional<TimeUnit> parse_time_unit(std::string_view tag);
std::string_view to_string(TimeUnit unit);
double hours_per(TimeUnit unit);
double to_hours(double value, TimeUnit unit);

/// Parses "<number> <unit>" or "<number><unit>", e.g. "3 months", "4yr".
/// Throws ConfigError on an unknown unit or a malformed number.
double parse_duration_hours(std::string_view text);

}  // namespace dol
