#include "dol/units.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>

#include "dol/error.hpp"

namespace dol {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::bracket: return "bracket";
    case ErrorCategory::convergence: return "convergence";
    case ErrorCategory::integration: return "integration";
    case ErrorCategory::data: return "data";
    case ErrorCategory::config: return "config";
    case ErrorCategory::fit: return "fit";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

std::optional<TimeUnit> parse_time_unit(std::string_view tag) {
  std::string t(tag);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "s" || t == "sec" || t == "secs" || t == "second" || t == "seconds") return TimeUnit::seconds;
  if (t == "min" || t == "mins" || t == "minute" || t == "minutes") return TimeUnit::minutes;
  if (t == "h" || t == "hr" || t == "hrs" || t == "hour" || t == "hours") return TimeUnit::hours;
  if (t == "d" || t == "day" || t == "days") return TimeUnit::days;
  if (t == "wk" || t == "wks" || t == "week" || t == "weeks") return TimeUnit::weeks;
  if (t == "mo" || t == "mon" || t == "month" || t == "months") return TimeUnit::months;
  if (t == "y" || t == "yr" || t == "yrs" || t == "year" || t == "years") return TimeUnit::years;
  return std::nullopt;
}

std::string_view to_string(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::seconds: return "seconds";
    case TimeUnit::minutes: return "minutes";
    case TimeUnit::hours: return "hours";
    case TimeUnit::days: return "days";
    case TimeUnit::weeks: return "weeks";
    case TimeUnit::months: return "months";
    case TimeUnit::years: return "years";
  }
  return "hours";
}

double hours_per(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::seconds: return 1.0 / 3600.0;
    case TimeUnit::minutes: return 1.0 / 60.0;
    case TimeUnit::hours: return 1.0;
    case TimeUnit::days: return 24.0;
    case TimeUnit::weeks: return kHoursPerWeek;
    case TimeUnit::months: return kHoursPerMonth;
    case TimeUnit::years: return kHoursPerYear;
  }
  return 1.0;
}

double to_hours(double value, TimeUnit unit) { return value * hours_per(unit); }

double parse_duration_hours(std::string_view text) {
  std::size_t begin = 0;
  while (begin < text.size() && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  std::size_t end = begin;
  while (end < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '.' ||
          text[end] == 'e' || text[end] == 'E' || text[end] == '-' || text[end] == '+')) {
    ++end;
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + end, value);
  if (ec != std::errc() || ptr == text.data() + begin) {
    throw ConfigError("malformed duration '" + std::string(text) + "'");
  }
  std::string_view rest = text.substr(static_cast<std::size_t>(ptr - text.data()));
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.remove_suffix(1);
  if (rest.empty()) {
    throw ConfigError("duration '" + std::string(text) + "' has no unit tag");
  }
  auto unit = parse_time_unit(rest);
  if (!unit) {
    throw ConfigError("unknown time unit '" + std::string(rest) + "'");
  }
  return to_hours(value, *unit);
}

}  // namespace dol
