#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace epicast {

using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
std::optional<Date> parse_date(std::string_view text);

std::string format_date(Date date);

inline Date add_days(Date date, long long n) { return date + std::chrono::days{n}; }

inline long long days_between(Date from, Date to) { return (to - from).count(); }

}  // namespace epicast
