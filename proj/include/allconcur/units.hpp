#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace allconcur {

/// Virtual and wall time in integer nanoseconds.
using Nanos = std::int64_t;

/// Parses "250us", "10ms", "1.5s", "24h", "2y" (y = 365 days), or a bare number
/// of seconds. Returns seconds.
double parse_duration(std::string_view text);

/// Seconds to nanoseconds, rounding up.
Nanos to_nanos(double seconds);
double to_seconds(Nanos ns);

std::string format_duration(double seconds);

constexpr double kYear = 365.0 * 24 * 3600;

}  // namespace allconcur
