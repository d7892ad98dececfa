#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace fnfleet {

using Duration = std::chrono::milliseconds;
using Timestamp = std::chrono::time_point<std::chrono::system_clock, Duration>;

/// Source of "now" for anything that stamps records. The simulator swaps in
/// its virtual clock here.
using TimeSource = std::function<Timestamp()>;

Timestamp wall_now();

/// `YYYY-MM-DDTHH:MM:SS.mmmZ`, always UTC.
std::string format_iso8601(Timestamp t);

/// Accepts `YYYY-MM-DDTHH:MM:SS[.fff]` followed by `Z` or `+HH:MM`/`-HH:MM`.
/// Throws ValidationError on anything else.
Timestamp parse_iso8601(std::string_view text);

/// Seconds (possibly fractional) to the millisecond duration used everywhere.
Duration seconds_to_duration(double seconds);
double duration_to_seconds(Duration d);

} // namespace fnfleet
