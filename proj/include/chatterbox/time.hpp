#pragma once

#include <absl/time/civil_time.h>
#include <absl/time/time.h>

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace chatterbox {

/// UTC instant with one-second resolution.
using Instant = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// Wall time in a persona's zone, without offset.
using LocalDateTime = absl::CivilSecond;

inline Instant from_unix(std::int64_t s) { return Instant{Seconds{s}}; }
inline std::int64_t to_unix(Instant t) { return t.time_since_epoch().count(); }

/// "2025-07-10T01:00:00Z"
std::string format_utc(Instant t);
/// Accepts "YYYY-MM-DDTHH:MM:SSZ" or with a numeric offset. Throws ParseError.
Instant parse_utc(std::string_view text);

/// True when `zone` names a loadable IANA zone.
bool zone_exists(const std::string& zone);

/// Throws ConfigError for an unknown zone.
absl::TimeZone load_zone(const std::string& zone);

/// ISO-8601 local time with numeric offset, e.g. "2025-07-09T18:00:00-07:00".
std::string format_local_iso(Instant t, const std::string& zone);

LocalDateTime to_local(Instant t, const std::string& zone);
Instant from_local(LocalDateTime local, const std::string& zone);

/// "2025-07-01T20:00:00" (no offset).
std::string format_local(LocalDateTime local);

/// Parses "90s", "15m", "8h", "5d", "1d12h", or a bare integer of seconds.
Seconds parse_duration(std::string_view text);

}  // namespace chatterbox
