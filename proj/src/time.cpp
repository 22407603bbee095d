#include <chatterbox/errors.hpp>
#include <chatterbox/time.hpp>

#include <cctype>
#include <cstdio>
#include <map>
#include <mutex>

namespace chatterbox {

namespace {

absl::Time to_absl(Instant t) { return absl::FromUnixSeconds(to_unix(t)); }

// cctz loads are cached internally, but LoadTimeZone still takes a lock and
// a map lookup; keep our own cache keyed by name.
const absl::TimeZone* cached_zone(const std::string& zone) {
  static std::mutex mu;
  static std::map<std::string, absl::TimeZone> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(zone); it != cache.end()) return &it->second;
  absl::TimeZone tz;
  if (zone.empty() || !absl::LoadTimeZone(zone, &tz)) return nullptr;
  return &cache.emplace(zone, tz).first->second;
}

}  // namespace

std::string format_utc(Instant t) {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%SZ", to_absl(t), absl::UTCTimeZone());
}

Instant parse_utc(std::string_view text) {
  absl::Time out;
  std::string err;
  std::string s(text);
  if (absl::ParseTime("%Y-%m-%dT%H:%M:%SZ", s, absl::UTCTimeZone(), &out, &err) ||
      absl::ParseTime("%Y-%m-%dT%H:%M:%S%Ez", s, absl::UTCTimeZone(), &out, &err)) {
    return from_unix(absl::ToUnixSeconds(out));
  }
  throw ParseError("timestamp", "cannot parse '" + s + "'");
}

bool zone_exists(const std::string& zone) { return cached_zone(zone) != nullptr; }

absl::TimeZone load_zone(const std::string& zone) {
  const auto* tz = cached_zone(zone);
  if (!tz) throw ConfigError("unknown timezone '" + zone + "'");
  return *tz;
}

std::string format_local_iso(Instant t, const std::string& zone) {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%S%Ez", to_absl(t), load_zone(zone));
}

LocalDateTime to_local(Instant t, const std::string& zone) {
  return absl::ToCivilSecond(to_absl(t), load_zone(zone));
}

Instant from_local(LocalDateTime local, const std::string& zone) {
  return from_unix(absl::ToUnixSeconds(absl::FromCivil(local, load_zone(zone))));
}

std::string format_local(LocalDateTime local) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02d-%02dT%02d:%02d:%02d",
                static_cast<long long>(local.year()), local.month(), local.day(), local.hour(),
                local.minute(), local.second());
  return buf;
}

Seconds parse_duration(std::string_view text) {
  static const std::map<char, long long> units{{'s', 1}, {'m', 60}, {'h', 3600}, {'d', 86400},
                                               {'w', 604800}};
  if (text.empty()) throw ParseError("duration", "empty");
  long long total = 0;
  long long num = 0;
  bool have_digit = false;
  for (char c : text) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      num = num * 10 + (c - '0');
      have_digit = true;
    } else if (auto it = units.find(c); it != units.end() && have_digit) {
      total += num * it->second;
      num = 0;
      have_digit = false;
    } else {
      throw ParseError("duration", "cannot parse '" + std::string(text) + "'");
    }
  }
  if (have_digit) total += num;
  return Seconds{total};
}

}  // namespace chatterbox
