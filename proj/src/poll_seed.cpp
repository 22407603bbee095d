#include <chatterbox/errors.hpp>
#include <chatterbox/poll_seed.hpp>

#include <absl/time/civil_time.h>

#include <algorithm>
#include <cmath>

namespace chatterbox::poll {

bool in_window(LocalDateTime t, int start_hour, int end_hour) {
  const int h = t.hour();
  if (start_hour <= end_hour) return h >= start_hour && h < end_hour;
  // Window wrapping midnight, e.g. 20:00-02:00.
  return h >= start_hour || h < end_hour;
}

Seconds until_window_start(LocalDateTime now, int start_hour) {
  absl::CivilSecond target(now.year(), now.month(), now.day(), start_hour, 0, 0);
  if (target <= now) target = absl::CivilSecond(absl::CivilDay(now) + 1) + start_hour * 3600;
  return Seconds{target - now};
}

Seconds next_poll_delay(int consecutive_empty, const PollConfig& cfg, LocalDateTime now_local,
                        double jitter) {
  const double base = static_cast<double>(cfg.base_interval.count());
  const double cap = static_cast<double>(cfg.cap.count());
  if (!in_window(now_local, cfg.window_start, cfg.window_end)) {
    auto wait = until_window_start(now_local, cfg.window_start);
    return wait + Seconds{std::llround(base * (1.0 + jitter))};
  }
  const int n = std::clamp(consecutive_empty, 0, 62);
  const double raw = base * std::ldexp(1.0, n);
  const double d = std::clamp(raw, base, std::max(base, cap)) * (1.0 + jitter);
  return Seconds{std::llround(d)};
}

Seconds next_poll_delay(const PollState& s, const PollConfig& cfg, LocalDateTime now_local,
                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jit(-cfg.jitter_pct, cfg.jitter_pct);
  return next_poll_delay(s.consecutive_empty, cfg, now_local, jit(rng));
}

void record_poll(PollState& s, bool had_activity) {
  if (had_activity) s.consecutive_empty = 0;
  else ++s.consecutive_empty;
}

std::string_view to_string(SeedKind k) {
  switch (k) {
    case SeedKind::like: return "like";
    case SeedKind::repost: return "repost";
    case SeedKind::follow_suggested: return "follow_suggested";
    case SeedKind::join_group: return "join_group";
  }
  return "?";
}

std::vector<SeedKind> legal_seed_kinds(PlatformId platform, const SeedContext& ctx) {
  std::vector<SeedKind> kinds;
  if (!ctx.trending.empty()) {
    kinds.push_back(SeedKind::like);
    kinds.push_back(SeedKind::repost);
  }
  if (!ctx.suggested.empty()) kinds.push_back(SeedKind::follow_suggested);
  if (capability(platform).has_groups && !ctx.groups.empty()) kinds.push_back(SeedKind::join_group);
  return kinds;
}

namespace {

std::size_t pick(double u, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
}

}  // namespace

std::optional<SeedAction> maybe_seed(double draw, double p_seed, PlatformId platform,
                                     const SeedContext& ctx, double kind_draw, double target_draw) {
  if (p_seed < 0.0 || p_seed > 1.0) throw ConfigError("p_seed must be within [0, 1]");
  if (!(draw < p_seed)) return std::nullopt;
  auto kinds = legal_seed_kinds(platform, ctx);
  if (kinds.empty()) return std::nullopt;
  SeedAction a;
  a.platform = platform;
  a.kind = kinds[pick(kind_draw, kinds.size())];
  const auto& pool = a.kind == SeedKind::follow_suggested ? ctx.suggested
                     : a.kind == SeedKind::join_group     ? ctx.groups
                                                          : ctx.trending;
  a.target = pool[pick(target_draw, pool.size())];
  return a;
}

std::optional<SeedAction> maybe_seed(double draw, double p_seed, PlatformId platform,
                                     const SeedContext& ctx, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double k = u(rng);
  const double t = u(rng);
  return maybe_seed(draw, p_seed, platform, ctx, k, t);
}

std::optional<std::string> FollowBackTracker::on_follow_event(PlatformId platform,
                                                              const std::string& account,
                                                              const std::string& follower) {
  if (!done_.emplace(platform, account, follower).second) return std::nullopt;
  return follower;
}

bool FollowBackTracker::followed_back(PlatformId platform, const std::string& account,
                                      const std::string& follower) const {
  return done_.count({platform, account, follower}) > 0;
}

void FollowBackTracker::restore(PlatformId platform, const std::string& account,
                                const std::string& follower) {
  done_.emplace(platform, account, follower);
}

}  // namespace chatterbox::poll
