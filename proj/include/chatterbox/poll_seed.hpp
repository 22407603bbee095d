#pragma once

#include <chatterbox/platform.hpp>
#include <chatterbox/time.hpp>

#include <optional>
#include <random>
#include <set>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

namespace chatterbox::poll {

struct PollConfig {
  Seconds base_interval{300};
  Seconds cap{3600};
  double jitter_pct = 0.2;
  double p_seed = 0.15;
  int window_start = 8;  // local hour, inclusive
  int window_end = 23;   // local hour, exclusive
};

struct PollState {
  std::string account_id;
  PlatformId platform = PlatformId::ts_like;
  std::string timezone;
  int consecutive_empty = 0;
  Instant last_poll{};
  Instant next_poll{};
  std::uint64_t cursor = 0;
};

bool in_window(LocalDateTime t, int start_hour, int end_hour);

/// Whole seconds from `now` to the next local `start_hour`:00:00.
Seconds until_window_start(LocalDateTime now, int start_hour);

/// Backoff delay with an explicit jitter fraction in [-jitter_pct, +jitter_pct].
///   inside the window:  clamp(base * 2^n, base, cap) * (1 + jitter)
///   outside:            time until the window opens + base * (1 + jitter)
Seconds next_poll_delay(int consecutive_empty, const PollConfig& cfg, LocalDateTime now_local,
                        double jitter);

/// Draws jitter uniformly from [-jitter_pct, +jitter_pct].
Seconds next_poll_delay(const PollState& s, const PollConfig& cfg, LocalDateTime now_local,
                        std::mt19937_64& rng);

/// Activity resets the backoff; an empty poll extends it.
void record_poll(PollState& s, bool had_activity);

enum class SeedKind { like, repost, follow_suggested, join_group };
std::string_view to_string(SeedKind k);

struct SeedContext {
  std::vector<std::string> trending;
  std::vector<std::string> suggested;
  std::vector<std::string> groups;
};

struct SeedAction {
  std::string account_id;
  PlatformId platform = PlatformId::ts_like;
  SeedKind kind = SeedKind::like;
  std::string target;
  Instant at{};
};

/// Kinds legal on `platform` that also have at least one target.
std::vector<SeedKind> legal_seed_kinds(PlatformId platform, const SeedContext& ctx);

/// Emits an action iff draw < p_seed and some kind is available. `kind_draw`
/// and `target_draw` in [0,1) pick the kind and target uniformly.
std::optional<SeedAction> maybe_seed(double draw, double p_seed, PlatformId platform,
                                     const SeedContext& ctx, double kind_draw, double target_draw);
std::optional<SeedAction> maybe_seed(double draw, double p_seed, PlatformId platform,
                                     const SeedContext& ctx, std::mt19937_64& rng);

/// Reciprocates each inbound follower exactly once.
class FollowBackTracker {
 public:
  /// Returns the follower to follow back, or nothing when already done.
  std::optional<std::string> on_follow_event(PlatformId platform, const std::string& account,
                                             const std::string& follower);
  bool followed_back(PlatformId platform, const std::string& account,
                     const std::string& follower) const;
  void restore(PlatformId platform, const std::string& account, const std::string& follower);
  std::size_t size() const { return done_.size(); }
  const std::set<std::tuple<PlatformId, std::string, std::string>>& entries() const { return done_; }

 private:
  std::set<std::tuple<PlatformId, std::string, std::string>> done_;
};

}  // namespace chatterbox::poll
