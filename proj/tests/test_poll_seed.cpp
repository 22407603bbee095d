#include "support.hpp"

#include <chatterbox/errors.hpp>
#include <chatterbox/poll_seed.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace chatterbox;
using namespace chatterbox::poll;

namespace {

// Walks forward one second at a time until the hour hand enters the window.
std::int64_t brute_until_open(absl::CivilSecond now, int start, int end) {
  std::int64_t s = 0;
  auto t = now;
  // The window must be re-entered, so first leave it if we are inside.
  while (t.hour() >= start && t.hour() < end) {
    t += 1;
    ++s;
  }
  while (!(t.hour() >= start && t.hour() < end)) {
    t += 1;
    ++s;
  }
  return s;
}

double expected_in_window(int n, const PollConfig& cfg) {
  double base = static_cast<double>(cfg.base_interval.count());
  double cap = static_cast<double>(cfg.cap.count());
  double d = base;
  for (int i = 0; i < n; ++i) d *= 2;
  return std::min(std::max(d, base), cap);
}

}  // namespace

TEST(Window, MatchesHourByHourDefinition) {
  for (int h = 0; h < 24; ++h) {
    absl::CivilSecond t(2025, 7, 7, h, 30, 0);
    EXPECT_EQ(in_window(t, 8, 23), h >= 8 && h < 23) << h;
  }
  EXPECT_TRUE(in_window(absl::CivilSecond(2025, 7, 7, 22, 59, 59), 8, 23));
  EXPECT_FALSE(in_window(absl::CivilSecond(2025, 7, 7, 23, 0, 0), 8, 23));
  EXPECT_TRUE(in_window(absl::CivilSecond(2025, 7, 7, 1, 0, 0), 20, 2));
}

TEST(Window, UntilStartAgreesWithBruteForceOracle) {
  std::mt19937_64 rng(5);
  PollConfig cfg;
  for (int i = 0; i < 300; ++i) {
    absl::CivilSecond now(2025, 7, 7 + static_cast<int>(rng() % 20), static_cast<int>(rng() % 24),
                          static_cast<int>(rng() % 60), static_cast<int>(rng() % 60));
    if (in_window(now, cfg.window_start, cfg.window_end)) continue;
    const auto oracle = brute_until_open(now, cfg.window_start, cfg.window_end);
    EXPECT_EQ(until_window_start(now, cfg.window_start).count(), oracle) << format_local(now);
    // Outside the window the delay is the wait plus one jittered base interval.
    for (double j : {-0.2, 0.0, 0.2})
      EXPECT_EQ(next_poll_delay(7, cfg, now, j).count(),
                oracle + std::llround(static_cast<double>(cfg.base_interval.count()) * (1 + j)));
  }
}

TEST(Window, DstTransitionsAreHandledInCivilTime) {
  // 2025-03-09 springs forward in New York; the wait is measured in local wall time.
  auto local = to_local(parse_utc("2025-03-09T05:30:00Z"), "America/New_York");
  EXPECT_EQ(local.hour(), 0);
  auto wait = until_window_start(local, 8);
  EXPECT_EQ(wait.count(), 7 * 3600 + 30 * 60);
}

TEST(Backoff, DelaysStayWithinJitterOfExpected) {
  PollConfig cfg;
  std::mt19937_64 rng(11);
  const absl::CivilSecond noon(2025, 7, 7, 12, 0, 0);
  for (int n = 0; n <= 10; ++n) {
    const double e = expected_in_window(n, cfg);
    PollState s;
    s.consecutive_empty = n;
    for (int i = 0; i < 1000; ++i) {
      auto d = static_cast<double>(next_poll_delay(s, cfg, noon, rng).count());
      EXPECT_GE(d, 0.8 * e);
      EXPECT_LE(d, 1.2 * e);
      EXPECT_GE(d, 0.8 * static_cast<double>(cfg.base_interval.count()));
      EXPECT_LE(d, 1.2 * static_cast<double>(cfg.cap.count()));
    }
  }
}

TEST(Backoff, MonotoneAtFixedJitter) {
  PollConfig cfg;
  const absl::CivilSecond noon(2025, 7, 7, 12, 0, 0);
  for (double j = -0.2; j <= 0.2001; j += 0.01) {
    auto prev = next_poll_delay(0, cfg, noon, j);
    for (int n = 1; n <= 20; ++n) {
      auto d = next_poll_delay(n, cfg, noon, j);
      EXPECT_GE(d, prev);
      prev = d;
    }
  }
}

TEST(Backoff, ActivityResetsTheCounter) {
  PollState s;
  record_poll(s, false);
  record_poll(s, false);
  EXPECT_EQ(s.consecutive_empty, 2);
  record_poll(s, true);
  EXPECT_EQ(s.consecutive_empty, 0);
}

TEST(Seeding, EmpiricalRateMatchesProbability) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  SeedContext ctx{{"post-1", "post-2"}, {"acct-a"}, {"group-x"}};
  int hits = 0, joins_on_bs = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto plat = i % 2 ? PlatformId::bs_like : PlatformId::ts_like;
    auto a = maybe_seed(u(rng), 0.15, plat, ctx, rng);
    if (!a) continue;
    ++hits;
    if (plat == PlatformId::bs_like && a->kind == SeedKind::join_group) ++joins_on_bs;
  }
  const double rate = static_cast<double>(hits) / n;
  EXPECT_GE(rate, 0.14);
  EXPECT_LE(rate, 0.16);
  EXPECT_EQ(joins_on_bs, 0);
}

TEST(Seeding, TargetsComeFromTheContext) {
  SeedContext ctx{{"post-1"}, {"acct-a"}, {"group-x"}};
  for (double k : {0.0, 0.3, 0.6, 0.99}) {
    auto a = maybe_seed(0.0, 0.15, PlatformId::ts_like, ctx, k, 0.5);
    ASSERT_TRUE(a);
    std::set<std::string> allowed{"post-1", "acct-a", "group-x"};
    EXPECT_TRUE(allowed.count(a->target));
  }
  EXPECT_FALSE(maybe_seed(0.5, 0.15, PlatformId::ts_like, ctx, 0.1, 0.1));
  EXPECT_FALSE(maybe_seed(0.0, 0.15, PlatformId::ts_like, SeedContext{}, 0.1, 0.1));
  EXPECT_THROW(maybe_seed(0.0, 1.5, PlatformId::ts_like, ctx, 0.1, 0.1), ConfigError);
  auto kinds = legal_seed_kinds(PlatformId::bs_like, ctx);
  EXPECT_EQ(std::count(kinds.begin(), kinds.end(), SeedKind::join_group), 0);
}

TEST(FollowBack, ExactlyOncePerFollower) {
  FollowBackTracker t;
  EXPECT_EQ(t.on_follow_event(PlatformId::ts_like, "jordan", "anna"), "anna");
  EXPECT_FALSE(t.on_follow_event(PlatformId::ts_like, "jordan", "anna"));
  EXPECT_EQ(t.on_follow_event(PlatformId::bs_like, "jordan", "anna"), "anna");
  EXPECT_TRUE(t.followed_back(PlatformId::ts_like, "jordan", "anna"));
  EXPECT_EQ(t.size(), 2u);
}

TEST(Passivity, OutboundSocialActionsAreSeedsOrFollowBacks) {
  for (const auto* name : {"walkthrough", "multi-platform-refusal", "payment-enumeration"}) {
    auto sc = sim::load_scenario(testsupport::scenario_path(name));
    sim::ScenarioRunner runner(sc);
    auto result = runner.run();
    ASSERT_TRUE(result.passed) << result.failure;
    for (auto plat : kOriginPlatforms) {
      const auto& sp = runner.platforms().get(plat);
      std::set<std::string> trending, suggested, groups;
      for (const auto& x : sp.trending()) trending.insert(x);
      for (const auto& x : sp.suggested()) suggested.insert(x);
      for (const auto& x : sp.groups()) groups.insert(x);
      std::set<std::string> followers;
      const auto snap = runner.honeypot().snapshot();
      for (const auto& e : snap.at("social_inbound"))
        if (e.value("kind", "") == "follow" && e.value("platform", "") == platform_code(plat))
          followers.insert(e.value("from", ""));
      std::map<std::string, int> follows_back;
      for (const auto& a : sp.social_actions()) {
        switch (a.kind) {
          case SocialAction::Kind::like:
          case SocialAction::Kind::repost:
            EXPECT_TRUE(trending.count(a.target)) << a.target;
            break;
          case SocialAction::Kind::join_group:
            EXPECT_TRUE(groups.count(a.target)) << a.target;
            EXPECT_NE(plat, PlatformId::bs_like);
            break;
          case SocialAction::Kind::follow:
            if (followers.count(a.target)) ++follows_back[a.target];
            else EXPECT_TRUE(suggested.count(a.target)) << a.target;
            break;
        }
      }
      for (const auto& [who, n] : follows_back) EXPECT_EQ(n, 1) << who;
    }
  }
}
