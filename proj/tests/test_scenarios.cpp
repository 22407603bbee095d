#include "support.hpp"

#include <chatterbox/errors.hpp>

#include <gtest/gtest.h>

using namespace chatterbox;
using nlohmann::json;

class BundledScenario : public ::testing::TestWithParam<std::string> {};

TEST_P(BundledScenario, PassesAndReproduces) {
  const auto path = testsupport::scenario_path(GetParam());
  sim::ScenarioRunner a(sim::load_scenario(path));
  auto ra = a.run();
  ASSERT_TRUE(ra.passed) << ra.failure;
  for (const auto& s : ra.steps) EXPECT_TRUE(s.ok) << s.label << ": " << s.detail;
  EXPECT_EQ(testsupport::serialization_violations(ra.threads), 0);

  sim::ScenarioRunner b(sim::load_scenario(path));
  auto rb = b.run();
  EXPECT_EQ(ra.trace_json(), rb.trace_json());
  EXPECT_EQ(ra.snapshot, rb.snapshot);
}

INSTANTIATE_TEST_SUITE_P(All, BundledScenario,
                         ::testing::Values("walkthrough", "collision", "multi-platform-refusal",
                                           "payment-enumeration", "selfie-on-origin-platform"),
                         [](const auto& info) {
                           std::string n = info.param;
                           for (auto& c : n)
                             if (c == '-') c = '_';
                           return n;
                         });

TEST(Walkthrough, CrossesToMessengerAndSpansSixWeeks) {
  auto sc = sim::load_scenario(testsupport::scenario_path("walkthrough"));
  sim::ScenarioRunner runner(sc);
  auto r = runner.run();
  ASSERT_TRUE(r.passed) << r.failure;
  ASSERT_EQ(r.threads.size(), 1u);
  const auto& t = r.threads[0];
  ASSERT_TRUE(t.migration);
  EXPECT_TRUE(t.segment(PlatformId::ts_like)->dormant);
  const auto& wa = t.segment(PlatformId::wa_like)->messages;
  ASSERT_FALSE(wa.empty());
  EXPECT_EQ(wa.front().origin, "reintro");
  bool selfie_sent = false;
  for (const auto& m : wa)
    if (m.sent_asset) selfie_sent = true;
  EXPECT_TRUE(selfie_sent);
  for (const auto& m : t.segment(PlatformId::ts_like)->messages) EXPECT_FALSE(m.sent_asset);
  EXPECT_GE(r.end - sc.start, Seconds{46 * 24 * 3600});
}

TEST(Walkthrough, SameSeedSameTraceDifferentSeedStillPasses) {
  auto sc = sim::load_scenario(testsupport::scenario_path("walkthrough"));
  sc.seed = 99;
  sim::ScenarioRunner a(sc), b(sc);
  auto ra = a.run();
  auto rb = b.run();
  ASSERT_TRUE(ra.passed) << ra.failure;
  EXPECT_EQ(ra.trace_json(), rb.trace_json());
}

TEST(ScenarioFormat, ErrorsNameTheField) {
  const json base = json::parse(R"({"name": "x", "start": "2025-07-07T14:00:00Z",
    "personas": [{"key": "p", "seed": 1}],
    "actors": [{"key": "s", "persona": "p", "platform": "TS_like", "handle": "rick"}],
    "steps": []})");
  auto j = base;
  j["steps"] = json::parse(R"([{"actor": "ghost"}])");
  try {
    sim::parse_scenario(j);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.field()).find("steps[0]"), std::string::npos) << e.what();
  }
  j = base;
  j["start"] = "yesterday";
  try {
    sim::parse_scenario(j);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(std::string(e.field()), "start");
  }
}

TEST(ScenarioFormat, FailingExpectationIsReported) {
  auto sc = sim::load_scenario(testsupport::scenario_path("walkthrough"));
  ASSERT_FALSE(sc.steps.empty());
  for (auto& s : sc.steps)
    if (s.expect && s.expect->wants_reply()) {
      s.expect->contains.push_back("this phrase never appears 12345");
      break;
    }
  sim::RunnerOptions opts;
  opts.throw_on_failure = false;
  sim::ScenarioRunner runner(sc, opts);
  auto r = runner.run();
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(r.failure.empty());
}
