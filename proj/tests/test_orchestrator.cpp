#include "support.hpp"

#include <chatterbox/errors.hpp>
#include <chatterbox/orchestrator.hpp>

#include <gtest/gtest.h>
#include <httplib.h>

#include <cstdlib>
#include <fstream>

using namespace chatterbox;
using namespace chatterbox::orchestrator;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  json config;

  Workspace() : dir(testsupport::temp_dir("orch")) {
    fs::create_directories(dir / "personas");
    persona::save_persona(dir / "personas", testsupport::make_persona(1, "Jordan"));
    persona::save_persona(dir / "personas", testsupport::make_persona(2, "Maria"));
    config = {{"personas_dir", "personas"},
              {"event_log", "state/events.jsonl"},
              {"api", {{"enabled", false}}},
              {"export", {{"dir", "export"}, {"salt", "pepper"}}}};
  }

  Config parsed() const { return parse_config(config, dir); }

  std::string config_error() const {
    try {
      parse_config(config, dir);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  }
};

std::size_t lines_in(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST(Config, DefaultsAndResolution) {
  Workspace ws;
  auto c = ws.parsed();
  EXPECT_EQ(c.personas_dir, ws.dir / "personas");
  EXPECT_EQ(c.event_log, ws.dir / "state/events.jsonl");
  EXPECT_EQ(c.runtime.checkpoint_every, 10);
  EXPECT_EQ(c.runtime.first_n_human, 10);
  EXPECT_DOUBLE_EQ(c.runtime.poll.p_seed, 0.15);
  EXPECT_EQ(c.dialogue.kind, "stub");
}

TEST(Config, ErrorsNameTheField) {
  struct Case {
    const char* pointer;
    json value;
    const char* field;
  };
  const std::vector<Case> cases = {
      {"/poll", {{"p_seed", 1.5}}, "poll.p_seed"},
      {"/poll", {{"jitter_pct", -0.1}}, "poll.jitter_pct"},
      {"/poll", {{"cap_s", 10}}, "poll.cap_s"},
      {"/poll", {{"window_start", 23}, {"window_end", 8}}, "poll.window_end"},
      {"/delays", {{"min_s", 600}, {"max_s", 60}}, "delays.max_s"},
      {"/max_retries", 0, "max_retries"},
      {"/checkpoint_every", "ten", "checkpoint_every"},
      {"/personas_dir", "nowhere", "personas_dir"},
      {"/backends", {{"dialogue", {{"kind", "http"}}}}, "backends.dialogue.url"},
      {"/backends", {{"captioner", {{"kind", "magic"}}}}, "backends.captioner.kind"},
      {"/pool", {{{"first_name_key", "Jordan"}, {"phone", "123"}}}, "pool"},
      {"/api", {{"port", 70000}}, "api.port"},
      {"/colour", "blue", "colour"},
  };
  for (const auto& c : cases) {
    Workspace ws;
    ws.config[json::json_pointer(c.pointer)] = c.value;
    auto msg = ws.config_error();
    EXPECT_EQ(msg.rfind(std::string(c.field) + ":", 0), 0u) << c.pointer << " -> " << msg;
  }
  Workspace ws;
  ws.config.erase("personas_dir");
  EXPECT_EQ(ws.config_error().rfind("personas_dir:", 0), 0u);
}

TEST(Config, TokenRequiredAndEnvOverride) {
  Workspace ws;
  ws.config["api"] = {{"enabled", true}, {"port", 0}};
  const auto file = ws.dir / "config.json";
  std::ofstream(file) << ws.config.dump(2);
  ::unsetenv("CHATTERBOX_AUTH_TOKEN");
  try {
    load_config(file);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("api.token:", 0), 0u);
  }
  ::setenv("CHATTERBOX_AUTH_TOKEN", "from-env", 1);
  EXPECT_EQ(load_config(file).api.token, "from-env");
  ::unsetenv("CHATTERBOX_AUTH_TOKEN");
}

TEST(OrchestratorTest, EmptyPersonaDirectoryIsAConfigError) {
  Workspace ws;
  fs::create_directories(ws.dir / "none");
  ws.config["personas_dir"] = "none";
  SimClock clock(parse_utc("2025-07-07T14:00:00Z"));
  EXPECT_THROW(Orchestrator(ws.parsed(), clock), ConfigError);
}

TEST(OrchestratorTest, StartThenShutdownLeavesEmptyLog) {
  Workspace ws;
  SimClock clock(parse_utc("2025-07-07T14:00:00Z"));
  {
    Orchestrator o(ws.parsed(), clock);
    EXPECT_EQ(o.start(), 0u);
    EXPECT_THROW(o.start(), StateError);
    o.shutdown();
    o.shutdown();
  }
  EXPECT_TRUE(fs::exists(ws.dir / "state/events.jsonl"));
  EXPECT_EQ(fs::file_size(ws.dir / "state/events.jsonl"), 0u);
}

TEST(OrchestratorTest, RestartReplaysToTheSameState) {
  Workspace ws;
  ws.config["first_n_human"] = 1;
  SimClock clock(parse_utc("2025-07-07T14:00:00Z"));
  std::string before;
  std::size_t logged = 0;
  {
    Orchestrator o(ws.parsed(), clock);
    o.start();
    auto& hp = o.honeypot();
    const auto jordan = hp.personas().front().persona_id;
    auto& ts = o.platforms().get(PlatformId::ts_like);
    ts.register_account("rick", AccountMetadata{"rick", "", 5, 5, 5});
    ts.counterparty_send("rick", hp.origin_handle(jordan), Payload{"hello Jordan", std::nullopt});
    hp.run_until(clock, clock.now() + Seconds{5400});
    auto rows = hp.list_triage();
    ASSERT_EQ(rows.size(), 1u);
    hp.triage_act({{rows[0].thread_id, true, 0, "amy", std::nullopt}});
    hp.run_until(clock, clock.now() + Seconds{5400});
    ts.counterparty_send("rick", hp.origin_handle(jordan), Payload{"what do you do?", std::nullopt});
    hp.run_until(clock, clock.now() + Seconds{5400});
    AnnotatorAction a;
    a.annotator_id = "amy";
    a.thread_id = rows[0].thread_id;
    a.verb = AnnotatorAction::Verb::submit;
    a.text = "I teach piano";
    hp.act(a);
    hp.run_until(clock, clock.now() + Seconds{5400});
    before = hp.snapshot_text();
    logged = hp.events_emitted();

    auto paths = o.export_data(true);
    EXPECT_EQ(lines_in(paths.transcripts), 4u);
    EXPECT_GT(lines_in(paths.audit), 0u);
    std::ifstream in(paths.transcripts);
    std::string all((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(all.find("\"rick\""), std::string::npos);
    o.shutdown();
  }
  ASSERT_GT(logged, 5u);
  EXPECT_EQ(lines_in(ws.dir / "state/events.jsonl"), logged);

  Orchestrator again(ws.parsed(), clock);
  EXPECT_EQ(again.start(), logged);
  EXPECT_EQ(again.honeypot().snapshot_text(), before);
}

TEST(OrchestratorTest, ExportNeedsSaltToDeidentify) {
  Workspace ws;
  ws.config["export"] = {{"dir", "export"}};
  SimClock clock(parse_utc("2025-07-07T14:00:00Z"));
  Orchestrator o(ws.parsed(), clock);
  o.start();
  EXPECT_THROW(o.export_data(true), ConfigError);
  auto paths = o.export_data(false);
  EXPECT_TRUE(fs::exists(paths.transcripts));
}

TEST(OrchestratorTest, ServesTheApiWhenEnabled) {
  Workspace ws;
  ws.config["api"] = {{"enabled", true}, {"port", 0}, {"token", "tok"}};
  SimClock clock(parse_utc("2025-07-07T14:00:00Z"));
  Orchestrator o(ws.parsed(), clock);
  o.start();
  ASSERT_GT(o.api_port(), 0);
  httplib::Client cli("127.0.0.1", o.api_port());
  auto r = cli.Get("/api/conversations", {{"Authorization", "Bearer tok"}});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(cli.Get("/api/conversations")->status, 401);
  o.shutdown();
}
