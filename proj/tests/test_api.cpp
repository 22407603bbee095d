#include "support.hpp"

#include <chatterbox/annotation_api.hpp>
#include <chatterbox/errors.hpp>

#include <gtest/gtest.h>
#include <httplib.h>

using namespace chatterbox;
using chatterbox::api::AnnotationService;
using nlohmann::json;
using testsupport::Rig;

namespace {

std::string seeded_thread(Rig& rig, const persona::Persona& p) {
  rig.scammer_says(PlatformId::bs_like, "rick", p.persona_id, "hello, nice profile");
  rig.run_for(Seconds{5400});
  return rig.only_thread();
}

}  // namespace

TEST(Api, TriageListAndBatch) {
  auto p = testsupport::make_persona(1);
  Rig rig({p});
  AnnotationService svc(*rig.hp);
  auto id = seeded_thread(rig, p);

  auto list = svc.list_triage();
  ASSERT_EQ(list.status, 200);
  ASSERT_EQ(list.body["rows"].size(), 1u);
  EXPECT_EQ(list.body["rows"][0]["thread_id"], id);
  EXPECT_EQ(list.body["rows"][0]["platform"], "BS_like");
  EXPECT_EQ(list.body["openers"].size(), 3u);

  auto res = svc.triage_act({{"annotator_id", "amy"},
                             {"actions", {{{"thread_id", id}, {"verb", "interact"}, {"opener_index", 1}},
                                          {{"thread_id", "thread-77"}, {"verb", "ignore"}}}}});
  ASSERT_EQ(res.status, 200);
  EXPECT_EQ(res.body["results"][0]["ok"], true);
  EXPECT_TRUE(res.body["results"][0].contains("dispatch_at"));
  EXPECT_EQ(res.body["results"][1]["ok"], false);
  EXPECT_EQ(res.body["results"][1]["error"], "not_found");

  EXPECT_EQ(svc.triage_act({{"actions", json::array()}}).status, 400);
  EXPECT_EQ(svc.triage_act({{"annotator_id", "amy"}, {"actions", {{{"thread_id", id}, {"verb", "halt"}}}}}).status,
            400);
}

TEST(Api, ConversationViewAndActStatuses) {
  auto p = testsupport::make_persona(1);
  Rig rig({p});
  AnnotationService svc(*rig.hp);
  auto id = seeded_thread(rig, p);
  svc.triage_act({{"annotator_id", "amy"}, {"actions", {{{"thread_id", id}, {"verb", "interact"}}}}});
  rig.run_for(Seconds{1800});

  auto view = svc.conversation_view(id);
  ASSERT_EQ(view.status, 200);
  EXPECT_EQ(view.body["state"], "triaged_active_manual");
  EXPECT_EQ(view.body["messages"].size(), 2u);
  EXPECT_EQ(view.body["messages"][0]["platform_name"], "Bluesky");
  EXPECT_EQ(view.body["messages"][1]["role"], "persona");
  EXPECT_EQ(view.body["next_checkpoint_in"], 10);
  EXPECT_TRUE(view.body["pending"].is_null());
  EXPECT_EQ(svc.conversation_view("nope").status, 404);

  // Persona spoke last.
  auto r = svc.act(id, {{"verb", "submit"}, {"annotator_id", "amy"}, {"text", "hey"}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["error"], "serialization");

  rig.scammer_says(PlatformId::bs_like, "rick", p.persona_id, "where do you live?");
  rig.run_for(Seconds{5400});
  const auto version = svc.conversation_view(id).body["version"].get<std::uint64_t>();
  r = svc.act(id, {{"verb", "submit"}, {"annotator_id", "amy"}, {"text", "near the lake"},
                   {"expected_version", version}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["item_ids"].size(), 1u);
  r = svc.act(id, {{"verb", "toggle_auto"}, {"annotator_id", "bob"}, {"expected_version", version}});
  EXPECT_EQ(r.status, 409);
  r = svc.act(id, {{"verb", "fly"}, {"annotator_id", "bob"}});
  EXPECT_EQ(r.status, 400);
  r = svc.act(id, {{"verb", "halt"}});
  EXPECT_EQ(r.status, 400);
  r = svc.act(id, {{"verb", "approve_selfie"}, {"annotator_id", "bob"}, {"asset_id", "x"}});
  EXPECT_EQ(r.status, 422);
  r = svc.act("thread-9", {{"verb", "halt"}, {"annotator_id", "bob"}});
  EXPECT_EQ(r.status, 404);

  auto convs = svc.list_conversations(std::string("BS_like"));
  ASSERT_EQ(convs.status, 200);
  EXPECT_EQ(convs.body["conversations"].size(), 1u);
  EXPECT_EQ(svc.list_conversations(std::string("TS_like")).body["conversations"].size(), 0u);
  EXPECT_EQ(svc.list_conversations(std::string("MySpace")).status, 400);
}

TEST(Api, CandidatesRankedAndAudited) {
  auto p = testsupport::make_persona(1);
  Rig rig({p});
  AnnotationService svc(*rig.hp);
  auto id = seeded_thread(rig, p);
  svc.triage_act({{"annotator_id", "amy"}, {"actions", {{{"thread_id", id}, {"verb", "interact"}}}}});
  rig.run_for(Seconds{1800});
  rig.scammer_says(PlatformId::bs_like, "rick", p.persona_id, "do you like to travel?");
  rig.run_for(Seconds{5400});
  auto c = svc.candidates(id, 3, "amy");
  ASSERT_EQ(c.status, 200) << c.body.dump();
  ASSERT_EQ(c.body["candidates"].size(), 3u);
  EXPECT_EQ(c.body["candidates"][2]["rank"], 3);
  EXPECT_EQ(svc.candidates(id, 0, "amy").status, 422);
  bool audited = false;
  for (const auto& e : rig.hp->audit_log())
    if (e.value("verb", "") == "regenerate" && e.value("annotator", "") == "amy") audited = true;
  EXPECT_TRUE(audited);
}

TEST(Api, BackendOutageMapsTo503) {
  auto p = testsupport::make_persona(1);
  Rig rig({p}, {}, true);
  AnnotationService svc(*rig.hp);
  auto id = seeded_thread(rig, p);
  svc.triage_act({{"annotator_id", "amy"}, {"actions", {{{"thread_id", id}, {"verb", "interact"}}}}});
  rig.run_for(Seconds{1800});
  rig.scammer_says(PlatformId::bs_like, "rick", p.persona_id, "hello?");
  rig.run_for(Seconds{5400});
  auto c = svc.candidates(id, 2, "amy");
  EXPECT_EQ(c.status, 503);
  EXPECT_EQ(c.body["error"], "backend_unavailable");
}

TEST(ApiServerTest, HttpRoundTripWithToken) {
  auto p = testsupport::make_persona(1);
  Rig rig({p});
  AnnotationService svc(*rig.hp);
  auto id = seeded_thread(rig, p);
  api::ServerOptions opts;
  opts.port = 0;
  opts.token = "s3cret";
  api::ApiServer server(svc, opts);
  const int port = server.start();
  ASSERT_GT(port, 0);

  httplib::Client cli("127.0.0.1", port);
  auto health = cli.Get("/api/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  auto denied = cli.Get("/api/triage");
  ASSERT_TRUE(denied);
  EXPECT_EQ(denied->status, 401);
  auto wrong = cli.Get("/api/triage", {{"Authorization", "Bearer nope"}});
  EXPECT_EQ(wrong->status, 401);

  httplib::Headers auth{{"Authorization", "Bearer s3cret"}};
  auto triage = cli.Get("/api/triage", auth);
  ASSERT_TRUE(triage);
  ASSERT_EQ(triage->status, 200);
  EXPECT_EQ(json::parse(triage->body)["rows"][0]["thread_id"], id);

  auto query = cli.Get("/api/triage?token=s3cret");
  EXPECT_EQ(query->status, 200);

  json batch = {{"annotator_id", "amy"}, {"actions", {{{"thread_id", id}, {"verb", "interact"}}}}};
  auto act = cli.Post("/api/triage/act", auth, batch.dump(), "application/json");
  ASSERT_TRUE(act);
  EXPECT_EQ(act->status, 200);
  EXPECT_EQ(json::parse(act->body)["results"][0]["ok"], true);

  auto view = cli.Get("/api/conversations/" + id, auth);
  EXPECT_EQ(view->status, 200);
  EXPECT_EQ(json::parse(view->body)["state"], "triaged_active_manual");

  auto bad = cli.Post("/api/conversations/" + id + "/act", auth, "{not json", "application/json");
  EXPECT_EQ(bad->status, 400);
  auto halt = cli.Post("/api/conversations/" + id + "/act", auth,
                       json{{"verb", "halt"}, {"annotator_id", "amy"}}.dump(), "application/json");
  EXPECT_EQ(halt->status, 200);
  EXPECT_EQ(rig.hp->thread(id).state, ThreadState::halted);
  server.stop();
}

TEST(ApiServerTest, EmptyTokenIsAConfigError) {
  auto p = testsupport::make_persona(1);
  Rig rig({p});
  AnnotationService svc(*rig.hp);
  EXPECT_THROW(api::ApiServer(svc, api::ServerOptions{}), ConfigError);
}
