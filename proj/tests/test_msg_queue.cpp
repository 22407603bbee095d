#include "support.hpp"

#include <chatterbox/errors.hpp>
#include <chatterbox/msg_queue.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <random>

using namespace chatterbox;
using namespace chatterbox::queue;

namespace {

const Instant kNow = parse_utc("2025-07-07T14:00:00Z");

ConversationThread thread_in(ThreadState s) {
  ConversationThread t;
  t.thread_id = "t1";
  t.state = s;
  Segment seg;
  seg.platform = PlatformId::ts_like;
  Message m;
  m.index = 1;
  m.role = Role::scammer;
  m.text = "hi";
  seg.messages.push_back(m);
  t.segments.push_back(seg);
  return t;
}

EnqueueRequest req(const std::string& id, Seconds delay = Seconds{60}) {
  EnqueueRequest r;
  r.item_id = id;
  r.payload.text = "hello";
  r.origin = "auto";
  r.delay = delay;
  return r;
}

}  // namespace

TEST(Lifecycle, NewThreadTriage) {
  auto t = thread_in(ThreadState::new_thread);
  transition(t, Action::ignore, kNow);
  EXPECT_TRUE(t.triage_dismissed);
  EXPECT_EQ(t.state, ThreadState::new_thread);
  EXPECT_THROW(transition(t, Action::interact, kNow), StateError);
  transition(t, Action::inbound_arrived, kNow);
  EXPECT_FALSE(t.triage_dismissed);
  EXPECT_EQ(transition(t, Action::interact, kNow), ThreadState::manual);
  EXPECT_THROW(transition(t, Action::snooze_expired, kNow), StateError);
}

TEST(Lifecycle, ToggleAndReview) {
  auto t = thread_in(ThreadState::manual);
  t.scammer_msgs_since_review = 7;
  EXPECT_EQ(transition(t, Action::toggle_auto, kNow), ThreadState::active_auto);
  EXPECT_EQ(t.scammer_msgs_since_review, 0);
  t.scammer_msgs_since_review = 10;
  t.checkpoint_pending = true;
  EXPECT_EQ(transition(t, Action::review_done, kNow), ThreadState::active_auto);
  EXPECT_FALSE(t.checkpoint_pending);
  EXPECT_EQ(transition(t, Action::toggle_auto, kNow), ThreadState::manual);
  EXPECT_THROW(transition(t, Action::interact, kNow), StateError);
}

TEST(Lifecycle, IgnoreSnoozesUntilInboundOrExpiry) {
  auto t = thread_in(ThreadState::active_auto);
  EXPECT_EQ(transition(t, Action::ignore, kNow, Seconds{3600}), ThreadState::snoozed);
  ASSERT_TRUE(t.snooze_until);
  EXPECT_EQ(*t.snooze_until, kNow + Seconds{3600});
  EXPECT_THROW(transition(t, Action::snooze_expired, kNow + Seconds{10}), StateError);
  EXPECT_EQ(transition(t, Action::snooze_expired, kNow + Seconds{3600}), ThreadState::manual);

  auto u = thread_in(ThreadState::manual);
  transition(u, Action::ignore, kNow);
  EXPECT_EQ(transition(u, Action::inbound_arrived, kNow), ThreadState::manual);
  EXPECT_FALSE(u.snooze_until);
}

TEST(Lifecycle, HaltIsTerminal) {
  for (auto s : {ThreadState::new_thread, ThreadState::manual, ThreadState::active_auto,
                 ThreadState::awaiting_approval, ThreadState::snoozed}) {
    auto t = thread_in(s);
    EXPECT_EQ(transition(t, Action::halt, kNow), ThreadState::halted);
    for (auto a : {Action::ignore, Action::halt, Action::toggle_auto, Action::review_done,
                   Action::snooze_expired, Action::interact})
      EXPECT_THROW(transition(t, a, kNow), StateError);
    EXPECT_EQ(transition(t, Action::inbound_arrived, kNow), ThreadState::halted);
  }
}

TEST(Lifecycle, AwaitingApprovalOnlyAcceptsInboundAndHalt) {
  auto t = thread_in(ThreadState::awaiting_approval);
  for (auto a : {Action::ignore, Action::toggle_auto, Action::review_done, Action::interact})
    EXPECT_THROW(transition(t, a, kNow), StateError);
  EXPECT_EQ(transition(t, Action::inbound_arrived, kNow), ThreadState::awaiting_approval);
}

TEST(Lifecycle, ActionNamesRoundTrip) {
  for (auto a : {Action::ignore, Action::halt, Action::toggle_auto, Action::review_done,
                 Action::snooze_expired, Action::inbound_arrived, Action::interact})
    EXPECT_EQ(parse_action(to_string(a)), a);
}

TEST(Review, ForcedByCountDetectionsAndBootstrap) {
  auto t = thread_in(ThreadState::active_auto);
  t.total_persona_turns = 10;
  EXPECT_FALSE(should_force_review(t, {}, 10, 10));
  t.scammer_msgs_since_review = 9;
  EXPECT_FALSE(should_force_review(t, {}, 10, 10));
  t.scammer_msgs_since_review = 10;
  EXPECT_TRUE(should_force_review(t, {}, 10, 10));
  t.scammer_msgs_since_review = 0;
  DetectionEvent phone{DetectionEvent::Kind::phone_number, 0, 1, "14155550199", true};
  DetectionEvent selfie{DetectionEvent::Kind::selfie_request, 0, 1, "selfie", true};
  DetectionEvent mention{DetectionEvent::Kind::platform_mention, 0, 1, "Telegram", false};
  EXPECT_TRUE(should_force_review(t, {phone}, 10, 10));
  EXPECT_TRUE(should_force_review(t, {selfie}, 10, 10));
  EXPECT_FALSE(should_force_review(t, {mention}, 10, 10));
  t.total_persona_turns = 9;
  EXPECT_TRUE(should_force_review(t, {}, 10, 10));
}

TEST(Serialization, OneOpenItemAndNoDoubleTurn) {
  auto t = thread_in(ThreadState::active_auto);
  auto q = enqueue_outbound(t, {}, req("i1"), kNow);
  EXPECT_EQ(q.dispatch_at, kNow + Seconds{60});
  EXPECT_EQ(q.approval, Approval::not_required);
  EXPECT_THROW(enqueue_outbound(t, {q}, req("i2"), kNow), SerializationError);

  Message mine;
  mine.index = 2;
  mine.role = Role::persona;
  mine.direction = Direction::outbound;
  t.segments[0].messages.push_back(mine);
  EXPECT_THROW(enqueue_outbound(t, {}, req("i3"), kNow), SerializationError);

  auto empty = thread_in(ThreadState::manual);
  auto r = req("i4");
  r.platform = PlatformId::wa_like;
  EXPECT_THROW(enqueue_outbound(empty, {}, r, kNow), SerializationError);
}

TEST(Serialization, HaltedAndCapabilityChecks) {
  auto t = thread_in(ThreadState::halted);
  EXPECT_THROW(enqueue_outbound(t, {}, req("i1"), kNow), StateError);
  auto u = thread_in(ThreadState::manual);
  auto r = req("i2");
  r.payload.media = MediaRef{MediaKind::image, "selfie-1", {}};
  EXPECT_THROW(enqueue_outbound(u, {}, r, kNow), CapabilityViolation);
}

TEST(Delay, LogUniformWithinBounds) {
  DelaySampler s(Seconds{30}, Seconds{900});
  std::mt19937_64 rng(9);
  int below_geo_mean = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    auto d = s.sample(rng).count();
    ASSERT_GE(d, 30);
    ASSERT_LE(d, 900);
    if (d < 164) ++below_geo_mean;  // sqrt(30 * 900) ~ 164.3
  }
  // Half of a log-uniform sample falls below the geometric mean.
  EXPECT_NEAR(static_cast<double>(below_geo_mean) / n, 0.5, 0.02);
  EXPECT_THROW(DelaySampler(Seconds{0}, Seconds{10}), ConfigError);
  EXPECT_THROW(DelaySampler(Seconds{100}, Seconds{10}), ConfigError);
  EXPECT_EQ(DelaySampler(Seconds{45}, Seconds{45}).sample(rng).count(), 45);
}

TEST(Queue, DueOrderIsDispatchTimeThenFifo) {
  MessageQueue mq;
  auto mk = [](const std::string& id, const std::string& thread, Seconds at) {
    QueueItem q;
    q.item_id = id;
    q.thread_id = thread;
    q.dispatch_at = kNow + at;
    return q;
  };
  mq.add(mk("c", "t3", Seconds{10}));
  mq.add(mk("a", "t1", Seconds{5}));
  mq.add(mk("b", "t2", Seconds{10}));
  auto pending = mk("d", "t4", Seconds{1});
  pending.approval = Approval::pending;
  mq.add(pending);
  EXPECT_EQ(mq.due(kNow + Seconds{10}), (std::vector<std::string>{"a", "c", "b"}));
  EXPECT_EQ(mq.due(kNow + Seconds{6}), (std::vector<std::string>{"a"}));
  EXPECT_EQ(*mq.next_due(), kNow + Seconds{5});
  EXPECT_TRUE(mq.pending("t4", ItemKind::reply));
  mq.find("d")->approval = Approval::granted;
  EXPECT_EQ(mq.due(kNow + Seconds{1}), (std::vector<std::string>{"d"}));
  mq.find("a")->status = Status::dispatched;
  EXPECT_TRUE(mq.open_for("t1").empty());
}

TEST(Queue, ItemJsonRoundTrip) {
  QueueItem q;
  q.item_id = "item-7";
  q.thread_id = "t1";
  q.kind = ItemKind::selfie;
  q.payload = {"here you go", MediaRef{MediaKind::image, "selfie-2", {}}};
  q.platform = PlatformId::wa_like;
  q.enqueued_at = kNow;
  q.dispatch_at = kNow + Seconds{90};
  q.approval = Approval::pending;
  q.origin = "annotator:amy";
  q.seq = 4;
  EXPECT_EQ(queue_item_from_json(to_json(q)), q);
}

TEST(EventLogTest, TornTrailingRecordIsIgnored) {
  auto dir = testsupport::temp_dir("eventlog");
  auto path = dir / "events.jsonl";
  {
    EventLog log(path);
    for (int i = 0; i < 5; ++i) log.append({{"seq", i}, {"type", "audit"}});
  }
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << R"({"seq": 5, "type": "au)";
  }
  auto events = EventLog::read(path);
  ASSERT_EQ(events.size(), 5u);
  EXPECT_EQ(events.back()["seq"], 4);
  EXPECT_TRUE(EventLog::read(dir / "missing.jsonl").empty());
}
