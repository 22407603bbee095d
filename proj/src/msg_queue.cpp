#include <chatterbox/errors.hpp>
#include <chatterbox/msg_queue.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chatterbox::queue {

using nlohmann::json;

std::string_view to_string(Approval a) {
  switch (a) {
    case Approval::not_required: return "not_required";
    case Approval::pending: return "pending";
    case Approval::granted: return "granted";
    case Approval::denied: return "denied";
  }
  return "?";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::queued: return "queued";
    case Status::dispatched: return "dispatched";
    case Status::dropped: return "dropped";
  }
  return "?";
}

std::string_view to_string(ItemKind k) {
  switch (k) {
    case ItemKind::reply: return "reply";
    case ItemKind::opener: return "opener";
    case ItemKind::selfie: return "selfie";
    case ItemKind::migration: return "migration";
  }
  return "?";
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const E (&values)[N], const char* field) {
  for (auto v : values)
    if (to_string(v) == s) return v;
  throw ParseError(field, "unknown value '" + std::string(s) + "'");
}

constexpr Approval kApprovals[] = {Approval::not_required, Approval::pending, Approval::granted,
                                   Approval::denied};
constexpr Status kStatuses[] = {Status::queued, Status::dispatched, Status::dropped};
constexpr ItemKind kKinds[] = {ItemKind::reply, ItemKind::opener, ItemKind::selfie, ItemKind::migration};
constexpr Action kActions[] = {Action::ignore,         Action::halt,
                               Action::toggle_auto,    Action::review_done,
                               Action::snooze_expired, Action::inbound_arrived,
                               Action::interact};

}  // namespace

json to_json(const QueueItem& q) {
  return {{"item_id", q.item_id},
          {"thread_id", q.thread_id},
          {"direction", q.direction == Direction::inbound ? "inbound" : "outbound"},
          {"kind", std::string(to_string(q.kind))},
          {"payload", to_json(q.payload)},
          {"platform", std::string(platform_code(q.platform))},
          {"enqueued_at", format_utc(q.enqueued_at)},
          {"dispatch_at", format_utc(q.dispatch_at)},
          {"approval", std::string(to_string(q.approval))},
          {"status", std::string(to_string(q.status))},
          {"origin", q.origin},
          {"seq", q.seq},
          {"drop_reason", q.drop_reason}};
}

QueueItem queue_item_from_json(const json& j) {
  QueueItem q;
  q.item_id = j.at("item_id").get<std::string>();
  q.thread_id = j.at("thread_id").get<std::string>();
  q.direction = j.at("direction").get<std::string>() == "inbound" ? Direction::inbound : Direction::outbound;
  q.kind = parse_enum(j.at("kind").get<std::string>(), kKinds, "kind");
  q.payload = payload_from_json(j.at("payload"));
  q.platform = parse_platform(j.at("platform").get<std::string>());
  q.enqueued_at = parse_utc(j.at("enqueued_at").get<std::string>());
  q.dispatch_at = parse_utc(j.at("dispatch_at").get<std::string>());
  q.approval = parse_enum(j.at("approval").get<std::string>(), kApprovals, "approval");
  q.status = parse_enum(j.at("status").get<std::string>(), kStatuses, "status");
  q.origin = j.at("origin").get<std::string>();
  q.seq = j.at("seq").get<std::uint64_t>();
  q.drop_reason = j.value("drop_reason", std::string{});
  return q;
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::ignore: return "ignore";
    case Action::halt: return "halt";
    case Action::toggle_auto: return "toggle_auto";
    case Action::review_done: return "review_done";
    case Action::snooze_expired: return "snooze_expired";
    case Action::inbound_arrived: return "inbound_arrived";
    case Action::interact: return "interact";
  }
  return "?";
}

Action parse_action(std::string_view s) { return parse_enum(s, kActions, "action"); }

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void illegal(const ConversationThread& t, Action a) {
  throw StateError("action " + std::string(to_string(a)) + " is not allowed in state " +
                   std::string(to_string(t.state)) + " (thread " + t.thread_id + ")");
}

void reset_review(ConversationThread& t) {
  t.scammer_msgs_since_review = 0;
  t.checkpoint_pending = false;
}

ThreadState active(ConversationThread& t, Action a, Instant now, Seconds cooldown) {
  switch (a) {
    case Action::inbound_arrived: return t.state;
    case Action::ignore:
      t.snooze_until = now + cooldown;
      reset_review(t);
      return ThreadState::snoozed;
    case Action::halt: return ThreadState::halted;
    case Action::toggle_auto:
      reset_review(t);
      return t.state == ThreadState::manual ? ThreadState::active_auto : ThreadState::manual;
    case Action::review_done:
      reset_review(t);
      return t.state;
    default: illegal(t, a);
  }
}

}  // namespace

ThreadState transition(ConversationThread& t, Action a, Instant now, Seconds cooldown) {
  ThreadState next = t.state;
  switch (t.state) {
    case ThreadState::new_thread:
      switch (a) {
        case Action::inbound_arrived: t.triage_dismissed = false; break;
        case Action::ignore: t.triage_dismissed = true; break;
        case Action::halt: next = ThreadState::halted; break;
        case Action::interact:
          if (t.triage_dismissed) illegal(t, a);
          next = ThreadState::manual;
          break;
        default: illegal(t, a);
      }
      break;
    case ThreadState::manual:
    case ThreadState::active_auto:
      next = active(t, a, now, cooldown);
      break;
    case ThreadState::awaiting_approval:
      if (a == Action::halt) next = ThreadState::halted;
      else if (a != Action::inbound_arrived) illegal(t, a);
      break;
    case ThreadState::snoozed:
      switch (a) {
        case Action::inbound_arrived:
          next = ThreadState::manual;
          t.snooze_until.reset();
          break;
        case Action::snooze_expired:
          if (!t.snooze_until || now < *t.snooze_until) illegal(t, a);
          next = ThreadState::manual;
          t.snooze_until.reset();
          break;
        case Action::ignore: t.snooze_until = now + cooldown; break;
        case Action::halt: next = ThreadState::halted; break;
        default: illegal(t, a);
      }
      break;
    case ThreadState::halted:
      if (a != Action::inbound_arrived) illegal(t, a);
      break;
  }
  if (next == ThreadState::halted) {
    t.snooze_until.reset();
    t.checkpoint_pending = false;
  }
  t.state = next;
  return next;
}

bool should_force_review(const ConversationThread& t, const std::vector<DetectionEvent>& latest,
                         int first_n_human, int checkpoint_every) {
  if (t.scammer_msgs_since_review >= checkpoint_every) return true;
  for (const auto& e : latest)
    if (e.kind == DetectionEvent::Kind::phone_number || e.kind == DetectionEvent::Kind::selfie_request)
      return true;
  return t.total_persona_turns < first_n_human;
}

void check_serialization(const ConversationThread& t, const std::vector<QueueItem>& open_items,
                         PlatformId platform) {
  for (const auto& q : open_items)
    if (q.thread_id == t.thread_id && q.direction == Direction::outbound && q.open())
      throw SerializationError("thread " + t.thread_id + " already has queued outbound item " + q.item_id);
  const auto* seg = t.segment(platform);
  if (!seg || seg->messages.empty())
    throw SerializationError("no scammer message to answer on " + std::string(platform_code(platform)));
  if (seg->messages.back().role == Role::persona)
    throw SerializationError("last message on " + std::string(platform_code(platform)) +
                             " is already the persona's");
}

// ---------------------------------------------------------------------------

DelaySampler::DelaySampler(Seconds min, Seconds max) : min_(min), max_(max) {
  if (min_.count() <= 0 || max_ < min_) throw ConfigError("delay bounds must satisfy 0 < min <= max");
}

Seconds DelaySampler::sample(std::mt19937_64& rng) const {
  if (min_ == max_) return min_;
  std::uniform_real_distribution<double> u(std::log(static_cast<double>(min_.count())),
                                           std::log(static_cast<double>(max_.count())));
  auto s = static_cast<std::int64_t>(std::llround(std::exp(u(rng))));
  return Seconds{std::clamp<std::int64_t>(s, min_.count(), max_.count())};
}

QueueItem enqueue_outbound(const ConversationThread& t, const std::vector<QueueItem>& open_items,
                           const EnqueueRequest& req, Instant now) {
  if (t.state == ThreadState::halted) throw StateError("thread " + t.thread_id + " is halted");
  if (req.delay.count() < 0) throw StateError("negative dispatch delay");
  check_serialization(t, open_items, req.platform);
  if (req.payload.media && !capability(req.platform).send_media)
    throw CapabilityViolation("media cannot be sent on " + std::string(platform_code(req.platform)));
  QueueItem q;
  q.item_id = req.item_id;
  q.thread_id = t.thread_id;
  q.direction = Direction::outbound;
  q.kind = req.kind;
  q.payload = req.payload;
  q.platform = req.platform;
  q.enqueued_at = now;
  q.dispatch_at = now + req.delay;
  q.approval = req.needs_approval ? Approval::pending : Approval::not_required;
  q.status = Status::queued;
  q.origin = req.origin;
  return q;
}

// ---------------------------------------------------------------------------

void MessageQueue::add(QueueItem item) {
  item.seq = seq_++;
  auto id = item.item_id;
  items_[id] = std::move(item);
}

QueueItem* MessageQueue::find(const std::string& item_id) {
  auto it = items_.find(item_id);
  return it == items_.end() ? nullptr : &it->second;
}

const QueueItem* MessageQueue::find(const std::string& item_id) const {
  auto it = items_.find(item_id);
  return it == items_.end() ? nullptr : &it->second;
}

std::vector<QueueItem> MessageQueue::open_for(const std::string& thread_id) const {
  std::vector<QueueItem> out;
  for (const auto& [id, q] : items_)
    if (q.thread_id == thread_id && q.open()) out.push_back(q);
  std::sort(out.begin(), out.end(), [](const QueueItem& a, const QueueItem& b) { return a.seq < b.seq; });
  return out;
}

const QueueItem* MessageQueue::pending(const std::string& thread_id, ItemKind kind) const {
  for (const auto& [id, q] : items_)
    if (q.thread_id == thread_id && q.kind == kind && q.open() && q.approval == Approval::pending)
      return &q;
  return nullptr;
}

std::vector<std::string> MessageQueue::due(Instant now) const {
  std::vector<const QueueItem*> ready;
  for (const auto& [id, q] : items_)
    if (q.dispatchable() && q.dispatch_at <= now) ready.push_back(&q);
  std::sort(ready.begin(), ready.end(), [](const QueueItem* a, const QueueItem* b) {
    return a->dispatch_at != b->dispatch_at ? a->dispatch_at < b->dispatch_at : a->seq < b->seq;
  });
  std::vector<std::string> out;
  for (const auto* q : ready) out.push_back(q->item_id);
  return out;
}

std::optional<Instant> MessageQueue::next_due() const {
  std::optional<Instant> best;
  for (const auto& [id, q] : items_)
    if (q.dispatchable() && (!best || q.dispatch_at < *best)) best = q.dispatch_at;
  return best;
}

// ---------------------------------------------------------------------------

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw ConfigError("cannot open event log " + path_.string());
}

void EventLog::append(const json& event) {
  std::lock_guard lock(mu_);
  out_ << event.dump() << '\n';
  out_.flush();
}

void EventLog::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
}

std::vector<json> EventLog::read(const std::filesystem::path& path) {
  std::vector<json> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::stringstream buf;
  buf << in.rdbuf();
  const auto data = buf.str();
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) break;  // torn final record
    auto line = data.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError("event_log:" + std::to_string(line_no), e.what());
    }
  }
  return out;
}

}  // namespace chatterbox::queue
