#include <chatterbox/errors.hpp>
#include <chatterbox/runtime.hpp>

#include <algorithm>
#include <cctype>
#include <set>

namespace chatterbox {

using nlohmann::json;
using queue::Approval;
using queue::ItemKind;
using queue::QueueItem;
using queue::Status;

namespace {

constexpr AnnotatorAction::Verb kVerbs[] = {
    AnnotatorAction::Verb::ignore,         AnnotatorAction::Verb::interact,
    AnnotatorAction::Verb::toggle_auto,    AnnotatorAction::Verb::regenerate,
    AnnotatorAction::Verb::submit,         AnnotatorAction::Verb::approve_selfie,
    AnnotatorAction::Verb::approve_migration, AnnotatorAction::Verb::deny,
    AnnotatorAction::Verb::snooze,         AnnotatorAction::Verb::halt,
};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::uint64_t id_number(const std::string& id) {
  auto dash = id.rfind('-');
  if (dash == std::string::npos) return 0;
  try {
    return std::stoull(id.substr(dash + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

std::string pad(std::uint64_t n, int width) {
  auto s = std::to_string(n);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

std::string thread_key(const std::string& persona_id, PlatformId p, const std::string& handle) {
  return persona_id + "|" + std::string(platform_code(p)) + "|" + handle;
}

std::string cursor_key(PlatformId p, const std::string& account) {
  return std::string(platform_code(p)) + "|" + account;
}

json seed_json(const poll::SeedAction& a) {
  return {{"account", a.account_id},
          {"platform", std::string(platform_code(a.platform))},
          {"kind", std::string(poll::to_string(a.kind))},
          {"target", a.target},
          {"at", format_utc(a.at)}};
}

poll::SeedKind parse_seed_kind(const std::string& s) {
  for (auto k : {poll::SeedKind::like, poll::SeedKind::repost, poll::SeedKind::follow_suggested,
                 poll::SeedKind::join_group})
    if (poll::to_string(k) == s) return k;
  throw ParseError("kind", "unknown seed kind " + s);
}

}  // namespace

std::string_view to_string(AnnotatorAction::Verb v) {
  switch (v) {
    case AnnotatorAction::Verb::ignore: return "ignore";
    case AnnotatorAction::Verb::interact: return "interact";
    case AnnotatorAction::Verb::toggle_auto: return "toggle_auto";
    case AnnotatorAction::Verb::regenerate: return "regenerate";
    case AnnotatorAction::Verb::submit: return "submit";
    case AnnotatorAction::Verb::approve_selfie: return "approve_selfie";
    case AnnotatorAction::Verb::approve_migration: return "approve_migration";
    case AnnotatorAction::Verb::deny: return "deny";
    case AnnotatorAction::Verb::snooze: return "snooze";
    case AnnotatorAction::Verb::halt: return "halt";
  }
  return "?";
}

AnnotatorAction::Verb parse_verb(std::string_view s) {
  for (auto v : kVerbs)
    if (to_string(v) == s) return v;
  throw ParseError("verb", "unknown verb '" + std::string(s) + "'");
}

AnnotatorAction annotator_action_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("action", "expected an object");
  AnnotatorAction a;
  auto str = [&](const char* key, std::string& out, bool required) {
    if (!j.contains(key)) {
      if (required) throw ParseError(key, "missing");
      return;
    }
    if (!j.at(key).is_string()) throw ParseError(key, "expected a string");
    out = j.at(key).get<std::string>();
  };
  std::string verb;
  str("verb", verb, true);
  a.verb = parse_verb(verb);
  str("annotator_id", a.annotator_id, true);
  str("thread_id", a.thread_id, false);
  str("text", a.text, false);
  str("asset_id", a.asset_id, false);
  if (j.contains("opener_index")) {
    if (!j.at("opener_index").is_number_integer()) throw ParseError("opener_index", "expected an integer");
    a.opener_index = j.at("opener_index").get<int>();
  }
  if (j.contains("template_index") && !j.at("template_index").is_null()) {
    if (!j.at("template_index").is_number_integer()) throw ParseError("template_index", "expected an integer");
    a.template_index = j.at("template_index").get<int>();
  }
  if (j.contains("snooze_for") && !j.at("snooze_for").is_null()) {
    const auto& v = j.at("snooze_for");
    if (v.is_number_integer()) a.snooze_for = Seconds{v.get<std::int64_t>()};
    else if (v.is_string()) a.snooze_for = parse_duration(v.get<std::string>());
    else throw ParseError("snooze_for", "expected seconds or a duration string");
  }
  if (j.contains("expected_version") && !j.at("expected_version").is_null()) {
    if (!j.at("expected_version").is_number_unsigned() && !j.at("expected_version").is_number_integer())
      throw ParseError("expected_version", "expected an integer");
    a.expected_version = j.at("expected_version").get<std::uint64_t>();
  }
  return a;
}

json to_json(const TriageRow& r) {
  json msgs = json::array();
  for (const auto& m : r.inbound) msgs.push_back({{"text", m.text}, {"at", m.at}, {"at_local", m.at_local}});
  return {{"thread_id", r.thread_id},
          {"persona_id", r.persona_id},
          {"persona_name", r.persona_name},
          {"platform", std::string(platform_code(r.platform))},
          {"platform_name", std::string(display_name(r.platform))},
          {"inbound", msgs},
          {"sender_username", r.sender_username},
          {"sender_profile_thumbnail", r.sender_profile_thumbnail},
          {"version", r.version}};
}

json to_json(const TriageResult& r) {
  json j = {{"thread_id", r.thread_id}, {"ok", r.ok}};
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (!r.item_id.empty()) j["item_id"] = r.item_id;
  if (r.dispatch_at) j["dispatch_at"] = format_utc(*r.dispatch_at);
  return j;
}

json to_json(const ThreadSummary& s) {
  json plats = json::array();
  for (auto p : s.platforms) plats.push_back(std::string(platform_code(p)));
  return {{"thread_id", s.thread_id},
          {"persona_id", s.persona_id},
          {"state", std::string(to_string(s.state))},
          {"platforms", plats},
          {"message_count", s.message_count},
          {"needs_review", s.needs_review},
          {"pending", s.pending},
          {"scammer_msgs_since_review", s.scammer_msgs_since_review},
          {"next_checkpoint_in", s.next_checkpoint_in},
          {"version", s.version},
          {"last_activity", format_utc(s.last_activity)}};
}

json to_json(const ActResult& r) {
  json cands = json::array();
  for (const auto& c : r.candidates) cands.push_back({{"text", c.text}, {"attempt", c.attempt}});
  return {{"thread_id", r.thread_id},
          {"state", std::string(to_string(r.state))},
          {"version", r.version},
          {"item_ids", r.item_ids},
          {"candidates", cands}};
}

// ---------------------------------------------------------------------------

Honeypot::Honeypot(const Clock& clock, PlatformSet& platforms, std::vector<persona::Persona> personas,
                   persona::PolicyLibrary policies, migration::AccountPool pool,
                   prompt::DialogueBackend& dialogue, caption::Captioner& captioner,
                   RuntimeOptions opts)
    : clock_(clock),
      platforms_(platforms),
      personas_(std::move(personas)),
      policies_(std::move(policies)),
      pool_(std::move(pool)),
      dialogue_(dialogue),
      captioner_(captioner),
      opts_(std::move(opts)),
      sampler_(opts_.delay_min, opts_.delay_max),
      rng_(opts_.seed) {
  std::map<std::string, int> used;
  for (std::size_t i = 0; i < personas_.size(); ++i) {
    const auto& p = personas_[i];
    if (!persona_index_.emplace(p.persona_id, i).second)
      throw ConfigError("duplicate persona_id " + p.persona_id);
    auto handle = lower(p.first_name + "." + p.last_name);
    if (int n = used[handle]++; n > 0) handle += std::to_string(n + 1);
    origin_handles_[p.persona_id] = handle;
  }
  if (opts_.openers.empty()) throw ConfigError("at least one triage opener is required");
}

void Honeypot::provision() {
  std::lock_guard lock(mu_);
  const auto now = clock_.now();
  std::uniform_real_distribution<double> stagger(0.0, static_cast<double>(opts_.poll.base_interval.count()));
  for (const auto& p : personas_) {
    const auto& handle = origin_handles_.at(p.persona_id);
    for (auto plat : kOriginPlatforms) {
      auto& sp = platforms_.get(plat);
      AccountMetadata meta;
      meta.username = handle;
      if (!p.selfie_assets.empty()) meta.thumbnail = p.selfie_assets.front();
      if (!sp.has_account(handle)) sp.register_account(handle, meta);
      sp.authenticate(handle);
      PollerEntry e;
      e.persona_id = p.persona_id;
      e.state.account_id = handle;
      e.state.platform = plat;
      e.state.timezone = p.timezone;
      e.state.next_poll = now + Seconds{static_cast<std::int64_t>(stagger(rng_))};
      if (auto it = cursors_.find(cursor_key(plat, handle)); it != cursors_.end()) e.state.cursor = it->second;
      pollers_.push_back(std::move(e));
    }
  }
  auto& wa = platforms_.get(PlatformId::wa_like);
  for (const auto& acct : pool_.accounts()) {
    AccountMetadata meta;
    meta.username = acct.display_name;
    if (!wa.has_account(acct.phone)) wa.register_account(acct.phone, meta);
    wa.authenticate(acct.phone);
    wa.subscribe(acct.phone, [this](PlatformId plat, const Notification& n) { on_webhook(plat, n); });
  }
}

void Honeypot::attach_log(queue::EventLog* log) {
  std::lock_guard lock(mu_);
  log_ = log;
}

void Honeypot::set_observer(std::function<void(const json&)> fn) {
  std::lock_guard lock(mu_);
  observer_ = std::move(fn);
}

void Honeypot::replay(const std::vector<json>& events) {
  std::lock_guard lock(mu_);
  for (const auto& e : events) apply(e);
}

std::uint64_t Honeypot::events_emitted() const {
  std::lock_guard lock(mu_);
  return event_seq_;
}

void Honeypot::emit(json event) {
  event["seq"] = event_seq_;
  if (!event.contains("at")) event["at"] = format_utc(clock_.now());
  if (log_) log_->append(event);
  apply(event);
  if (observer_) observer_(event);
}

ConversationThread& Honeypot::thread_ref(const std::string& id) {
  auto it = threads_.find(id);
  if (it == threads_.end()) throw NotFound("unknown thread " + id);
  return it->second;
}

const ConversationThread& Honeypot::thread_cref(const std::string& id) const {
  auto it = threads_.find(id);
  if (it == threads_.end()) throw NotFound("unknown thread " + id);
  return it->second;
}

const persona::Persona& Honeypot::persona(const std::string& persona_id) const {
  auto it = persona_index_.find(persona_id);
  if (it == persona_index_.end()) throw NotFound("unknown persona " + persona_id);
  return personas_[it->second];
}

const persona::Persona& Honeypot::persona_for(const ConversationThread& t) const {
  return persona(t.persona_id);
}

const migration::AccountPool& Honeypot::pool() const { return pool_; }

std::string Honeypot::origin_handle(const std::string& persona_id) const {
  auto it = origin_handles_.find(persona_id);
  if (it == origin_handles_.end()) throw NotFound("unknown persona " + persona_id);
  return it->second;
}

std::optional<std::string> Honeypot::find_thread(const std::string& persona_id, PlatformId platform,
                                                 const std::string& scammer_handle) const {
  std::lock_guard lock(mu_);
  auto it = thread_index_.find(thread_key(persona_id, platform, scammer_handle));
  if (it == thread_index_.end()) return std::nullopt;
  return it->second;
}

std::string Honeypot::new_item_id() { return "q-" + pad(next_item_++, 6); }
std::string Honeypot::new_thread_id() { return "th-" + pad(next_thread_++, 4); }

// ---------------------------------------------------------------------------
// Event application. Deterministic in (current state, event).

void Honeypot::apply(const json& e) {
  const auto type = e.at("type").get<std::string>();
  event_seq_ = std::max(event_seq_, e.value("seq", std::uint64_t{0}) + 1);
  const Instant at = parse_utc(e.at("at").get<std::string>());
  auto note_item = [&](const std::string& id) { next_item_ = std::max(next_item_, id_number(id) + 1); };
  auto drop_all = [&](const std::string& thread_id, const std::string& reason) {
    for (const auto& q : queue_.open_for(thread_id)) {
      auto* item = queue_.find(q.item_id);
      item->status = Status::dropped;
      item->drop_reason = reason;
    }
  };

  if (type == "thread_opened") {
    ConversationThread t;
    t.thread_id = e.at("thread_id").get<std::string>();
    t.persona_id = e.at("persona_id").get<std::string>();
    t.origin_platform = parse_platform(e.at("platform").get<std::string>());
    t.origin_account = e.at("account").get<std::string>();
    const auto scammer = e.at("scammer").get<std::string>();
    t.scammer_handles[t.origin_platform] = scammer;
    if (e.contains("sender")) t.sender = account_metadata_from_json(e.at("sender"));
    Segment seg;
    seg.platform = t.origin_platform;
    seg.scammer_handle = scammer;
    seg.honeypot_account = t.origin_account;
    t.segments.push_back(std::move(seg));
    t.opened_at = at;
    t.last_activity = at;
    thread_index_[thread_key(t.persona_id, t.origin_platform, scammer)] = t.thread_id;
    next_thread_ = std::max(next_thread_, id_number(t.thread_id) + 1);
    threads_[t.thread_id] = std::move(t);
  } else if (type == "inbound") {
    auto& t = thread_ref(e.at("thread_id").get<std::string>());
    auto m = message_from_json(e.at("message"));
    auto* seg = t.segment(m.platform);
    if (!seg) {
      Segment s;
      s.platform = m.platform;
      s.scammer_handle = t.scammer_handles.count(m.platform) ? t.scammer_handles.at(m.platform) : "";
      s.honeypot_account = e.value("account", std::string{});
      t.segments.push_back(std::move(s));
      seg = &t.segments.back();
    }
    seg->messages.push_back(m);
    ++t.total_scammer_turns;
    t.last_activity = m.at;
    if (e.contains("sender")) t.sender = account_metadata_from_json(e.at("sender"));
    queue::transition(t, queue::Action::inbound_arrived, at, opts_.ignore_cooldown);
    if (t.state != ThreadState::halted) ++t.scammer_msgs_since_review;
  } else if (type == "migration_request") {
    auto& t = thread_ref(e.at("thread_id").get<std::string>());
    const auto item_id = e.at("item_id").get<std::string>();
    note_item(item_id);
    DetectionEvent d{DetectionEvent::Kind::phone_number, 0, 0, e.at("number").get<std::string>(), true};
    auto outcome = migration::handle_migration_request(t, d, pool_, persona_for(t), item_id);
    if (outcome == migration::Outcome::collision_halt) {
      drop_all(t.thread_id, "thread halted: " + t.halt_reason);
    } else if (t.pending_migration && !queue_.find(t.pending_migration->item_id)) {
      QueueItem q;
      q.item_id = t.pending_migration->item_id;
      q.thread_id = t.thread_id;
      q.kind = ItemKind::migration;
      q.platform = PlatformId::wa_like;
      q.enqueued_at = at;
      q.dispatch_at = at;
      q.approval = Approval::pending;
      q.origin = "system";
      queue_.add(q);
    }
  } else if (type == "selfie_request") {
    auto& t = thread_ref(e.at("thread_id").get<std::string>());
    const auto item_id = e.at("item_id").get<std::string>();
    note_item(item_id);
    if (t.state != ThreadState::awaiting_approval) t.resume_state = t.state;
    t.state = ThreadState::awaiting_approval;
    t.pending_selfie_item = item_id;
    QueueItem q;
    q.item_id = item_id;
    q.thread_id = t.thread_id;
    q.kind = ItemKind::selfie;
    q.platform = parse_platform(e.at("platform").get<std::string>());
    q.enqueued_at = at;
    q.dispatch_at = at;
    q.approval = Approval::pending;
    q.origin = "system";
    queue_.add(q);
  } else if (type == "checkpoint") {
    thread_ref(e.at("thread_id").get<std::string>()).checkpoint_pending = true;
  } else if (type == "review") {
    auto& t = thread_ref(e.at("thread_id").get<std::string>());
    t.scammer_msgs_since_review = 0;
    t.checkpoint_pending = false;
  } else if (type == "enqueue") {
    auto q = queue::queue_item_from_json(e.at("item"));
    note_item(q.item_id);
    queue_.add(std::move(q));
  } else if (type == "dropped") {
    if (auto* q = queue_.find(e.at("item_id").get<std::string>())) {
      q->status = Status::dropped;
      q->drop_reason = e.value("reason", std::string{});
    }
  } else if (type == "dispatched") {
    auto& t = thread_ref(e.at("thread_id").get<std::string>());
    auto* q = queue_.find(e.at("item_id").get<std::string>());
    if (!q) throw ParseError("item_id", "dispatched event for unknown item");
    q->status = Status::dispatched;
    auto m = message_from_json(e.at("message"));
    auto* seg = t.segment(m.platform);
    if (!seg) throw ParseError("message.platform", "dispatch to a platform without a segment");
    seg->messages.push_back(m);
    ++t.total_persona_turns;
    t.last_activity = m.at;
  } else if (type == "selfie_decision") {
    auto& t = thread_ref(e.at("thread_id").get<std::string>());
    auto* q = queue_.find(e.at("item_id").get<std::string>());
    if (!q) throw ParseError("item_id", "selfie decision for unknown item");
    if (e.at("granted").get<bool>()) {
      q->approval = Approval::granted;
      q->payload.text = e.value("text", std::string{});
      q->payload.media = MediaRef{MediaKind::image, e.at("asset").get<std::string>(), {}};
      q->dispatch_at = parse_utc(e.at("dispatch_at").get<std::string>());
      q->origin = "annotator:" + e.value("annotator", std::string{});
    } else {
      q->approval = Approval::denied;
      q->status = Status::dropped;
      q->drop_reason = "denied";
    }
    t.pending_selfie_item.reset();
    t.state = t.resume_state;
  } else if (type == "migration_approved") {
    auto& t = thread_ref(e.at("thread_id").get<std::string>());
    auto* q = queue_.find(e.at("item_id").get<std::string>());
    auto msg = migration::execute_migration(t, pool_, persona_for(t), e.at("annotator").get<std::string>(),
                                            e.at("template_index").get<int>(), at);
    if (q) {
      q->approval = Approval::granted;
      if (msg) {
        q->status = Status::dispatched;
        q->payload.text = msg->text;
      } else {
        q->status = Status::dropped;
        q->drop_reason = "identity collision";
      }
    }
    if (!msg) drop_all(t.thread_id, "thread halted: " + t.halt_reason);
  } else if (type == "migration_denied") {
    auto& t = thread_ref(e.at("thread_id").get<std::string>());
    migration::deny_migration(t);
    if (auto* q = queue_.find(e.at("item_id").get<std::string>())) {
      q->approval = Approval::denied;
      q->status = Status::dropped;
      q->drop_reason = "denied";
    }
  } else if (type == "transition") {
    auto& t = thread_ref(e.at("thread_id").get<std::string>());
    const auto action = queue::parse_action(e.at("action").get<std::string>());
    const Seconds cooldown{e.value("cooldown_s", opts_.ignore_cooldown.count())};
    queue::transition(t, action, at, cooldown);
    if (action == queue::Action::interact) {
      t.scammer_msgs_since_review = 0;
      t.checkpoint_pending = false;
    }
    if (t.state == ThreadState::halted) {
      if (t.halt_reason.empty()) t.halt_reason = e.value("reason", std::string("halted by annotator"));
      drop_all(t.thread_id, "thread halted");
    } else if (t.state == ThreadState::snoozed) {
      drop_all(t.thread_id, "thread snoozed");
    }
  } else if (type == "audit") {
    audit_.push_back(e.at("entry"));
  } else if (type == "follow_back") {
    follow_backs_.restore(parse_platform(e.at("platform").get<std::string>()),
                          e.at("account").get<std::string>(), e.at("follower").get<std::string>());
  } else if (type == "seed") {
    poll::SeedAction a;
    a.account_id = e.at("account").get<std::string>();
    a.platform = parse_platform(e.at("platform").get<std::string>());
    a.kind = parse_seed_kind(e.at("kind").get<std::string>());
    a.target = e.at("target").get<std::string>();
    a.at = at;
    seeds_.push_back(a);
  } else if (type == "social") {
    social_inbound_.push_back({{"kind", e.at("kind")},
                               {"platform", e.at("platform")},
                               {"account", e.at("account")},
                               {"from", e.at("from")},
                               {"at", e.at("at")}});
  } else if (type == "cursor") {
    const auto plat = parse_platform(e.at("platform").get<std::string>());
    const auto account = e.at("account").get<std::string>();
    const auto c = e.at("cursor").get<std::uint64_t>();
    cursors_[cursor_key(plat, account)] = c;
    for (auto& p : pollers_)
      if (p.state.platform == plat && p.state.account_id == account) p.state.cursor = c;
  } else {
    throw ParseError("type", "unknown event type '" + type + "'");
  }

  if (e.contains("thread_id") && type != "audit") {
    auto it = threads_.find(e.at("thread_id").get<std::string>());
    if (it != threads_.end()) ++it->second.version;
  }
}

// ---------------------------------------------------------------------------
// Scheduling

std::optional<Instant> Honeypot::next_wakeup() const {
  std::lock_guard lock(mu_);
  std::optional<Instant> best;
  auto consider = [&](Instant t) {
    if (!best || t < *best) best = t;
  };
  for (const auto& p : pollers_) consider(p.state.next_poll);
  for (const auto& [id, q] : queue_.items()) {
    if (!q.dispatchable()) continue;
    auto it = threads_.find(q.thread_id);
    if (it != threads_.end() && it->second.state == ThreadState::awaiting_approval) continue;
    consider(q.dispatch_at);
  }
  for (const auto& [id, t] : threads_)
    if (t.state == ThreadState::snoozed && t.snooze_until) consider(*t.snooze_until);
  return best;
}

void Honeypot::step() {
  std::lock_guard lock(mu_);
  const auto now = clock_.now();

  std::vector<std::string> expired;
  for (const auto& [id, t] : threads_)
    if (t.state == ThreadState::snoozed && t.snooze_until && *t.snooze_until <= now) expired.push_back(id);
  for (const auto& id : expired)
    emit({{"type", "transition"}, {"thread_id", id}, {"action", "snooze_expired"}});

  for (auto& p : pollers_)
    if (p.state.next_poll <= now) poll_account(p, now);

  for (const auto& id : queue_.due(now)) {
    const auto* q = queue_.find(id);
    if (!q || !q->dispatchable()) continue;
    dispatch(id, now);
  }
}

void Honeypot::run_until(SimClock& clock, Instant until, const std::function<void()>& after_step) {
  for (;;) {
    auto next = next_wakeup();
    if (!next || *next > until) break;
    clock.advance_to(*next);
    step();
    if (after_step) after_step();
  }
  clock.advance_to(until);
}

// ---------------------------------------------------------------------------
// Polling and inbound processing

void Honeypot::poll_account(PollerEntry& p, Instant now) {
  auto& plat = platforms_.get(p.state.platform);
  const auto& account = p.state.account_id;
  NotificationBatch batch;
  try {
    batch = plat.fetch_notifications(account, p.state.cursor);
  } catch (const AuthExpired&) {
    plat.authenticate(account);
    batch = plat.fetch_notifications(account, p.state.cursor);
  }

  for (const auto& n : batch.events) {
    std::optional<AccountMetadata> meta;
    if (auto it = batch.accounts.find(n.from); it != batch.accounts.end()) meta = it->second;
    switch (n.kind) {
      case Notification::Kind::message:
        handle_inbound(p.state.platform, account, n.from, n.payload, n.at, meta);
        break;
      case Notification::Kind::follow: {
        emit({{"type", "social"}, {"kind", "follow"}, {"platform", std::string(platform_code(p.state.platform))},
              {"account", account}, {"from", n.from}});
        if (!follow_backs_.followed_back(p.state.platform, account, n.from)) {
          emit({{"type", "follow_back"}, {"platform", std::string(platform_code(p.state.platform))},
                {"account", account}, {"follower", n.from}});
          plat.follow(account, n.from);
        }
        break;
      }
      case Notification::Kind::group_join:
        emit({{"type", "social"}, {"kind", "group_join"}, {"platform", std::string(platform_code(p.state.platform))},
              {"account", account}, {"from", n.from}});
        break;
    }
  }
  if (batch.cursor != p.state.cursor)
    emit({{"type", "cursor"}, {"platform", std::string(platform_code(p.state.platform))},
          {"account", account}, {"cursor", batch.cursor}});

  poll::record_poll(p.state, !batch.events.empty());
  p.state.last_poll = now;
  const auto local = to_local(now, p.state.timezone);
  p.state.next_poll = now + poll::next_poll_delay(p.state, opts_.poll, local, rng_);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  poll::SeedContext ctx{plat.trending(), plat.suggested(), plat.groups()};
  if (auto action = poll::maybe_seed(u(rng_), opts_.poll.p_seed, p.state.platform, ctx, rng_)) {
    try {
      switch (action->kind) {
        case poll::SeedKind::like: plat.like(account, action->target); break;
        case poll::SeedKind::repost: plat.repost(account, action->target); break;
        case poll::SeedKind::follow_suggested: plat.follow(account, action->target); break;
        case poll::SeedKind::join_group: plat.join_group(account, action->target); break;
      }
      emit({{"type", "seed"}, {"platform", std::string(platform_code(p.state.platform))},
            {"account", account}, {"kind", std::string(poll::to_string(action->kind))},
            {"target", action->target}});
    } catch (const Error&) {
      // A rejected seeding action is not retried; the next poll may seed again.
    }
  }
}

void Honeypot::on_webhook(PlatformId platform, const Notification& n) {
  if (n.kind != Notification::Kind::message) return;
  std::lock_guard lock(mu_);
  handle_inbound(platform, n.to, n.from, n.payload, n.at, std::nullopt);
}

void Honeypot::handle_inbound(PlatformId platform, const std::string& honeypot_account,
                              const std::string& from, const Payload& payload, Instant at,
                              const std::optional<AccountMetadata>& sender) {
  std::string thread_id;
  if (platform == PlatformId::wa_like) {
    auto route = pool_.route(honeypot_account, canonical_phone(from));
    if (!route) {
      emit({{"type", "audit"},
            {"entry", {{"kind", "unrouted_inbound"}, {"platform", std::string(platform_code(platform))},
                       {"account", honeypot_account}, {"from", from}, {"at", format_utc(at)}}}});
      return;
    }
    thread_id = route->thread_id;
  } else {
    std::string persona_id;
    for (const auto& [pid, handle] : origin_handles_)
      if (handle == honeypot_account) persona_id = pid;
    if (persona_id.empty()) return;
    auto it = thread_index_.find(thread_key(persona_id, platform, from));
    if (it != thread_index_.end()) {
      thread_id = it->second;
    } else {
      thread_id = new_thread_id();
      json ev = {{"type", "thread_opened"},
                 {"thread_id", thread_id},
                 {"persona_id", persona_id},
                 {"platform", std::string(platform_code(platform))},
                 {"account", honeypot_account},
                 {"scammer", from}};
      if (sender) ev["sender"] = to_json(*sender);
      emit(ev);
    }
  }

  const auto& t = thread_cref(thread_id);
  const auto& p = persona_for(t);
  Message m;
  m.index = t.message_count() + 1;
  m.direction = Direction::inbound;
  m.role = Role::scammer;
  m.platform = platform;
  m.at = at;
  m.at_local = format_local_iso(at, p.timezone);
  m.text = payload.text;
  if (payload.media) m.media = caption::caption(*payload.media, captioner_);
  m.detections = prompt::detect_special(m.text);
  m.origin = "scammer";

  json ev = {{"type", "inbound"}, {"thread_id", thread_id}, {"account", honeypot_account},
             {"message", to_json(m)}};
  if (sender) ev["sender"] = to_json(*sender);
  emit(ev);
  react_to_inbound(thread_id, m);
}

void Honeypot::drop_open_items(const std::string& thread_id, const std::string& reason,
                               bool keep_approvals) {
  for (const auto& q : queue_.open_for(thread_id)) {
    if (keep_approvals && q.approval == Approval::pending) continue;
    emit({{"type", "dropped"}, {"thread_id", thread_id}, {"item_id", q.item_id}, {"reason", reason}});
  }
}

void Honeypot::react_to_inbound(const std::string& thread_id, const Message& m) {
  const auto& t = thread_cref(thread_id);
  if (t.state == ThreadState::new_thread || t.state == ThreadState::halted) return;

  const DetectionEvent* phone = nullptr;
  bool selfie = false;
  for (const auto& d : m.detections) {
    if (d.kind == DetectionEvent::Kind::phone_number) phone = &d;
    if (d.kind == DetectionEvent::Kind::selfie_request) selfie = true;
  }

  if (phone && is_origin(m.platform) && !t.migration) {
    drop_open_items(thread_id, "superseded by migration request", true);
    emit({{"type", "migration_request"}, {"thread_id", thread_id}, {"number", phone->value},
          {"item_id", t.pending_migration ? t.pending_migration->item_id : new_item_id()}});
    return;
  }
  if (selfie && capability(m.platform).send_media && !t.pending_selfie_item &&
      t.state != ThreadState::awaiting_approval) {
    drop_open_items(thread_id, "superseded by selfie request", true);
    emit({{"type", "selfie_request"}, {"thread_id", thread_id}, {"item_id", new_item_id()},
          {"platform", std::string(platform_code(m.platform))}});
    return;
  }
  if (t.state != ThreadState::active_auto) return;

  // A queued automatic reply that has not gone out yet is regenerated with the new message.
  for (const auto& q : queue_.open_for(thread_id))
    if (q.origin == "auto" && q.approval == Approval::not_required)
      emit({{"type", "dropped"}, {"thread_id", thread_id}, {"item_id", q.item_id}, {"reason", "superseded"}});

  const auto& cur = thread_cref(thread_id);
  if (cur.checkpoint_pending) return;
  if (queue::should_force_review(cur, m.detections, opts_.first_n_human, opts_.checkpoint_every)) {
    std::string reason = cur.scammer_msgs_since_review >= opts_.checkpoint_every ? "counter"
                         : prompt::has_sensitive_event(m.detections)             ? "sensitive_event"
                                                                                 : "bootstrap";
    emit({{"type", "checkpoint"}, {"thread_id", thread_id}, {"reason", reason}});
    return;
  }
  auto_reply(thread_id);
}

PlatformId Honeypot::reply_platform(const ConversationThread& t) const {
  if (const auto* m = t.last_inbound()) return m->platform;
  return t.origin_platform;
}

prompt::ResponseContext Honeypot::response_context(const ConversationThread& t, Instant now) const {
  prompt::ResponseContext ctx;
  ctx.thread = &t;
  ctx.persona = &persona_for(t);
  ctx.policies = &policies_;
  ctx.platform = reply_platform(t);
  ctx.now = now;
  return ctx;
}

std::string Honeypot::enqueue_reply(const ConversationThread& t, ItemKind kind, Payload payload,
                                    const std::string& origin) {
  queue::EnqueueRequest req;
  req.item_id = new_item_id();
  req.kind = kind;
  req.payload = std::move(payload);
  req.platform = reply_platform(t);
  req.origin = origin;
  req.delay = sampler_.sample(rng_);
  auto item = queue::enqueue_outbound(t, queue_.open_for(t.thread_id), req, clock_.now());
  emit({{"type", "enqueue"}, {"thread_id", t.thread_id}, {"item", queue::to_json(item)}});
  return item.item_id;
}

void Honeypot::auto_reply(const std::string& thread_id) {
  const auto& t = thread_cref(thread_id);
  if (t.state != ThreadState::active_auto || t.checkpoint_pending) return;
  if (!queue_.open_for(thread_id).empty()) return;
  try {
    queue::check_serialization(t, {}, reply_platform(t));
  } catch (const SerializationError&) {
    return;
  }
  prompt::ResponseCandidate cand;
  try {
    cand = prompt::generate_response(response_context(t, clock_.now()), dialogue_, opts_.max_retries);
  } catch (const ValidationExhausted&) {
    emit({{"type", "checkpoint"}, {"thread_id", thread_id}, {"reason", "validation_exhausted"}});
    return;
  } catch (const BackendUnavailable&) {
    emit({{"type", "checkpoint"}, {"thread_id", thread_id}, {"reason", "backend_unavailable"}});
    return;
  }
  enqueue_reply(t, ItemKind::reply, Payload{cand.text, std::nullopt}, "auto");
}

bool Honeypot::contains_own_number(const ConversationThread& t, const std::string& text) const {
  std::set<std::string> own;
  for (const auto& ph : pool_.phones()) own.insert(canonical_phone(ph));
  if (const auto& p = persona_for(t); p.phone) own.insert(canonical_phone(*p.phone));
  for (const auto& m : prompt::find_phone_numbers(text))
    if (own.count(m.digits)) return true;
  // Also catch numbers split by unusual punctuation.
  const auto digits = normalize_digits(text);
  for (const auto& o : own)
    if (o.size() >= 10 && digits.find(o.substr(o.size() - 10)) != std::string::npos) return true;
  return false;
}

void Honeypot::dispatch(const std::string& item_id, Instant now) {
  const QueueItem q = *queue_.find(item_id);
  const auto& t = thread_cref(q.thread_id);
  auto drop = [&](const std::string& reason) {
    emit({{"type", "dropped"}, {"thread_id", q.thread_id}, {"item_id", item_id}, {"reason", reason}});
  };
  if (t.state == ThreadState::halted) return drop("thread halted");
  if (t.state == ThreadState::awaiting_approval) return;
  if (contains_own_number(t, q.payload.text)) return drop("own number in outbound text");
  const auto* seg = t.segment(q.platform);
  if (!seg) return drop("no segment on " + std::string(platform_code(q.platform)));

  auto& plat = platforms_.get(q.platform);
  DeliveryReceipt receipt;
  try {
    try {
      receipt = plat.send_message(seg->honeypot_account, seg->scammer_handle, q.payload);
    } catch (const AuthExpired&) {
      plat.authenticate(seg->honeypot_account);
      receipt = plat.send_message(seg->honeypot_account, seg->scammer_handle, q.payload);
    }
  } catch (const CapabilityViolation& e) {
    return drop(std::string("capability violation: ") + e.what());
  } catch (const DeliveryError& e) {
    return drop(std::string("delivery failed: ") + e.what());
  }

  Message m;
  m.index = t.message_count() + 1;
  m.direction = Direction::outbound;
  m.role = Role::persona;
  m.platform = q.platform;
  m.at = receipt.server_time == Instant{} ? now : receipt.server_time;
  m.at_local = format_local_iso(m.at, persona_for(t).timezone);
  m.text = q.payload.text;
  if (q.payload.media) m.sent_asset = q.payload.media->asset_ref;
  m.origin = q.origin;
  emit({{"type", "dispatched"}, {"thread_id", q.thread_id}, {"item_id", item_id}, {"message", to_json(m)}});
}

void Honeypot::send_reintro(const std::string& thread_id) {
  const auto& t = thread_cref(thread_id);
  if (!t.migration) return;
  const auto* seg = t.segment(PlatformId::wa_like);
  if (!seg || seg->messages.empty()) return;
  const auto& reintro = seg->messages.front();
  auto& wa = platforms_.get(PlatformId::wa_like);
  try {
    try {
      wa.send_message(seg->honeypot_account, seg->scammer_handle, Payload{reintro.text, std::nullopt});
    } catch (const AuthExpired&) {
      wa.authenticate(seg->honeypot_account);
      wa.send_message(seg->honeypot_account, seg->scammer_handle, Payload{reintro.text, std::nullopt});
    }
  } catch (const Error& e) {
    emit({{"type", "audit"},
          {"thread_id", thread_id},
          {"entry", {{"kind", "reintro_delivery_failed"}, {"thread_id", thread_id}, {"detail", e.what()}}}});
  }
}

// ---------------------------------------------------------------------------
// Annotation

bool Honeypot::needs_review_locked(const ConversationThread& t) const {
  if (t.state == ThreadState::awaiting_approval || t.checkpoint_pending) return true;
  if (t.state != ThreadState::manual && t.state != ThreadState::active_auto) return false;
  const auto* last = t.last_message();
  if (!last || last->role != Role::scammer) return false;
  if (!queue_.open_for(t.thread_id).empty()) return false;
  return t.state == ThreadState::manual;
}

bool Honeypot::needs_review(const std::string& thread_id) const {
  std::lock_guard lock(mu_);
  return needs_review_locked(thread_cref(thread_id));
}

std::vector<TriageRow> Honeypot::list_triage() const {
  std::lock_guard lock(mu_);
  std::vector<const ConversationThread*> rows;
  for (const auto& [id, t] : threads_)
    if (t.state == ThreadState::new_thread && !t.triage_dismissed) rows.push_back(&t);
  std::sort(rows.begin(), rows.end(), [](const ConversationThread* a, const ConversationThread* b) {
    return a->last_activity != b->last_activity ? a->last_activity > b->last_activity
                                                : a->thread_id > b->thread_id;
  });
  std::vector<TriageRow> out;
  for (const auto* t : rows) {
    TriageRow r;
    r.thread_id = t->thread_id;
    r.persona_id = t->persona_id;
    r.persona_name = persona_for(*t).full_name();
    r.platform = t->origin_platform;
    for (const Message* m : t->history())
      if (m->role == Role::scammer)
        r.inbound.push_back({m->model_content(), format_utc(m->at), m->at_local});
    r.sender_username = t->sender.username.empty() ? t->scammer_handles.at(t->origin_platform) : t->sender.username;
    r.sender_profile_thumbnail = t->sender.thumbnail;
    r.version = t->version;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TriageResult> Honeypot::triage_act(const std::vector<TriageDecision>& batch) {
  std::vector<TriageResult> out;
  for (const auto& d : batch) {
    TriageResult r;
    r.thread_id = d.thread_id;
    std::lock_guard lock(mu_);
    try {
      const auto& t = thread_cref(d.thread_id);
      if (t.state != ThreadState::new_thread || t.triage_dismissed ||
          (d.expected_version && *d.expected_version != t.version))
        throw Conflict("thread " + d.thread_id + " is no longer awaiting triage");
      AnnotatorAction a;
      a.annotator_id = d.annotator_id;
      a.thread_id = d.thread_id;
      a.verb = d.interact ? AnnotatorAction::Verb::interact : AnnotatorAction::Verb::ignore;
      a.opener_index = d.opener_index;
      auto res = act(a);
      r.ok = true;
      if (!res.item_ids.empty()) {
        r.item_id = res.item_ids.front();
        r.dispatch_at = queue_.find(r.item_id)->dispatch_at;
      }
    } catch (const Conflict& e) {
      r.error = "conflict";
      r.detail = e.what();
    } catch (const NotFound& e) {
      r.error = "not_found";
      r.detail = e.what();
    } catch (const Error& e) {
      r.error = "state";
      r.detail = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ThreadSummary> Honeypot::list_conversations(std::optional<PlatformId> platform) const {
  std::lock_guard lock(mu_);
  std::vector<ThreadSummary> out;
  for (const auto& [id, t] : threads_) {
    if (t.state == ThreadState::new_thread) continue;
    if (platform && !t.has_platform(*platform)) continue;
    ThreadSummary s;
    s.thread_id = id;
    s.persona_id = t.persona_id;
    s.state = t.state;
    for (const auto& seg : t.segments) s.platforms.push_back(seg.platform);
    s.message_count = t.message_count();
    s.needs_review = needs_review_locked(t);
    s.pending = t.pending_migration ? "migration" : t.pending_selfie_item ? "selfie" : "";
    s.scammer_msgs_since_review = t.scammer_msgs_since_review;
    s.next_checkpoint_in = std::max(0, opts_.checkpoint_every - t.scammer_msgs_since_review);
    s.version = t.version;
    s.last_activity = t.last_activity;
    out.push_back(std::move(s));
  }
  return out;
}

ConversationThread Honeypot::thread(const std::string& thread_id) const {
  std::lock_guard lock(mu_);
  return thread_cref(thread_id);
}

void Honeypot::audit(const AnnotatorAction& a, const json& extra) {
  json entry = {{"annotator", a.annotator_id},
                {"thread_id", a.thread_id},
                {"verb", std::string(to_string(a.verb))},
                {"at", format_utc(clock_.now())}};
  if (extra.is_object())
    for (const auto& [k, v] : extra.items()) entry[k] = v;
  emit({{"type", "audit"}, {"thread_id", a.thread_id}, {"entry", entry}});
}

ActResult Honeypot::act(const AnnotatorAction& a) {
  using V = AnnotatorAction::Verb;
  std::lock_guard lock(mu_);
  if (a.annotator_id.empty()) throw StateError("annotator_id is required");
  const auto& t = thread_cref(a.thread_id);
  if (a.expected_version && *a.expected_version != t.version)
    throw Conflict("thread " + a.thread_id + " changed (version " + std::to_string(t.version) +
                   ", expected " + std::to_string(*a.expected_version) + ")");

  ActResult res;
  res.thread_id = a.thread_id;
  const auto review = [&] { emit({{"type", "review"}, {"thread_id", a.thread_id}}); };
  const auto transition = [&](queue::Action act, std::optional<Seconds> cooldown = std::nullopt) {
    // Validate on a copy first so an illegal action leaves no event behind.
    auto probe = t;
    queue::transition(probe, act, clock_.now(), cooldown.value_or(opts_.ignore_cooldown));
    json ev = {{"type", "transition"}, {"thread_id", a.thread_id}, {"action", std::string(queue::to_string(act))},
               {"annotator", a.annotator_id}};
    if (cooldown) ev["cooldown_s"] = cooldown->count();
    emit(ev);
  };

  switch (a.verb) {
    case V::ignore:
      transition(queue::Action::ignore);
      audit(a);
      break;
    case V::snooze:
      if (t.state == ThreadState::new_thread) throw StateError("snooze is not a triage action");
      transition(queue::Action::ignore, a.snooze_for.value_or(opts_.ignore_cooldown));
      audit(a, {{"snooze_s", a.snooze_for.value_or(opts_.ignore_cooldown).count()}});
      break;
    case V::halt:
      transition(queue::Action::halt);
      audit(a);
      break;
    case V::interact: {
      if (t.state != ThreadState::new_thread) throw StateError("interact is only available from triage");
      if (a.opener_index < 0 || a.opener_index >= static_cast<int>(opts_.openers.size()))
        throw StateError("opener_index out of range");
      transition(queue::Action::interact);
      const auto& cur = thread_cref(a.thread_id);
      res.item_ids.push_back(enqueue_reply(cur, ItemKind::opener,
                                           Payload{opts_.openers[static_cast<std::size_t>(a.opener_index)], std::nullopt},
                                           "opener"));
      audit(a, {{"opener_index", a.opener_index}, {"item_id", res.item_ids.back()}});
      break;
    }
    case V::toggle_auto:
      transition(queue::Action::toggle_auto);
      audit(a);
      if (thread_cref(a.thread_id).state == ThreadState::active_auto) {
        const auto& cur = thread_cref(a.thread_id);
        const auto* last = cur.last_message();
        if (last && last->role == Role::scammer && queue_.open_for(a.thread_id).empty()) {
          if (queue::should_force_review(cur, {}, opts_.first_n_human, opts_.checkpoint_every))
            emit({{"type", "checkpoint"}, {"thread_id", a.thread_id}, {"reason", "bootstrap"}});
          else
            auto_reply(a.thread_id);
        }
      }
      break;
    case V::regenerate:
      if (t.state == ThreadState::new_thread || t.state == ThreadState::halted)
        throw StateError("no candidates for a thread in state " + std::string(to_string(t.state)));
      res.candidates = prompt::generate_candidates(response_context(t, clock_.now()), dialogue_,
                                                   opts_.max_retries, opts_.candidates_k);
      audit(a, {{"candidates", res.candidates.size()}});
      break;
    case V::submit: {
      if (t.state != ThreadState::manual && t.state != ThreadState::active_auto)
        throw StateError("cannot submit a reply in state " + std::string(to_string(t.state)));
      if (a.text.empty()) throw StateError("submit needs text");
      if (!queue_.open_for(a.thread_id).empty())
        throw Conflict("a reply is already queued for thread " + a.thread_id);
      queue::check_serialization(t, {}, reply_platform(t));
      review();
      const auto& cur = thread_cref(a.thread_id);
      res.item_ids.push_back(enqueue_reply(cur, ItemKind::reply, Payload{a.text, std::nullopt},
                                           "annotator:" + a.annotator_id));
      audit(a, {{"item_id", res.item_ids.back()}, {"text", a.text}});
      break;
    }
    case V::approve_selfie: {
      if (!t.pending_selfie_item) throw StateError("no pending selfie request on thread " + a.thread_id);
      const auto& p = persona_for(t);
      if (std::find(p.selfie_assets.begin(), p.selfie_assets.end(), a.asset_id) == p.selfie_assets.end())
        throw StateError("asset " + a.asset_id + " is not in the persona's selfie pool");
      const auto item_id = *t.pending_selfie_item;
      const auto dispatch_at = clock_.now() + sampler_.sample(rng_);
      review();
      emit({{"type", "selfie_decision"}, {"thread_id", a.thread_id}, {"item_id", item_id}, {"granted", true},
            {"asset", a.asset_id}, {"text", a.text}, {"annotator", a.annotator_id},
            {"dispatch_at", format_utc(dispatch_at)}});
      res.item_ids.push_back(item_id);
      audit(a, {{"item_id", item_id}, {"asset_id", a.asset_id}});
      break;
    }
    case V::approve_migration: {
      if (!t.pending_migration) throw StateError("no pending migration on thread " + a.thread_id);
      const auto item_id = t.pending_migration->item_id;
      int idx = a.template_index.value_or(
          static_cast<int>(rng_() % static_cast<std::uint64_t>(migration::kReintroTemplateCount)));
      if (idx < 0 || idx >= migration::kReintroTemplateCount) throw StateError("template_index out of range");
      review();
      emit({{"type", "migration_approved"}, {"thread_id", a.thread_id}, {"item_id", item_id},
            {"annotator", a.annotator_id}, {"template_index", idx}});
      res.item_ids.push_back(item_id);
      audit(a, {{"item_id", item_id}, {"template_index", idx}});
      send_reintro(a.thread_id);
      break;
    }
    case V::deny: {
      if (t.pending_migration) {
        const auto item_id = t.pending_migration->item_id;
        review();
        emit({{"type", "migration_denied"}, {"thread_id", a.thread_id}, {"item_id", item_id},
              {"annotator", a.annotator_id}});
        res.item_ids.push_back(item_id);
      } else if (t.pending_selfie_item) {
        const auto item_id = *t.pending_selfie_item;
        review();
        emit({{"type", "selfie_decision"}, {"thread_id", a.thread_id}, {"item_id", item_id},
              {"granted", false}, {"annotator", a.annotator_id}});
        res.item_ids.push_back(item_id);
      } else {
        throw StateError("nothing pending to deny on thread " + a.thread_id);
      }
      audit(a, {{"item_id", res.item_ids.back()}});
      auto_reply(a.thread_id);
      break;
    }
  }
  const auto& after = thread_cref(a.thread_id);
  res.state = after.state;
  res.version = after.version;
  return res;
}

std::vector<prompt::ResponseCandidate> Honeypot::candidates(const std::string& thread_id, int k,
                                                            const std::string& annotator_id) {
  std::lock_guard lock(mu_);
  const auto& t = thread_cref(thread_id);
  if (t.state == ThreadState::new_thread || t.state == ThreadState::halted)
    throw StateError("no candidates for a thread in state " + std::string(to_string(t.state)));
  if (k < 1 || k > 10) throw StateError("k must be within [1, 10]");
  auto out = prompt::generate_candidates(response_context(t, clock_.now()), dialogue_,
                                         opts_.max_retries, k);
  AnnotatorAction a;
  a.annotator_id = annotator_id.empty() ? "api" : annotator_id;
  a.thread_id = thread_id;
  a.verb = AnnotatorAction::Verb::regenerate;
  audit(a, {{"candidates", out.size()}});
  return out;
}

// ---------------------------------------------------------------------------
// Views

std::vector<ConversationThread> Honeypot::threads() const {
  std::lock_guard lock(mu_);
  std::vector<ConversationThread> out;
  for (const auto& [id, t] : threads_) out.push_back(t);
  return out;
}

std::vector<QueueItem> Honeypot::queue_items() const {
  std::lock_guard lock(mu_);
  std::vector<QueueItem> out;
  for (const auto& [id, q] : queue_.items()) out.push_back(q);
  std::sort(out.begin(), out.end(), [](const QueueItem& a, const QueueItem& b) { return a.seq < b.seq; });
  return out;
}

std::vector<json> Honeypot::audit_log() const {
  std::lock_guard lock(mu_);
  return audit_;
}

std::vector<poll::SeedAction> Honeypot::seed_actions() const {
  std::lock_guard lock(mu_);
  return seeds_;
}

json Honeypot::snapshot() const {
  std::lock_guard lock(mu_);
  json s;
  json threads = json::array();
  for (const auto& [id, t] : threads_) threads.push_back(to_json(t));
  json items = json::array();
  for (const auto& [id, q] : queue_.items()) items.push_back(queue::to_json(q));
  json fb = json::array();
  for (const auto& [p, acct, follower] : follow_backs_.entries())
    fb.push_back({std::string(platform_code(p)), acct, follower});
  json seeds = json::array();
  for (const auto& a : seeds_) seeds.push_back(seed_json(a));
  s["threads"] = threads;
  s["queue"] = items;
  s["bindings"] = pool_.bindings_json();
  s["follow_backs"] = fb;
  s["seeds"] = seeds;
  s["social_inbound"] = social_inbound_;
  s["audit"] = audit_;
  s["cursors"] = cursors_;
  return s;
}

std::string Honeypot::snapshot_text() const { return snapshot().dump(2); }

}  // namespace chatterbox
