#include <chatterbox/conversation.hpp>
#include <chatterbox/errors.hpp>

#include <algorithm>

namespace chatterbox {

using nlohmann::json;

std::string_view to_string(Role r) {
  switch (r) {
    case Role::scammer: return "scammer";
    case Role::persona: return "persona";
    case Role::system: return "system";
  }
  return "?";
}

Role parse_role(std::string_view s) {
  if (s == "scammer") return Role::scammer;
  if (s == "persona") return Role::persona;
  if (s == "system") return Role::system;
  throw ParseError("role", "unknown role '" + std::string(s) + "'");
}

std::string_view to_string(DetectionEvent::Kind k) {
  switch (k) {
    case DetectionEvent::Kind::phone_number: return "phone_number";
    case DetectionEvent::Kind::selfie_request: return "selfie_request";
    case DetectionEvent::Kind::platform_mention: return "platform_mention";
    case DetectionEvent::Kind::payment_mention: return "payment_mention";
  }
  return "?";
}

DetectionEvent::Kind parse_detection_kind(std::string_view s) {
  for (auto k : {DetectionEvent::Kind::phone_number, DetectionEvent::Kind::selfie_request,
                 DetectionEvent::Kind::platform_mention, DetectionEvent::Kind::payment_mention})
    if (s == to_string(k)) return k;
  throw ParseError("kind", "unknown detection kind '" + std::string(s) + "'");
}

std::string_view to_string(ThreadState s) {
  switch (s) {
    case ThreadState::new_thread: return "new";
    case ThreadState::manual: return "triaged_active_manual";
    case ThreadState::active_auto: return "active_auto";
    case ThreadState::awaiting_approval: return "awaiting_approval";
    case ThreadState::snoozed: return "snoozed";
    case ThreadState::halted: return "halted";
  }
  return "?";
}

ThreadState parse_thread_state(std::string_view s) {
  for (auto st : {ThreadState::new_thread, ThreadState::manual, ThreadState::active_auto,
                  ThreadState::awaiting_approval, ThreadState::snoozed, ThreadState::halted})
    if (s == to_string(st)) return st;
  if (s == "manual") return ThreadState::manual;
  throw ParseError("state", "unknown thread state '" + std::string(s) + "'");
}

std::string Message::model_content() const {
  if (!media) return text;
  if (text.empty()) return media->marker_text;
  return text + " " + media->marker_text;
}

std::size_t ConversationThread::message_count() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.messages.size();
  return n;
}

std::vector<const Message*> ConversationThread::history() const {
  std::vector<const Message*> out;
  for (const auto& s : segments)
    for (const auto& m : s.messages) out.push_back(&m);
  std::stable_sort(out.begin(), out.end(),
                   [](const Message* a, const Message* b) { return a->index < b->index; });
  return out;
}

const Message* ConversationThread::last_message() const {
  const Message* best = nullptr;
  for (const auto& s : segments)
    if (!s.messages.empty() && (!best || s.messages.back().index > best->index))
      best = &s.messages.back();
  return best;
}

const Message* ConversationThread::last_inbound() const {
  const Message* best = nullptr;
  for (const auto& s : segments)
    for (const auto& m : s.messages)
      if (m.direction == Direction::inbound && (!best || m.index > best->index)) best = &m;
  return best;
}

Segment* ConversationThread::segment(PlatformId p) {
  for (auto& s : segments)
    if (s.platform == p) return &s;
  return nullptr;
}

const Segment* ConversationThread::segment(PlatformId p) const {
  for (const auto& s : segments)
    if (s.platform == p) return &s;
  return nullptr;
}

// ---------------------------------------------------------------------------

json to_json(const DetectionEvent& d) {
  return {{"kind", std::string(to_string(d.kind))},
          {"begin", d.begin},
          {"end", d.end},
          {"value", d.value},
          {"requires_approval", d.requires_approval}};
}

DetectionEvent detection_from_json(const json& j) {
  DetectionEvent d;
  d.kind = parse_detection_kind(j.at("kind").get<std::string>());
  d.begin = j.at("begin").get<std::size_t>();
  d.end = j.at("end").get<std::size_t>();
  d.value = j.at("value").get<std::string>();
  d.requires_approval = j.at("requires_approval").get<bool>();
  return d;
}

json to_json(const CaptionedMedia& m) {
  return {{"kind", std::string(to_string(m.kind))},
          {"asset", m.asset_ref},
          {"caption", m.caption},
          {"marker", m.marker_text},
          {"captioned", m.captioned}};
}

CaptionedMedia captioned_media_from_json(const json& j) {
  CaptionedMedia m;
  m.kind = parse_media_kind(j.at("kind").get<std::string>());
  m.asset_ref = j.at("asset").get<std::string>();
  m.caption = j.at("caption").get<std::string>();
  m.marker_text = j.at("marker").get<std::string>();
  m.captioned = j.value("captioned", true);
  return m;
}

json to_json(const Message& m) {
  json j = {{"index", m.index},
            {"direction", m.direction == Direction::inbound ? "inbound" : "outbound"},
            {"role", std::string(to_string(m.role))},
            {"platform", std::string(platform_code(m.platform))},
            {"at", format_utc(m.at)},
            {"at_local", m.at_local},
            {"text", m.text},
            {"origin", m.origin}};
  if (m.media) j["media"] = to_json(*m.media);
  if (m.sent_asset) j["sent_asset"] = *m.sent_asset;
  json d = json::array();
  for (const auto& e : m.detections) d.push_back(to_json(e));
  j["detections"] = d;
  return j;
}

Message message_from_json(const json& j) {
  Message m;
  m.index = j.at("index").get<std::uint64_t>();
  m.direction = j.at("direction").get<std::string>() == "inbound" ? Direction::inbound
                                                                  : Direction::outbound;
  m.role = parse_role(j.at("role").get<std::string>());
  m.platform = parse_platform(j.at("platform").get<std::string>());
  m.at = parse_utc(j.at("at").get<std::string>());
  m.at_local = j.at("at_local").get<std::string>();
  m.text = j.at("text").get<std::string>();
  m.origin = j.value("origin", std::string{});
  if (j.contains("media")) m.media = captioned_media_from_json(j.at("media"));
  if (j.contains("sent_asset")) m.sent_asset = j.at("sent_asset").get<std::string>();
  for (const auto& d : j.value("detections", json::array())) m.detections.push_back(detection_from_json(d));
  return m;
}

json to_json(const MigrationRecord& r) {
  return {{"thread_id", r.thread_id},
          {"origin_platform", std::string(platform_code(r.origin_platform))},
          {"scammer_number", r.scammer_number},
          {"approved_by", r.approved_by},
          {"reintro_template_index", r.reintro_template_index},
          {"completed_at", format_utc(r.completed_at)},
          {"account_phone", r.account_phone}};
}

MigrationRecord migration_record_from_json(const json& j) {
  MigrationRecord r;
  r.thread_id = j.at("thread_id").get<std::string>();
  r.origin_platform = parse_platform(j.at("origin_platform").get<std::string>());
  r.scammer_number = j.at("scammer_number").get<std::string>();
  r.approved_by = j.at("approved_by").get<std::string>();
  r.reintro_template_index = j.at("reintro_template_index").get<int>();
  r.completed_at = parse_utc(j.at("completed_at").get<std::string>());
  r.account_phone = j.value("account_phone", std::string{});
  return r;
}

json to_json(const ConversationThread& t) {
  json handles = json::object();
  for (const auto& [p, h] : t.scammer_handles) handles[std::string(platform_code(p))] = h;
  json segs = json::array();
  for (const auto& s : t.segments) {
    json msgs = json::array();
    for (const auto& m : s.messages) msgs.push_back(to_json(m));
    segs.push_back({{"platform", std::string(platform_code(s.platform))},
                    {"scammer_handle", s.scammer_handle},
                    {"honeypot_account", s.honeypot_account},
                    {"dormant", s.dormant},
                    {"messages", msgs}});
  }
  json j = {{"thread_id", t.thread_id},
            {"persona_id", t.persona_id},
            {"origin_platform", std::string(platform_code(t.origin_platform))},
            {"origin_account", t.origin_account},
            {"scammer_handles", handles},
            {"sender", to_json(t.sender)},
            {"segments", segs},
            {"state", std::string(to_string(t.state))},
            {"resume_state", std::string(to_string(t.resume_state))},
            {"triage_dismissed", t.triage_dismissed},
            {"halt_reason", t.halt_reason},
            {"scammer_msgs_since_review", t.scammer_msgs_since_review},
            {"total_persona_turns", t.total_persona_turns},
            {"total_scammer_turns", t.total_scammer_turns},
            {"checkpoint_pending", t.checkpoint_pending},
            {"opened_at", format_utc(t.opened_at)},
            {"last_activity", format_utc(t.last_activity)},
            {"version", t.version}};
  j["snooze_until"] = t.snooze_until ? json(format_utc(*t.snooze_until)) : json(nullptr);
  j["migration"] = t.migration ? to_json(*t.migration) : json(nullptr);
  j["pending_migration"] =
      t.pending_migration ? json{{"scammer_number", t.pending_migration->scammer_number},
                                 {"item_id", t.pending_migration->item_id},
                                 {"message_index", t.pending_migration->message_index}}
                          : json(nullptr);
  j["pending_selfie_item"] = t.pending_selfie_item ? json(*t.pending_selfie_item) : json(nullptr);
  return j;
}

ConversationThread thread_from_json(const json& j) {
  ConversationThread t;
  t.thread_id = j.at("thread_id").get<std::string>();
  t.persona_id = j.at("persona_id").get<std::string>();
  t.origin_platform = parse_platform(j.at("origin_platform").get<std::string>());
  t.origin_account = j.at("origin_account").get<std::string>();
  for (const auto& [k, v] : j.at("scammer_handles").items())
    t.scammer_handles[parse_platform(k)] = v.get<std::string>();
  t.sender = account_metadata_from_json(j.at("sender"));
  for (const auto& s : j.at("segments")) {
    Segment seg;
    seg.platform = parse_platform(s.at("platform").get<std::string>());
    seg.scammer_handle = s.at("scammer_handle").get<std::string>();
    seg.honeypot_account = s.at("honeypot_account").get<std::string>();
    seg.dormant = s.at("dormant").get<bool>();
    for (const auto& m : s.at("messages")) seg.messages.push_back(message_from_json(m));
    t.segments.push_back(std::move(seg));
  }
  t.state = parse_thread_state(j.at("state").get<std::string>());
  t.resume_state = parse_thread_state(j.at("resume_state").get<std::string>());
  t.triage_dismissed = j.at("triage_dismissed").get<bool>();
  t.halt_reason = j.at("halt_reason").get<std::string>();
  t.scammer_msgs_since_review = j.at("scammer_msgs_since_review").get<int>();
  t.total_persona_turns = j.at("total_persona_turns").get<int>();
  t.total_scammer_turns = j.at("total_scammer_turns").get<int>();
  t.checkpoint_pending = j.at("checkpoint_pending").get<bool>();
  t.opened_at = parse_utc(j.at("opened_at").get<std::string>());
  t.last_activity = parse_utc(j.at("last_activity").get<std::string>());
  t.version = j.at("version").get<std::uint64_t>();
  if (!j.at("snooze_until").is_null()) t.snooze_until = parse_utc(j.at("snooze_until").get<std::string>());
  if (!j.at("migration").is_null()) t.migration = migration_record_from_json(j.at("migration"));
  if (!j.at("pending_migration").is_null()) {
    const auto& p = j.at("pending_migration");
    t.pending_migration = PendingMigration{p.at("scammer_number").get<std::string>(),
                                           p.at("item_id").get<std::string>(),
                                           p.at("message_index").get<std::uint64_t>()};
  }
  if (!j.at("pending_selfie_item").is_null())
    t.pending_selfie_item = j.at("pending_selfie_item").get<std::string>();
  return t;
}

}  // namespace chatterbox
