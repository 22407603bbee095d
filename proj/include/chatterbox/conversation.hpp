#pragma once

#include <chatterbox/platform.hpp>
#include <chatterbox/time.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace chatterbox {

enum class Role { scammer, persona, system };
enum class Direction { inbound, outbound };

std::string_view to_string(Role r);
Role parse_role(std::string_view s);

struct DetectionEvent {
  enum class Kind { phone_number, selfie_request, platform_mention, payment_mention };
  Kind kind = Kind::phone_number;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string value;
  bool requires_approval = false;

  bool operator==(const DetectionEvent&) const = default;
};
std::string_view to_string(DetectionEvent::Kind k);
DetectionEvent::Kind parse_detection_kind(std::string_view s);

struct CaptionedMedia {
  MediaKind kind = MediaKind::image;
  std::string asset_ref;
  std::string caption;
  std::string marker_text;
  // False when the captioner failed and marker_text is a placeholder.
  bool captioned = true;

  bool operator==(const CaptionedMedia&) const = default;
};

struct Message {
  std::uint64_t index = 0;  // 1-based position in the whole thread
  Direction direction = Direction::inbound;
  Role role = Role::scammer;
  PlatformId platform = PlatformId::ts_like;
  Instant at{};
  std::string at_local;
  std::string text;
  std::optional<CaptionedMedia> media;
  // Outbound media asset (selfies); inbound media lives in `media`.
  std::optional<std::string> sent_asset;
  std::vector<DetectionEvent> detections;
  // "scammer", "auto", "annotator:<id>", "opener", "reintro".
  std::string origin;

  /// Text handed to the dialogue model: body plus the caption marker.
  std::string model_content() const;

  bool operator==(const Message&) const = default;
};

struct Segment {
  PlatformId platform = PlatformId::ts_like;
  std::string scammer_handle;
  std::string honeypot_account;
  bool dormant = false;
  std::vector<Message> messages;

  bool operator==(const Segment&) const = default;
};

enum class ThreadState { new_thread, manual, active_auto, awaiting_approval, snoozed, halted };
std::string_view to_string(ThreadState s);
ThreadState parse_thread_state(std::string_view s);

struct MigrationRecord {
  std::string thread_id;
  PlatformId origin_platform = PlatformId::ts_like;
  std::string scammer_number;
  std::string approved_by;
  int reintro_template_index = 0;
  Instant completed_at{};
  std::string account_phone;

  bool operator==(const MigrationRecord&) const = default;
};

struct PendingMigration {
  std::string scammer_number;
  std::string item_id;
  std::uint64_t message_index = 0;

  bool operator==(const PendingMigration&) const = default;
};

struct ConversationThread {
  std::string thread_id;
  std::string persona_id;
  PlatformId origin_platform = PlatformId::ts_like;
  std::string origin_account;
  std::map<PlatformId, std::string> scammer_handles;
  AccountMetadata sender;
  std::vector<Segment> segments;

  ThreadState state = ThreadState::new_thread;
  // State to resume once a pending approval resolves.
  ThreadState resume_state = ThreadState::manual;
  std::optional<Instant> snooze_until;
  bool triage_dismissed = false;
  std::string halt_reason;

  int scammer_msgs_since_review = 0;
  int total_persona_turns = 0;
  int total_scammer_turns = 0;
  bool checkpoint_pending = false;

  std::optional<MigrationRecord> migration;
  std::optional<PendingMigration> pending_migration;
  std::optional<std::string> pending_selfie_item;

  Instant opened_at{};
  Instant last_activity{};
  std::uint64_t version = 0;

  std::size_t message_count() const;
  /// Chronological view over all segments.
  std::vector<const Message*> history() const;
  const Message* last_message() const;
  const Message* last_inbound() const;
  Segment* segment(PlatformId p);
  const Segment* segment(PlatformId p) const;
  bool has_platform(PlatformId p) const { return segment(p) != nullptr; }

  bool operator==(const ConversationThread&) const = default;
};

nlohmann::json to_json(const DetectionEvent& d);
DetectionEvent detection_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CaptionedMedia& m);
CaptionedMedia captioned_media_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Message& m);
Message message_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MigrationRecord& r);
MigrationRecord migration_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConversationThread& t);
ConversationThread thread_from_json(const nlohmann::json& j);

}  // namespace chatterbox
